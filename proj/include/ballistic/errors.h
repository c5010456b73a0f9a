#pragma once

#include <stdexcept>
#include <string>

namespace ballistic {

struct VertexStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or parameters. Maps to CLI exit code 2.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File system failure; the message carries the path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Convergence or numeric failure. Maps to CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ballistic
