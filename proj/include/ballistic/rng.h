#pragma once

#include <cstdint>
#include <limits>

namespace ballistic {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based generator: the stream for (seed, stream_id) is a pure function
// of those two keys, so trial i draws the same numbers on any thread.
class CounterRng {
   public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    // Uniform in [0, 1) with 53 random bits.
    double uniform01();
    bool bernoulli(double p);
    // Uniform in [0, n). n > 0.
    std::uint64_t below(std::uint64_t n);

    // Independent child generator; used to give sub-tasks their own streams.
    CounterRng split(std::uint64_t child_id) const;

    std::uint64_t counter() const { return counter_; }

   private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace ballistic
