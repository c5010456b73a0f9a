#include <cstdio>
#include <cstdlib>
#include <string>

#include "ballistic/acceptance.h"

int main(int argc, char** argv) {
    ballistic::AcceptanceOptions options;
    for (int i = 1; i < argc; ++i) {
        options.only.insert(std::atoi(argv[i]));
    }
    int failures = 0;
    auto results = ballistic::run_acceptance(options, [&](const ballistic::CriterionResult& r) {
        std::printf("%s\n", ballistic::format_criterion(r).c_str());
        std::fflush(stdout);
        failures += !r.pass;
    });
    std::printf("%zu/%zu criteria passed\n", results.size() - static_cast<std::size_t>(failures), results.size());
    return failures == 0 && !results.empty() ? 0 : 1;
}
