#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ballistic/acceptance.h"
#include "ballistic/errors.h"
#include "ballistic/harness.h"

using namespace ballistic;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<int> threads;
    std::string out;
};

int cmd_run(const std::string& path, const Overrides& o) {
    auto config = ExperimentConfig::load(path);
    if (o.seed) config.seed = *o.seed;
    if (o.trials) config.trials = *o.trials;
    if (o.threads) config.threads = *o.threads;
    config.validate();
    std::string dir = !o.out.empty() ? o.out : config.output;
    if (dir.empty()) {
        dir = "results/" + config.scenario + "-" + config.hash();
    }
    auto out = run_experiment(config);
    write_run(config, out, dir);
    std::cout << summary_csv(out.summary, config.hash());
    std::cerr << "wrote " << dir << " (" << out.records.size() << " trials, " << out.wall_seconds << " s)\n";
    return 0;
}

int cmd_figure(const std::string& results, const std::string& id, const std::string& out) {
    auto fig = emit_figure(results, id);
    std::string dir = out.empty() ? std::filesystem::path(results).parent_path().string() : out;
    if (dir.empty()) {
        dir = ".";
    }
    write_figure(fig, id, dir);
    std::cout << fig.data.csv();
    std::cerr << "wrote " << (std::filesystem::path(dir) / (id + ".csv")).string() << " and " << id << ".svg\n";
    return 0;
}

int cmd_verify(const Overrides& o, const std::vector<int>& only) {
    AcceptanceOptions options;
    if (o.seed) options.seed = *o.seed;
    if (o.threads) options.threads = *o.threads;
    options.only.insert(only.begin(), only.end());
    std::size_t failed = 0;
    auto results = run_acceptance(options, [&](const CriterionResult& r) {
        std::cout << format_criterion(r) << std::endl;
        failed += !r.pass;
    });
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ballistic photonic cluster-state experiments"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&](CLI::App* sub, bool trials_and_out) {
        sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { o.seed = v; }, "RNG seed");
        sub->add_option_function<int>("--threads", [&](const int& v) { o.threads = v; }, "OpenMP threads (0: default)");
        if (trials_and_out) {
            sub->add_option_function<std::size_t>("--trials", [&](const std::size_t& v) { o.trials = v; },
                                                   "Number of trials");
            sub->add_option("--out", o.out, "Output directory");
        }
    };

    std::string config_path, results_path, figure_id;
    std::vector<int> only;
    auto run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    add_common(run, true);

    auto figure = app.add_subcommand("figure", "Emit figure CSV and SVG from a results file");
    figure->add_option("results", results_path, "results.jsonl of a run")->required();
    figure->add_option("figure_id", figure_id, "One of: " + [] {
        std::string s;
        for (const auto& id : figure_ids()) s += (s.empty() ? "" : ", ") + id;
        return s;
    }())->required();
    figure->add_option("--out", o.out, "Output directory (default: next to results)");

    auto verify = app.add_subcommand("verify", "Run the acceptance suite");
    verify->add_option("criteria", only, "Criterion ids to run (default: all)");
    add_common(verify, false);

    auto scenarios = app.add_subcommand("scenarios", "List scenarios and their default parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, o);
        if (figure->parsed()) return cmd_figure(results_path, figure_id, o.out);
        if (verify->parsed()) return cmd_verify(o, only);
        if (scenarios->parsed()) {
            for (const auto& s : scenario_names()) {
                std::cout << s << " " << scenario_defaults(s).dump() << "\n";
            }
            return 0;
        }
    } catch (const SpecError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
