#include "ballistic/acceptance.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ballistic/builder.h"
#include "ballistic/fock.h"
#include "ballistic/graph_oracle.h"
#include "ballistic/harness.h"
#include "ballistic/loss_tolerance.h"
#include "ballistic/multiplex.h"
#include "ballistic/percolation.h"

namespace ballistic {

namespace {

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
        }
        detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "FAILED ") << what;
    }
};

std::string num(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

bool within_sigma(double estimate, double expected, double sigma, double k = 3) {
    return std::abs(estimate - expected) <= k * sigma + 1e-15;
}

// Two-sided consistency at the 3-sigma level (p >= 0.0027). Uses the normal
// approximation when n q (1 - q) >= 9 and the exact binomial tail otherwise.
bool binomial_consistent(std::size_t successes, std::size_t n, double q) {
    const double N = static_cast<double>(n), k = static_cast<double>(successes);
    if (N * q * (1 - q) >= 9) {
        return within_sigma(k / N, q, std::sqrt(q * (1 - q) / N));
    }
    if (q <= 0 || q >= 1) {
        return k == (q >= 1 ? N : 0);
    }
    auto pmf = [&](double j) {
        return std::exp(std::lgamma(N + 1) - std::lgamma(j + 1) - std::lgamma(N - j + 1) + j * std::log(q) +
                        (N - j) * std::log1p(-q));
    };
    double tail = 0;
    if (k >= N * q) {
        for (double j = 0; j < k; ++j) tail += pmf(j);
        tail = 1 - tail;
    } else {
        for (double j = 0; j <= k; ++j) tail += pmf(j);
    }
    return 2 * tail >= 0.0027;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig config(const std::string& scenario, std::uint64_t seed, std::size_t trials, int threads,
                        nlohmann::json params) {
    ExperimentConfig c;
    c.scenario = scenario;
    c.seed = seed;
    c.trials = trials;
    c.threads = threads;
    c.params = std::move(params);
    c.validate();
    return c;
}

using Body = std::function<void(Check&, const AcceptanceOptions&)>;

struct Criterion {
    int id;
    const char* name;
    double limit;
    Body body;
};

std::vector<Criterion> criteria() {
    std::vector<Criterion> list;

    list.push_back({1, "hom-dip", 1, [](Check& c, const AcceptanceOptions&) {
                        double p = hom_coincidence_probability();
                        c.require(std::abs(p) <= 1e-12, "coincidence " + num(p));
                    }});

    list.push_back({2, "type2-fusion-half", 1, [](Check& c, const AcceptanceOptions&) {
                        double p = type2_fusion_success_probability();
                        c.require(std::abs(p - 0.5) <= 1e-9, "success " + num(p, 12));
                    }});

    list.push_back({3, "graph-vs-dense-oracle", 60, [](Check& c, const AcceptanceOptions& o) {
                        auto r = fuzz_graph_vs_dense(10000, o.seed, 10);
                        c.require(r.cases == 10000 && r.failures == 0,
                                  std::to_string(r.cases) + " sequences, " + std::to_string(r.failures) + " failures" +
                                      (r.first_failure.empty() ? "" : " (" + r.first_failure + ")"));
                    }});

    list.push_back({4, "block-mux-law", 10, [](Check& c, const AcceptanceOptions& o) {
                        const double expected = 1 - std::pow(0.8, 8);
                        auto e = block_mux_monte_carlo(0.2, 3, 1000000, o.seed, o.threads);
                        double sigma = std::sqrt(expected * (1 - expected) / 1e6);
                        c.require(std::abs(standard_mux_prob(0.2, 3) - expected) <= 1e-12,
                                  "closed form " + num(standard_mux_prob(0.2, 3), 10));
                        c.require(std::abs(expected - 0.83223) <= 5e-6, "quoted 0.83223");
                        c.require(within_sigma(e.estimate, expected, sigma),
                                  "MC " + num(e.estimate) + " vs " + num(expected) + " (3 sigma " + num(3 * sigma, 3) +
                                      ")");
                    }});

    list.push_back({5, "pair-yield-shape", 60, [](Check& c, const AcceptanceOptions& o) {
                        const double quoted[] = {0.0400, 0.0648, 0.0872, 0.0866, 0.0590};
                        double f[5];
                        std::string values;
                        bool close = true;
                        for (int S = 0; S < 5; ++S) {
                            f[S] = standard_mux_pair_yield(0.2, S);
                            close = close && std::abs(f[S] - quoted[S]) <= 1e-4;
                            values += (S ? "," : "") + num(f[S], 5);
                        }
                        c.require(close, "closed form {" + values + "} within 1e-4 of quoted");
                        c.require(f[2] > f[0] && f[4] < f[3], "f(2)>f(0), f(4)<f(3)");
                        YieldOptions y;
                        y.p = 0.2;
                        y.s_max = 6;
                        y.bins = 100000;
                        y.seed = o.seed;
                        y.threads = o.threads;
                        bool dominate = true;
                        std::string worst;
                        for (const auto& pt : yield_curve(y)) {
                            double sigma = std::sqrt(2) * pt.sigma;
                            bool ok = pt.sliding_yield + 3 * sigma >= pt.standard_yield &&
                                      pt.matching_yield + 3 * sigma >= pt.sliding_yield;
                            if (!ok) {
                                dominate = false;
                                worst += " S=" + std::to_string(pt.S);
                            }
                        }
                        c.require(dominate, "matching >= sliding >= standard for S=0..6" + worst);
                    }});

    list.push_back({6, "crazy-graph-law", 60, [](Check& c, const AcceptanceOptions& o) {
                        CrazyGraphSpec main{50, 3, 0.1, 0};
                        double q = teleport_success_prob(main);
                        c.require(std::abs(q - 0.95121) <= 5e-6, "closed form " + num(q, 7));
                        int bad = 0;
                        std::string head;
                        for (double eps : {0.1, 0.3, 0.5}) {
                            for (int L : {1, 2, 3}) {
                                CrazyGraphSpec s{50, L, eps, 0};
                                double expected = teleport_success_prob(s);
                                auto e = simulate_teleport(s, 100000, o.seed, o.threads);
                                if (!binomial_consistent(e.successes, e.trials, expected)) {
                                    ++bad;
                                }
                                if (eps == 0.1 && L == 3) {
                                    head = "MC " + num(e.success_rate) + " at (0.1,3,50)";
                                }
                            }
                        }
                        c.require(bad == 0, head + ", " + std::to_string(9 - bad) + "/9 grid points within 3 sigma");
                    }});

    list.push_back({7, "majority-vote-flip", 30, [](Check& c, const AcceptanceOptions& o) {
                        double tail = column_flip_prob(7, 0, 0.1);
                        c.require(std::abs(tail - 0.002728) <= 5e-7, "binomial tail " + num(tail, 7));
                        auto e = simulate_teleport({1, 7, 0, 0.1}, 1000000, o.seed, o.threads);
                        double sigma = std::sqrt(tail * (1 - tail) / 1e6);
                        c.require(within_sigma(e.flip_rate, tail, sigma),
                                  "MC flip rate " + num(e.flip_rate) + " (3 sigma " + num(3 * sigma, 3) + ")");
                    }});

    list.push_back({8, "square-threshold", 300, [](Check& c, const AcceptanceOptions& o) {
                        ThresholdOptions t;
                        t.trials_per_probe = 1000;
                        t.tolerance = 0.01;
                        t.seed = o.seed;
                        t.threads = o.threads;
                        auto est = estimate_threshold(square_lattice_family(128), t);
                        c.require(est.estimate >= 0.48 && est.estimate <= 0.52,
                                  "estimate " + num(est.estimate, 4) + " bracket [" + num(est.low, 4) + ", " +
                                      num(est.high, 4) + "]");
                    }});

    list.push_back({9, "wafer-spanning", 300, [](Check& c, const AcceptanceOptions& o) {
                        auto cfg = config("wafer-span", o.seed, 100, o.threads, {{"nx", 12}, {"ny", 6}, {"nz", 50}});
                        auto t = run_experiment(cfg).summary;
                        double spans = t.values("spans").at(0);
                        c.require(spans >= 99, num(spans) + "/100 z-crossings");
                    }});

    list.push_back({10, "filter-critical-fidelity", 600, [](Check& c, const AcceptanceOptions& o) {
                        std::vector<double> fs;
                        for (int i = 85; i <= 100; ++i) {
                            fs.push_back(i / 100.0);
                        }
                        auto cfg = config("filter-scan", o.seed, 100, o.threads, {{"fidelities", fs}});
                        auto t = run_experiment(cfg).summary;
                        double f = level_crossing(t.values("fidelity"), t.values("estimate"), 0.5);
                        c.require(std::isfinite(f) && f >= 0.90 && f <= 0.99, "critical fidelity " + num(f, 4));
                    }});

    list.push_back({11, "punch-out-loss-threshold", 600, [](Check& c, const AcceptanceOptions& o) {
                        std::vector<double> ls;
                        for (int i = 0; i <= 16; ++i) {
                            ls.push_back(i * 0.005);
                        }
                        auto cfg = config("loss-sweep", o.seed, 100, o.threads, {{"losses", ls}});
                        auto t = run_experiment(cfg).summary;
                        double e = level_crossing(t.values("loss"), t.values("estimate"), 0.5);
                        c.require(std::isfinite(e) && e >= 0.005 && e <= 0.08, "loss threshold " + num(e, 4));
                    }});

    list.push_back({12, "dump-the-pump", 10, [](Check& c, const AcceptanceOptions& o) {
                        const double quoted[] = {0.67232, 0.73786};
                        for (int K : {5, 6}) {
                            DtpParams d{0.2, K, 1.0};
                            double p = dtp_success_prob(d);
                            double exact = 1 - std::pow(0.8, K);
                            c.require(std::abs(p - exact) <= 1e-12 && std::abs(p - quoted[K - 5]) <= 5e-6 &&
                                          p >= 2.0 / 3 && p <= 0.75,
                                      "K=" + std::to_string(K) + " closed " + num(p, 7));
                            auto e = dtp_monte_carlo(d, 100000, o.seed + static_cast<std::uint64_t>(K), o.threads);
                            double sigma = std::sqrt(p * (1 - p) / 1e5);
                            c.require(within_sigma(e.estimate, p, sigma), "MC " + num(e.estimate));
                        }
                    }});

    list.push_back({13, "extinction-mapping", 1, [](Check& c, const AcceptanceOptions&) {
                        double a = extinction_to_z_error(-50), b = extinction_to_z_error(-65);
                        c.require(std::abs(a - 1e-5) <= 1e-20, "-50 dB -> " + num(a));
                        c.require(std::abs(b / 3.162e-7 - 1) <= 1e-3, "-65 dB -> " + num(b, 5));
                    }});

    list.push_back({14, "resource-report", 1, [](Check& c, const AcceptanceOptions&) {
                        auto r = cell_resource_report(UnitCellSpec::default_cell(),
                                                      FusionParams::defaults(FusionKind::BoostedTypeII));
                        c.require(r.photons_per_qubit_no_ancilla == 9, "no-ancilla " + num(r.photons_per_qubit_no_ancilla));
                        c.require(r.photons_per_qubit_with_ancilla <= 20,
                                  "with-ancilla " + num(r.photons_per_qubit_with_ancilla));
                    }});

    list.push_back({15, "s-gadget-and-equivalence", 30, [](Check& c, const AcceptanceOptions& o) {
                        for (int L : {1, 2, 3}) {
                            c.require(verify_s_gadget(L, {}, o.seed), "S gadget L=" + std::to_string(L));
                        }
                        for (int L : {2, 3, 4}) {
                            c.require(verify_fig6_equivalence(L), "equivalence L=" + std::to_string(L));
                        }
                    }});

    list.push_back({16, "windowed-pathfinding", 600, [](Check& c, const AcceptanceOptions& o) {
                        auto cfg = config("pathfinding", o.seed, 100, o.threads, nlohmann::json::object());
                        auto t = run_experiment(cfg).summary;
                        double ok = t.values("successes").at(0);
                        c.require(ok >= 95, num(ok) + "/100 trials sustain 500 layers (min " +
                                                num(t.values("min_layers").at(0)) + ", mean " +
                                                num(t.values("mean_layers").at(0), 4) + ")");
                    }});

    list.push_back({17, "determinism", 300, [](Check& c, const AcceptanceOptions& o) {
                        const nlohmann::json small = {
                            {"mux-yield", {{"bins", 20000}}},
                            {"mux-law", {{"blocks", 20000}}},
                            {"wafer-span", {{"nz", 20}, {"loss", 0.01}, {"filter_fidelity", 0.97}}},
                            {"filter-scan", {{"nz", 20}, {"fidelities", {0.94, 0.97, 1.0}}}},
                            {"loss-sweep", {{"nz", 20}, {"losses", {0.0, 0.02, 0.04}}}},
                            {"threshold-scan", {{"side", 32}, {"tolerance", 0.02}}},
                            {"crazy-graph", {{"shots", 2000}}},
                            {"pathfinding", {{"nz", 60}, {"target_layers", 50}}},
                            {"dtp", {{"shots", 20000}}},
                        };
                        auto root = std::filesystem::temp_directory_path() /
                                    ("ballistic_determinism_" + std::to_string(o.seed));
                        int same = 0, total = 0;
                        std::string diff;
                        for (const auto& name : scenario_names()) {
                            std::string bytes[2];
                            for (int k = 0; k < 2; ++k) {
                                auto cfg = config(name, o.seed, 16, k == 0 ? 1 : 8, small.at(name));
                                auto dir = root / (name + (k == 0 ? "_t1" : "_t8"));
                                write_run(cfg, run_experiment(cfg), dir.string());
                                for (const char* f : {"config.json", "results.jsonl", "summary.csv"}) {
                                    bytes[k] += slurp(dir / f);
                                }
                            }
                            ++total;
                            if (bytes[0] == bytes[1] && !bytes[0].empty()) {
                                ++same;
                            } else {
                                diff += " " + name;
                            }
                        }
                        std::filesystem::remove_all(root);
                        c.require(same == total, std::to_string(same) + "/" + std::to_string(total) +
                                                     " scenarios byte-identical at 1 vs 8 threads" + diff);
                    }});

    return list;
}

}  // namespace

std::string format_criterion(const CriterionResult& r) {
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %02d %s (%.1f s / %.0f s): ", r.pass ? "PASS" : "FAIL", r.id,
                  r.name.c_str(), r.seconds, r.limit_seconds);
    return head + r.detail;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
    std::vector<CriterionResult> out;
    for (const auto& cr : criteria()) {
        if (!options.only.empty() && !options.only.count(cr.id)) {
            continue;
        }
        CriterionResult r;
        r.id = cr.id;
        r.name = cr.name;
        r.limit_seconds = cr.limit;
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            cr.body(check, options);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_time = r.seconds <= r.limit_seconds;
        if (!in_time) {
            check.require(false, "time limit exceeded");
        }
        r.pass = check.pass;
        r.detail = check.detail.str();
        if (on_result) {
            on_result(r);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ballistic
