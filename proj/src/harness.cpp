#include "ballistic/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <omp.h>
#include <openssl/evp.h>

#include "ballistic/builder.h"
#include "ballistic/errors.h"
#include "ballistic/loss_tolerance.h"
#include "ballistic/multiplex.h"
#include "ballistic/percolation.h"

namespace ballistic {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "experiment v1";

std::string fmt_number(double v) {
    std::ostringstream out;
    out << std::setprecision(10) << v;
    return out.str();
}

std::string key_value(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !(out.flush())) {
        throw IoError("cannot write " + path.string());
    }
}

const std::map<std::string, json>& defaults_table() {
    static const std::map<std::string, json> table = {
        {"mux-yield", {{"p", 0.2}, {"s_max", 6}, {"bins", 100000}}},
        {"mux-law", {{"p", 0.2}, {"s_max", 6}, {"blocks", 10000}}},
        {"wafer-span",
         {{"nx", 12}, {"ny", 6}, {"nz", 50}, {"lambda", 0.75}, {"loss", 0.0}, {"filter_fidelity", 1.0}, {"cell", ""}}},
        {"filter-scan",
         {{"nx", 12},
          {"ny", 6},
          {"nz", 50},
          {"lambda", 0.75},
          {"fidelities", {0.88, 0.9, 0.92, 0.94, 0.96, 0.98, 1.0}},
          {"cell", ""}}},
        {"loss-sweep",
         {{"nx", 12},
          {"ny", 6},
          {"nz", 50},
          {"lambda", 0.75},
          {"losses", {0.0, 0.01, 0.02, 0.03, 0.04, 0.06, 0.08}},
          {"cell", ""}}},
        {"threshold-scan",
         {{"lattice", "square"},
          {"side", 64},
          {"nx", 6},
          {"ny", 5},
          {"nz", 12},
          {"tolerance", 0.01},
          {"z", 2.576},
          {"max_iterations", 40}}},
        {"crazy-graph", {{"N", 50}, {"L", {1, 2, 3}}, {"losses", {0.1, 0.3, 0.5}}, {"z_flip", 0.0}, {"shots", 1000}}},
        {"pathfinding",
         {{"nx", 12}, {"ny", 6}, {"nz", 600}, {"lambda", 0.75}, {"window", 15}, {"wires", 1}, {"target_layers", 500}}},
        {"dtp", {{"q", 0.2}, {"crystals", {5, 6}}, {"transmission", 1.0}, {"shots", 10000}}},
    };
    return table;
}

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& i : items) {
        s += (s.empty() ? "" : ", ") + i;
    }
    return s;
}

bool same_kind(const json& def, const json& v) {
    if (def.is_number_integer()) {
        return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
    }
    if (def.is_number()) {
        return v.is_number();
    }
    if (def.is_string()) {
        return v.is_string();
    }
    if (def.is_array()) {
        if (!v.is_array() || v.empty()) {
            return false;
        }
        const json& proto = def.front();
        return std::all_of(v.begin(), v.end(), [&](const json& e) { return same_kind(proto, e); });
    }
    return false;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial, std::uint64_t task) {
    return CounterRng(seed, trial).split(task)();
}

// One scenario instance, ready to run.
struct Plan {
    std::vector<std::string> keys;
    // Metrics of trial t; called concurrently.
    std::function<std::vector<double>(std::uint64_t)> trial;
    // Replaces the per-trial loop when set (records come out in order).
    std::function<std::vector<std::vector<double>>()> run_all;
    std::function<Table(const std::vector<std::vector<double>>&)> summarize;
};

std::vector<double> doubles(const json& a) { return a.get<std::vector<double>>(); }

UnitCellSpec cell_from(const json& p) {
    const auto path = p.at("cell").get<std::string>();
    return path.empty() ? UnitCellSpec::default_cell() : load_cell_spec(path);
}

WaferSpec wafer_from(const json& p) {
    WaferSpec w;
    w.nx = p.at("nx").get<int>();
    w.ny = p.at("ny").get<int>();
    w.nz = p.at("nz").get<int>();
    w.fusion.success_prob = p.at("lambda").get<double>();
    w.validate();
    return w;
}

Table spanning_table(const std::string& x_name, const std::vector<double>& xs,
                     const std::vector<std::vector<double>>& rows) {
    Table t;
    t.columns = {x_name, "spans", "trials", "estimate", "wilson_low", "wilson_high"};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::size_t spans = 0;
        for (const auto& r : rows) {
            spans += r[i] > 0.5;
        }
        auto e = spanning_estimate(spans, rows.size());
        t.rows.push_back({xs[i], double(spans), double(rows.size()), e.estimate, e.wilson_low, e.wilson_high});
    }
    return t;
}

Plan make_plan(const ExperimentConfig& c) {
    const json& p = c.params;
    const std::uint64_t seed = c.seed;
    const std::size_t trials = c.trials;
    Plan plan;
    const std::string& s = c.scenario;

    if (s == "mux-yield") {
        const double prob = p.at("p").get<double>();
        const int s_max = p.at("s_max").get<int>();
        const auto bins = p.at("bins").get<std::size_t>();
        if (s_max < 0 || s_max > 20 || bins == 0 || !(prob >= 0 && prob <= 1)) {
            throw SpecError("mux-yield: need p in [0,1], 0 <= s_max <= 20, bins > 0");
        }
        for (int S = 0; S <= s_max; ++S) {
            for (const char* k : {"standard", "sliding", "matching", "collisions"}) {
                plan.keys.push_back(std::string(k) + "_S" + std::to_string(S));
            }
        }
        plan.trial = [=](std::uint64_t t) {
            std::vector<double> m;
            for (int S = 0; S <= s_max; ++S) {
                auto y = yield_instance(prob, S, bins, seed, t);
                m.insert(m.end(), {double(y.standard), double(y.sliding), double(y.matching), double(y.collisions)});
            }
            return m;
        };
        plan.summarize = [=](const std::vector<std::vector<double>>& rows) {
            Table t;
            t.columns = {"S", "standard_yield", "sliding_yield", "matching_yield", "collisions"};
            const double total = static_cast<double>(bins) * static_cast<double>(rows.size());
            for (int S = 0; S <= s_max; ++S) {
                double sum[4] = {0, 0, 0, 0};
                for (const auto& r : rows) {
                    for (int k = 0; k < 4; ++k) {
                        sum[k] += r[static_cast<std::size_t>(4 * S + k)];
                    }
                }
                t.rows.push_back({double(S), sum[0] / total, sum[1] / total, sum[2] / total, sum[3]});
            }
            return t;
        };
    } else if (s == "mux-law") {
        const double prob = p.at("p").get<double>();
        const int s_max = p.at("s_max").get<int>();
        const auto blocks = p.at("blocks").get<std::size_t>();
        if (s_max < 0 || s_max > 20 || blocks == 0 || !(prob >= 0 && prob <= 1)) {
            throw SpecError("mux-law: need p in [0,1], 0 <= s_max <= 20, blocks > 0");
        }
        for (int S = 0; S <= s_max; ++S) {
            plan.keys.push_back("filled_S" + std::to_string(S));
        }
        plan.trial = [=](std::uint64_t t) {
            std::vector<double> m;
            for (int S = 0; S <= s_max; ++S) {
                auto e = block_mux_monte_carlo(prob, S, blocks, derive_seed(seed, t, static_cast<std::uint64_t>(S)), 1);
                m.push_back(double(e.filled));
            }
            return m;
        };
        plan.summarize = [=](const std::vector<std::vector<double>>& rows) {
            Table t;
            t.columns = {"S", "closed_form", "filled", "blocks", "estimate", "standard_error"};
            const double n = static_cast<double>(blocks) * static_cast<double>(rows.size());
            for (int S = 0; S <= s_max; ++S) {
                double filled = 0;
                for (const auto& r : rows) {
                    filled += r[static_cast<std::size_t>(S)];
                }
                double q = standard_mux_prob(prob, S);
                t.rows.push_back({double(S), q, filled, n, filled / n, std::sqrt(q * (1 - q) / n)});
            }
            return t;
        };
    } else if (s == "wafer-span") {
        WaferSpec w = wafer_from(p);
        w.photon_loss = p.at("loss").get<double>();
        w.filter_fidelity = p.at("filter_fidelity").get<double>();
        w.filter_enabled = w.filter_fidelity < 1.0;
        w.validate();
        const UnitCellSpec cell = cell_from(p);
        plan.keys = {"span_z", "span_x", "span_y", "largest_fraction", "lost"};
        plan.trial = [=](std::uint64_t t) {
            CounterRng rng(seed, t);
            auto l = build_wafer(w, cell, rng);
            double lost = double(l.lost.size());
            punch_out(l.graph, l.lost);
            auto r = analyze(l);
            return std::vector<double>{double(r.crossing[2]), double(r.crossing[0]), double(r.crossing[1]),
                                       r.largest_component_fraction, lost};
        };
        plan.summarize = [](const std::vector<std::vector<double>>& rows) {
            std::vector<std::vector<double>> z;
            for (const auto& r : rows) {
                z.push_back({r[0]});
            }
            Table t = spanning_table("axis_z", {2.0}, z);
            t.columns.erase(t.columns.begin());
            t.rows.front().erase(t.rows.front().begin());
            return t;
        };
    } else if (s == "filter-scan" || s == "loss-sweep") {
        const bool filter = s == "filter-scan";
        const WaferSpec base = wafer_from(p);
        const UnitCellSpec cell = cell_from(p);
        const auto xs = doubles(p.at(filter ? "fidelities" : "losses"));
        for (double x : xs) {
            WaferSpec w = base;
            (filter ? w.filter_fidelity : w.photon_loss) = x;
            w.filter_enabled = filter && x < 1.0;
            w.validate();
            plan.keys.push_back((filter ? "span_f" : "span_loss") + key_value(x));
        }
        plan.trial = [=](std::uint64_t t) {
            std::vector<double> m;
            for (double x : xs) {
                WaferSpec w = base;
                (filter ? w.filter_fidelity : w.photon_loss) = x;
                w.filter_enabled = filter && x < 1.0;
                CounterRng rng(seed, t);
                auto l = build_wafer(w, cell, rng);
                punch_out(l.graph, l.lost);
                m.push_back(double(crossing_exists(l, Axis::Z)));
            }
            return m;
        };
        plan.summarize = [=](const std::vector<std::vector<double>>& rows) {
            return spanning_table(filter ? "fidelity" : "loss", xs, rows);
        };
    } else if (s == "threshold-scan") {
        const auto lattice = p.at("lattice").get<std::string>();
        LatticeFamily family;
        if (lattice == "square") {
            family = square_lattice_family(p.at("side").get<int>());
        } else if (lattice == "diamond") {
            family = diamond_lattice_family(p.at("side").get<int>());
        } else if (lattice == "wafer") {
            json wp = p;
            wp["lambda"] = 0.5;
            const WaferSpec base = wafer_from(wp);
            const UnitCellSpec cell = UnitCellSpec::default_cell();
            family = [=](double lambda, CounterRng& rng) {
                WaferSpec w = base;
                w.fusion.success_prob = lambda;
                return crossing_exists(build_wafer(w, cell, rng), Axis::Z);
            };
        } else {
            throw SpecError("threshold-scan: unknown lattice '" + lattice + "' (valid: square, diamond, wafer)");
        }
        ThresholdOptions opt;
        opt.trials_per_probe = trials;
        opt.tolerance = p.at("tolerance").get<double>();
        opt.z = p.at("z").get<double>();
        opt.max_iterations = p.at("max_iterations").get<int>();
        opt.seed = seed;
        opt.threads = c.threads;
        plan.keys = {"p",          "successes",  "trials",        "estimate", "wilson_low",
                     "wilson_high", "bracket_low", "bracket_high", "threshold"};
        plan.run_all = [=]() {
            auto est = estimate_threshold(family, opt);
            std::vector<std::vector<double>> rows;
            for (const auto& pr : est.probes) {
                const auto& e = pr.crossing;
                rows.push_back({pr.p, double(e.successes), double(e.trials), e.estimate, e.wilson_low, e.wilson_high,
                                est.low, est.high, est.estimate});
            }
            return rows;
        };
        plan.summarize = [](const std::vector<std::vector<double>>& rows) {
            Table t;
            t.columns = {"p", "successes", "trials", "estimate", "wilson_low", "wilson_high", "threshold_low",
                         "threshold_high", "threshold"};
            t.rows = rows;
            std::stable_sort(t.rows.begin(), t.rows.end(),
                             [](const auto& a, const auto& b) { return a[0] < b[0]; });
            return t;
        };
    } else if (s == "crazy-graph") {
        const int N = p.at("N").get<int>();
        const auto Ls = p.at("L").get<std::vector<int>>();
        const auto losses = doubles(p.at("losses"));
        const double z_flip = p.at("z_flip").get<double>();
        const auto shots = p.at("shots").get<std::size_t>();
        if (shots == 0) {
            throw SpecError("crazy-graph: shots must be positive");
        }
        std::vector<CrazyGraphSpec> grid;
        for (double e : losses) {
            for (int L : Ls) {
                CrazyGraphSpec g{N, L, e, z_flip};
                g.validate();
                grid.push_back(g);
                const std::string tag = "_e" + key_value(e) + "_L" + std::to_string(L);
                plan.keys.push_back("succ" + tag);
                plan.keys.push_back("flip" + tag);
            }
        }
        plan.trial = [=](std::uint64_t t) {
            std::vector<double> m;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                auto e = simulate_teleport(grid[i], shots, derive_seed(seed, t, i), 1);
                m.push_back(double(e.successes));
                m.push_back(double(e.flips));
            }
            return m;
        };
        plan.summarize = [=](const std::vector<std::vector<double>>& rows) {
            Table t;
            t.columns = {"loss", "L", "N", "shots", "successes", "estimate", "standard_error", "closed_form",
                         "flips", "flip_rate"};
            const double n = static_cast<double>(shots) * static_cast<double>(rows.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                double succ = 0, flips = 0;
                for (const auto& r : rows) {
                    succ += r[2 * i];
                    flips += r[2 * i + 1];
                }
                double q = teleport_success_prob(grid[i]);
                t.rows.push_back({grid[i].loss, double(grid[i].L), double(grid[i].N), n, succ, succ / n,
                                  std::sqrt(q * (1 - q) / n), q, flips, flips / n});
            }
            return t;
        };
    } else if (s == "pathfinding") {
        const WaferSpec w = wafer_from(p);
        const int window = p.at("window").get<int>();
        const int wires = p.at("wires").get<int>();
        const int target = p.at("target_layers").get<int>();
        if (window < 1 || wires < 1) {
            throw SpecError("pathfinding: window and wires must be >= 1");
        }
        const UnitCellSpec cell = UnitCellSpec::default_cell();
        plan.keys = {"sustained_layers", "reached_target"};
        plan.trial = [=](std::uint64_t t) {
            CounterRng rng(seed, t);
            auto l = build_wafer(w, cell, rng);
            int layers = find_paths_windowed(l, window, wires).sustained_layers;
            return std::vector<double>{double(layers), double(layers >= target)};
        };
        plan.summarize = [](const std::vector<std::vector<double>>& rows) {
            Table t;
            t.columns = {"trials", "mean_layers", "min_layers", "successes", "fraction", "wilson_low", "wilson_high"};
            double sum = 0, mn = std::numeric_limits<double>::infinity();
            std::size_t ok = 0;
            for (const auto& r : rows) {
                sum += r[0];
                mn = std::min(mn, r[0]);
                ok += r[1] > 0.5;
            }
            auto e = spanning_estimate(ok, rows.size());
            t.rows.push_back({double(rows.size()), sum / double(rows.size()), mn, double(ok), e.estimate,
                              e.wilson_low, e.wilson_high});
            return t;
        };
    } else if (s == "dtp") {
        const double q = p.at("q").get<double>();
        const auto ks = p.at("crystals").get<std::vector<int>>();
        const double tr = p.at("transmission").get<double>();
        const auto shots = p.at("shots").get<std::size_t>();
        if (shots == 0) {
            throw SpecError("dtp: shots must be positive");
        }
        for (int k : ks) {
            DtpParams{q, k, tr}.validate();
            plan.keys.push_back("delivered_K" + std::to_string(k));
        }
        plan.trial = [=](std::uint64_t t) {
            std::vector<double> m;
            for (std::size_t i = 0; i < ks.size(); ++i) {
                m.push_back(double(dtp_monte_carlo({q, ks[i], tr}, shots, derive_seed(seed, t, i), 1).delivered));
            }
            return m;
        };
        plan.summarize = [=](const std::vector<std::vector<double>>& rows) {
            Table t;
            t.columns = {"crystals", "herald_closed", "success_closed", "delivered", "shots", "estimate",
                         "standard_error"};
            const double n = static_cast<double>(shots) * static_cast<double>(rows.size());
            for (std::size_t i = 0; i < ks.size(); ++i) {
                double d = 0;
                for (const auto& r : rows) {
                    d += r[i];
                }
                DtpParams dp{q, ks[i], tr};
                double ps = dtp_success_prob(dp);
                t.rows.push_back({double(ks[i]), dtp_herald_prob(dp), ps, d, n, d / n, std::sqrt(ps * (1 - ps) / n)});
            }
            return t;
        };
    } else {
        throw SpecError("unknown scenario '" + s + "' (valid: " + join(scenario_names()) + ")");
    }
    return plan;
}

std::vector<std::vector<double>> rows_from_records(const Plan& plan, const std::vector<ResultRecord>& records) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : records) {
        std::map<std::string, double> m(r.metrics.begin(), r.metrics.end());
        std::vector<double> row;
        for (const auto& k : plan.keys) {
            auto it = m.find(k);
            if (it == m.end()) {
                throw SpecError("record for trial " + std::to_string(r.trial) + " lacks metric '" + k + "'");
            }
            row.push_back(it->second);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<std::string> scenario_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : defaults_table()) {
        names.push_back(k);
    }
    return names;
}

json scenario_defaults(const std::string& scenario) {
    auto it = defaults_table().find(scenario);
    if (it == defaults_table().end()) {
        throw SpecError("unknown scenario '" + scenario + "' (valid: " + join(scenario_names()) + ")");
    }
    return it->second;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("experiment config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw SpecError("experiment config must be a JSON object");
    }
    static const std::vector<std::string> allowed = {"format", "scenario", "seed", "trials", "threads", "output",
                                                     "params"};
    std::vector<std::string> unknown;
    for (const auto& [k, v] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            unknown.push_back(k);
        }
    }
    if (!unknown.empty()) {
        throw SpecError("experiment config: unknown keys: " + join(unknown));
    }
    if (j.value("format", std::string()) != kFormat) {
        throw SpecError(std::string("experiment config: \"format\" must be \"") + kFormat + "\"");
    }
    ExperimentConfig c;
    try {
        c.scenario = j.at("scenario").get<std::string>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("trials")) {
            if (!j.at("trials").is_number_unsigned()) throw SpecError("experiment config: trials must be >= 1");
            c.trials = j.at("trials").get<std::size_t>();
        }
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
        if (j.contains("output")) c.output = j.at("output").get<std::string>();
        if (j.contains("params")) c.params = j.at("params");
    } catch (const json::exception& e) {
        throw SpecError(std::string("experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::string text = read_file(path);
    try {
        return parse(text);
    } catch (const SpecError& e) {
        throw SpecError(path + ": " + e.what());
    }
}

void ExperimentConfig::validate() {
    json defaults = scenario_defaults(scenario);
    if (!params.is_object()) {
        throw SpecError("experiment config: params must be an object");
    }
    std::vector<std::string> unknown, mistyped;
    for (const auto& [k, v] : params.items()) {
        if (!defaults.contains(k)) {
            unknown.push_back(k);
        } else if (!same_kind(defaults.at(k), v)) {
            mistyped.push_back(k);
        }
    }
    if (!unknown.empty()) {
        throw SpecError("scenario " + scenario + ": unknown params: " + join(unknown));
    }
    if (!mistyped.empty()) {
        throw SpecError("scenario " + scenario + ": params of the wrong type: " + join(mistyped));
    }
    for (auto& [k, v] : params.items()) {
        if (defaults.at(k).is_number_integer() && v.is_number_float()) {
            v = static_cast<std::int64_t>(v.get<double>());
        }
    }
    defaults.update(params);
    params = defaults;
    if (trials == 0) {
        throw SpecError("experiment config: trials must be >= 1");
    }
    if (threads < 0) {
        throw SpecError("experiment config: threads must be >= 0");
    }
    make_plan(*this);
}

std::string ExperimentConfig::canonical() const {
    json j = {{"format", kFormat}, {"scenario", scenario}, {"seed", seed}, {"trials", trials}, {"params", params}};
    return j.dump();
}

std::string ExperimentConfig::hash() const {
    const std::string text = canonical();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericError("SHA-256 failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < 8; ++i) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return out.str();
}

json ExperimentConfig::to_json() const {
    json j = json::parse(canonical());
    j["config_hash"] = hash();
    return j;
}

std::size_t Table::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw SpecError("table has no column '" + name + "'");
    }
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::values(const std::string& name) const {
    std::size_t c = column(name);
    std::vector<double> v;
    for (const auto& r : rows) {
        v.push_back(r[c]);
    }
    return v;
}

std::string Table::csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += (i ? "," : "") + columns[i];
    }
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            out += (i ? "," : "") + fmt_number(r[i]);
        }
        out += '\n';
    }
    return out;
}

RunOutput run_experiment(ExperimentConfig config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    Plan plan = make_plan(config);
    std::vector<std::vector<double>> rows;
    if (plan.run_all) {
        rows = plan.run_all();
    } else {
        rows.resize(config.trials);
        std::exception_ptr error;
        const auto n = static_cast<long long>(config.trials);
        const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (long long t = 0; t < n; ++t) {
            try {
                rows[static_cast<std::size_t>(t)] = plan.trial(static_cast<std::uint64_t>(t));
            } catch (...) {
#pragma omp critical(harness_error)
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }
    RunOutput out;
    const std::string h = config.hash();
    for (std::size_t t = 0; t < rows.size(); ++t) {
        ResultRecord r;
        r.config_hash = h;
        r.scenario = config.scenario;
        r.seed = config.seed;
        r.trial = t;
        for (std::size_t k = 0; k < plan.keys.size(); ++k) {
            r.metrics.emplace_back(plan.keys[k], rows[t][k]);
        }
        out.records.push_back(std::move(r));
    }
    out.summary = plan.summarize(rows);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string records_jsonl(const std::vector<ResultRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["config_hash"] = r.config_hash;
        j["scenario"] = r.scenario;
        j["seed"] = r.seed;
        j["trial"] = r.trial;
        nlohmann::ordered_json m = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r.metrics) {
            m[k] = v;
        }
        j["metrics"] = m;
        out += j.dump() + '\n';
    }
    return out;
}

std::vector<ResultRecord> parse_records_jsonl(std::string_view text) {
    std::vector<ResultRecord> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            auto j = nlohmann::ordered_json::parse(line);
            ResultRecord r;
            r.config_hash = j.at("config_hash").get<std::string>();
            r.scenario = j.at("scenario").get<std::string>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.trial = j.at("trial").get<std::size_t>();
            for (const auto& [k, v] : j.at("metrics").items()) {
                r.metrics.emplace_back(k, v.get<double>());
            }
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw SpecError("results line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string summary_csv(const Table& summary, const std::string& config_hash) {
    Table t = summary;
    std::string csv = t.csv();
    std::string out;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        out += line + "," + (header ? std::string("config_hash") : config_hash) + '\n';
        header = false;
    }
    return out;
}

void write_run(const ExperimentConfig& config, const RunOutput& out, const std::string& dir) {
    std::filesystem::path d(dir);
    std::error_code ec;
    std::filesystem::create_directories(d, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir + ": " + ec.message());
    }
    const std::string h = config.hash();
    write_file(d / "config.json", config.to_json().dump(2) + '\n');
    write_file(d / "results.jsonl", records_jsonl(out.records));
    write_file(d / "summary.csv", summary_csv(out.summary, h));
    json timing = {{"config_hash", h}, {"wall_seconds", out.wall_seconds}, {"threads", config.threads}};
    write_file(d / "timing.json", timing.dump(2) + '\n');
}

Table summarize_records(const ExperimentConfig& config, const std::vector<ResultRecord>& records) {
    ExperimentConfig c = config;
    c.validate();
    Plan plan = make_plan(c);
    const std::string h = c.hash();
    for (const auto& r : records) {
        if (r.config_hash != h) {
            throw SpecError("record for trial " + std::to_string(r.trial) + " has config hash " + r.config_hash +
                            ", expected " + h);
        }
    }
    return plan.summarize(rows_from_records(plan, records));
}

std::vector<std::string> figure_ids() {
    return {"fig4-yields", "mux-law", "crazy-graph-law", "loss-sweep", "threshold-scan", "filter-scan"};
}

namespace {

Table select(const Table& t, const std::vector<std::string>& cols) {
    Table out;
    out.columns = cols;
    std::vector<std::size_t> idx;
    for (const auto& c : cols) {
        idx.push_back(t.column(c));
    }
    for (const auto& r : t.rows) {
        std::vector<double> row;
        for (auto i : idx) {
            row.push_back(r[i]);
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string short_num(double v) {
    std::ostringstream out;
    out << std::setprecision(4) << v;
    return out.str();
}

}  // namespace

FigureOutput emit_figure(const std::string& results_path, const std::string& figure_id) {
    static const std::map<std::string, std::string> needs = {
        {"fig4-yields", "mux-yield"},   {"mux-law", "mux-law"},
        {"crazy-graph-law", "crazy-graph"}, {"loss-sweep", "loss-sweep"},
        {"threshold-scan", "threshold-scan"}, {"filter-scan", "filter-scan"}};
    auto need = needs.find(figure_id);
    if (need == needs.end()) {
        throw SpecError("unknown figure '" + figure_id + "' (valid: " + join(figure_ids()) + ")");
    }
    auto records = parse_records_jsonl(read_file(results_path));
    if (records.empty()) {
        throw SpecError(results_path + ": empty input, no result records");
    }
    auto config_path = (std::filesystem::path(results_path).parent_path() / "config.json").string();
    json cj;
    try {
        cj = json::parse(read_file(config_path));
    } catch (const json::parse_error& e) {
        throw SpecError(config_path + ": " + e.what());
    }
    cj.erase("config_hash");
    ExperimentConfig config = ExperimentConfig::parse(cj.dump());
    if (config.scenario != need->second) {
        throw SpecError("figure " + figure_id + " needs a " + need->second + " run, got " + config.scenario);
    }
    Table summary = summarize_records(config, records);

    FigureOutput fig;
    std::vector<Series> series;
    std::string title, xl, yl;
    auto add = [&](const std::string& name, const std::string& x, const std::string& y) {
        series.push_back({name, fig.data.values(x), fig.data.values(y)});
    };
    if (figure_id == "fig4-yields") {
        fig.data = select(summary, {"S", "standard_yield", "sliding_yield", "matching_yield"});
        add("standard", "S", "standard_yield");
        add("sliding window", "S", "sliding_yield");
        add("matching", "S", "matching_yield");
        title = "Pair yield per time bin", xl = "S (delay stages)", yl = "yield";
    } else if (figure_id == "mux-law") {
        fig.data = select(summary, {"S", "closed_form", "estimate", "standard_error"});
        add("closed form", "S", "closed_form");
        add("Monte Carlo", "S", "estimate");
        title = "Block multiplexing", xl = "S", yl = "P(block holds a photon)";
    } else if (figure_id == "crazy-graph-law") {
        fig.data = select(summary, {"loss", "L", "estimate", "standard_error", "closed_form"});
        std::vector<double> Ls = fig.data.values("L");
        std::sort(Ls.begin(), Ls.end());
        Ls.erase(std::unique(Ls.begin(), Ls.end()), Ls.end());
        for (double L : Ls) {
            Series mc{"MC L=" + short_num(L), {}, {}}, cf{"closed L=" + short_num(L), {}, {}};
            for (const auto& r : fig.data.rows) {
                if (r[1] == L) {
                    mc.x.push_back(r[0]);
                    mc.y.push_back(r[2]);
                    cf.x.push_back(r[0]);
                    cf.y.push_back(r[4]);
                }
            }
            series.push_back(mc);
            series.push_back(cf);
        }
        title = "Crazy-graph teleportation", xl = "loss per qubit", yl = "success";
    } else if (figure_id == "loss-sweep" || figure_id == "filter-scan") {
        const std::string x = figure_id == "loss-sweep" ? "loss" : "fidelity";
        fig.data = select(summary, {x, "estimate", "wilson_low", "wilson_high"});
        add("spanning", x, "estimate");
        add("Wilson low", x, "wilson_low");
        add("Wilson high", x, "wilson_high");
        title = "Wafer spanning", xl = x, yl = "P(z crossing)";
    } else {
        fig.data = select(summary, {"p", "estimate", "wilson_low", "wilson_high", "threshold"});
        add("crossing", "p", "estimate");
        title = "Threshold bisection probes", xl = "bond probability", yl = "P(crossing)";
    }
    fig.svg = svg_line_plot(title, xl, yl, series);
    return fig;
}

void write_figure(const FigureOutput& fig, const std::string& figure_id, const std::string& dir) {
    std::filesystem::path d(dir);
    std::error_code ec;
    std::filesystem::create_directories(d, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir + ": " + ec.message());
    }
    write_file(d / (figure_id + ".csv"), fig.data.csv());
    write_file(d / (figure_id + ".svg"), fig.svg);
}

std::string svg_line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
    const double W = 640, H = 420, left = 70, right = 170, top = 40, bottom = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (double v : s.x) {
            if (std::isfinite(v)) x0 = std::min(x0, v), x1 = std::max(x1, v);
        }
        for (double v : s.y) {
            if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
    std::ostringstream o;
    o << std::fixed << std::setprecision(2);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
      << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << short_num(xv)
          << "</text>\n";
        o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << short_num(yv)
          << "</text>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xml_escape(x_label)
      << "</text>\n";
    o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(y_label) << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = colors[i % 7];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) {
                o << (k ? " " : "") << px(s.x[k]) << ',' << py(s.y[k]);
            }
        }
        o << "\"/>\n";
        double ly = top + 14 + 18 * static_cast<double>(i);
        o << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

double level_crossing(std::vector<double> x, std::vector<double> y, double level) {
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        double xa = x[idx[k]], xb = x[idx[k + 1]], ya = y[idx[k]] - level, yb = y[idx[k + 1]] - level;
        if (ya == 0) return xa;
        if ((ya < 0) != (yb < 0) || yb == 0) {
            return xa + (xb - xa) * ya / (ya - yb);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace ballistic
