#include "ballistic/multiplex.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <omp.h>

#include "ballistic/errors.h"

namespace ballistic {

namespace {

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

void check_probability(double p, const char* what) {
    if (!(p >= 0 && p <= 1)) {
        throw SpecError(std::string(what) + " must lie in [0,1]");
    }
}

}  // namespace

std::size_t PhotonStream::photon_count() const {
    return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), std::uint8_t{1}));
}

std::vector<std::int64_t> PhotonStream::photon_bins() const {
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < occupancy.size(); ++i) {
        if (occupancy[i]) {
            out.push_back(static_cast<std::int64_t>(i));
        }
    }
    return out;
}

PhotonStream PhotonStream::generate(std::size_t bins, double p, CounterRng& rng, std::uint64_t id) {
    check_probability(p, "photon probability");
    PhotonStream s;
    s.id = id;
    s.p = p;
    s.occupancy.resize(bins);
    for (auto& o : s.occupancy) {
        o = rng.bernoulli(p) ? 1 : 0;
    }
    return s;
}

std::string stream_to_rle(const PhotonStream& s) {
    std::ostringstream out;
    out << "photonstream v1 " << s.id << ' ' << s.bin_count() << ' ' << std::setprecision(17) << s.p << '\n';
    std::uint8_t current = 0;
    std::size_t run = 0;
    bool first = true;
    auto flush = [&] {
        out << (first ? "" : " ") << run;
        first = false;
    };
    for (auto o : s.occupancy) {
        if (o != current) {
            flush();
            current = o;
            run = 0;
        }
        ++run;
    }
    flush();
    out << '\n';
    return out.str();
}

PhotonStream stream_from_rle(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string magic, version;
    PhotonStream s;
    std::size_t bins = 0;
    if (!(in >> magic >> version >> s.id >> bins >> s.p) || magic != "photonstream" || version != "v1") {
        throw SpecError("photonstream: expected header 'photonstream v1 <id> <bins> <p>'");
    }
    check_probability(s.p, "photonstream p");
    std::uint8_t current = 0;
    std::size_t run = 0;
    while (in >> run) {
        if (s.occupancy.size() + run > bins) {
            throw SpecError("photonstream: runs exceed the declared bin count");
        }
        s.occupancy.insert(s.occupancy.end(), run, current);
        current ^= 1;
    }
    if (!in.eof()) {
        throw SpecError("photonstream: malformed run length");
    }
    if (s.occupancy.size() != bins) {
        throw SpecError("photonstream: runs cover " + std::to_string(s.occupancy.size()) + " bins, header says " +
                        std::to_string(bins));
    }
    return s;
}

void SwitchModel::validate() const {
    if (!(loss_db_per_pass >= 0)) {
        throw SpecError("switch loss must be >= 0 dB");
    }
    if (extinction_db > 0) {
        throw SpecError("switch extinction must be <= 0 dB");
    }
    if (!(phase_jitter_variance >= 0)) {
        throw SpecError("phase jitter variance must be >= 0");
    }
}

double SwitchModel::transmission(int passes) const { return std::pow(10.0, -loss_db_per_pass * passes / 10.0); }

double SwitchModel::z_error_per_pass() const {
    return extinction_to_z_error(extinction_db) + phase_jitter_variance;
}

RouteResult route_with_delays(const PhotonStream& stream, const std::vector<DelayAssignment>& assignments,
                              const DelayNetwork& network, CounterRng* loss_rng) {
    if (network.stages < 0 || network.stages > 40) {
        throw SpecError("delay network stages must lie in [0, 40]");
    }
    network.switches.validate();
    const auto bins = static_cast<std::int64_t>(stream.bin_count());
    std::vector<std::uint8_t> claimed(stream.bin_count(), 0);
    for (const auto& a : assignments) {
        if (a.delay < 0 || a.delay > network.max_delay()) {
            throw SpecError("delay " + std::to_string(a.delay) + " outside [0, " + std::to_string(network.max_delay()) +
                            "]");
        }
        if (a.bin < 0 || a.bin >= bins || !stream.occupancy[static_cast<std::size_t>(a.bin)]) {
            throw SpecError("delay assigned to empty bin " + std::to_string(a.bin));
        }
        if (claimed[static_cast<std::size_t>(a.bin)]++) {
            throw SpecError("bin " + std::to_string(a.bin) + " assigned twice");
        }
    }

    RouteResult r;
    r.discarded = stream.photon_count() - assignments.size();
    r.output.id = stream.id;
    r.output.p = stream.p;
    r.output.occupancy.assign(static_cast<std::size_t>(bins + network.max_delay()), 0);
    r.exit_bin.assign(assignments.size(), -1);

    std::vector<std::size_t> live(assignments.size());
    std::iota(live.begin(), live.end(), std::size_t{0});
    std::vector<std::int64_t> at(assignments.size());
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        at[i] = assignments[i].bin;
    }
    for (int k = 0; k < network.stages; ++k) {
        const std::int64_t len = std::int64_t{1} << k;
        for (std::size_t i : live) {
            if (assignments[i].delay & len) {
                at[i] += len;
            }
        }
        // Arrivals at switch k + 1; ties by input bin keep KeepFirst stable.
        std::sort(live.begin(), live.end(), [&](std::size_t x, std::size_t y) {
            return at[x] != at[y] ? at[x] < at[y] : assignments[x].bin < assignments[y].bin;
        });
        std::vector<std::size_t> next;
        next.reserve(live.size());
        for (std::size_t g = 0; g < live.size();) {
            std::size_t h = g;
            while (h < live.size() && at[live[h]] == at[live[g]]) {
                ++h;
            }
            if (h - g == 1) {
                next.push_back(live[g]);
            } else {
                ++r.collisions;
                if (network.policy == CollisionPolicy::KeepFirst) {
                    next.push_back(live[g]);
                    r.collided += h - g - 1;
                } else {
                    r.collided += h - g;
                }
            }
            g = h;
        }
        live.swap(next);
    }
    std::sort(live.begin(), live.end());
    const double survive = network.switches.transmission(network.switch_count());
    for (std::size_t i : live) {
        if (loss_rng != nullptr && survive < 1 && !loss_rng->bernoulli(survive)) {
            ++r.lost;
            continue;
        }
        std::int64_t out = assignments[i].bin + assignments[i].delay;
        r.exit_bin[i] = out;
        r.output.occupancy[static_cast<std::size_t>(out)] = 1;
    }
    return r;
}

double standard_mux_prob(double p, int S) {
    check_probability(p, "p");
    if (S < 0) {
        throw SpecError("S must be >= 0");
    }
    return 1.0 - std::pow(1.0 - p, std::ldexp(1.0, S));
}

double standard_mux_pair_yield(double p, int S) {
    double q = standard_mux_prob(p, S);
    return q * q / std::ldexp(1.0, S);
}

std::vector<MatchedPair> sliding_window_match(const PhotonStream& a, const PhotonStream& b, std::int64_t max_delay) {
    auto ta = a.photon_bins();
    auto tb = b.photon_bins();
    std::vector<MatchedPair> out;
    std::size_t i = 0, j = 0;
    while (i < ta.size() || j < tb.size()) {
        bool a_first = j == tb.size() || (i < ta.size() && ta[i] <= tb[j]);
        if (a_first) {
            if (j < tb.size() && tb[j] - ta[i] <= max_delay) {
                out.push_back({ta[i], tb[j]});
                ++j;
            }
            ++i;
        } else {
            if (i < ta.size() && ta[i] - tb[j] <= max_delay) {
                out.push_back({ta[i], tb[j]});
                ++i;
            }
            ++j;
        }
    }
    return out;
}

std::vector<MatchedPair> max_interval_matching(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                                               std::int64_t max_delay, DelayPlacement placement) {
    std::vector<MatchedPair> out;
    std::deque<std::int64_t> pending[2];
    std::size_t i = 0, j = 0;
    // At equal bins the stream that may be delayed arrives first.
    const bool b_first_on_tie = placement == DelayPlacement::StreamB;
    while (i < a.size() || j < b.size()) {
        bool take_a;
        if (j == b.size()) {
            take_a = true;
        } else if (i == a.size()) {
            take_a = false;
        } else {
            take_a = a[i] < b[j] || (a[i] == b[j] && !b_first_on_tie);
        }
        const int s = take_a ? 0 : 1;
        const std::int64_t t = take_a ? a[i++] : b[j++];
        auto& other = pending[1 - s];
        while (!other.empty() && other.front() < t - max_delay) {
            other.pop_front();
        }
        if (!other.empty()) {
            out.push_back(take_a ? MatchedPair{t, other.front()} : MatchedPair{other.front(), t});
            other.pop_front();
            continue;
        }
        bool may_wait = placement == DelayPlacement::Both || (take_a && placement == DelayPlacement::StreamA) ||
                        (!take_a && placement == DelayPlacement::StreamB);
        if (may_wait) {
            pending[s].push_back(t);
        }
    }
    return out;
}

void pair_delays(const std::vector<MatchedPair>& pairs, std::vector<DelayAssignment>& delays_a,
                 std::vector<DelayAssignment>& delays_b) {
    delays_a.clear();
    delays_b.clear();
    for (const auto& p : pairs) {
        delays_a.push_back({p.a, std::max<std::int64_t>(0, p.b - p.a)});
        delays_b.push_back({p.b, std::max<std::int64_t>(0, p.a - p.b)});
    }
}

MuxOutcome route_pairs(const PhotonStream& a, const PhotonStream& b, std::vector<MatchedPair> pairs,
                       const DelayNetwork& network) {
    std::vector<DelayAssignment> da, db;
    pair_delays(pairs, da, db);
    auto ra = route_with_delays(a, da, network);
    auto rb = route_with_delays(b, db, network);
    MuxOutcome out;
    out.collisions = ra.collisions + rb.collisions;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (ra.exit_bin[k] >= 0 && rb.exit_bin[k] >= 0) {
            out.pairs.push_back(pairs[k]);
        }
    }
    return out;
}

namespace {

// Switch arrivals (stage, bin) a photon occupies on its way through the cascade.
void route_keys(std::int64_t bin, std::int64_t delay, int stages, std::vector<std::uint64_t>& keys) {
    keys.clear();
    for (int k = 0; k < stages; ++k) {
        std::int64_t mask = (std::int64_t{2} << k) - 1;
        keys.push_back(static_cast<std::uint64_t>(bin + (delay & mask)) * 64 + static_cast<std::uint64_t>(k));
    }
}

// Earliest-deadline sweep that only commits pairs whose routes avoid every
// switch arrival already committed on the same network.
std::vector<MatchedPair> ledger_matching(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                                         const DelayNetwork& network, DelayPlacement placement) {
    const std::int64_t D = network.max_delay();
    std::unordered_set<std::uint64_t> ledger[2];
    std::deque<std::int64_t> pending[2];
    std::vector<MatchedPair> out;
    std::vector<std::uint64_t> keys_a, keys_b;
    std::size_t i = 0, j = 0;
    const bool b_first_on_tie = placement == DelayPlacement::StreamB;
    auto free_of = [](const std::unordered_set<std::uint64_t>& l, const std::vector<std::uint64_t>& keys) {
        return std::none_of(keys.begin(), keys.end(), [&](std::uint64_t k) { return l.count(k) > 0; });
    };
    while (i < a.size() || j < b.size()) {
        bool take_a;
        if (j == b.size()) {
            take_a = true;
        } else if (i == a.size()) {
            take_a = false;
        } else {
            take_a = a[i] < b[j] || (a[i] == b[j] && !b_first_on_tie);
        }
        const int s = take_a ? 0 : 1;
        const std::int64_t t = take_a ? a[i++] : b[j++];
        auto& other = pending[1 - s];
        while (!other.empty() && other.front() < t - D) {
            other.pop_front();
        }
        bool matched = false;
        for (auto it = other.begin(); it != other.end(); ++it) {
            MatchedPair p = take_a ? MatchedPair{t, *it} : MatchedPair{*it, t};
            route_keys(p.a, std::max<std::int64_t>(0, p.b - p.a), network.stages, keys_a);
            route_keys(p.b, std::max<std::int64_t>(0, p.a - p.b), network.stages, keys_b);
            if (free_of(ledger[0], keys_a) && free_of(ledger[1], keys_b)) {
                ledger[0].insert(keys_a.begin(), keys_a.end());
                ledger[1].insert(keys_b.begin(), keys_b.end());
                out.push_back(p);
                other.erase(it);
                matched = true;
                break;
            }
        }
        if (matched) {
            continue;
        }
        bool may_wait = placement == DelayPlacement::Both || (take_a && placement == DelayPlacement::StreamA) ||
                        (!take_a && placement == DelayPlacement::StreamB);
        if (may_wait) {
            pending[s].push_back(t);
        }
    }
    std::sort(out.begin(), out.end(), [](const MatchedPair& x, const MatchedPair& y) { return x.a < y.a; });
    return out;
}

}  // namespace

MuxOutcome matching_rmux(const PhotonStream& a, const PhotonStream& b, const DelayNetwork& network,
                         DelayPlacement placement) {
    auto ta = a.photon_bins();
    auto tb = b.photon_bins();
    MuxOutcome out;
    out.rematch_rounds = 1;
    auto pairs = max_interval_matching(ta, tb, network.max_delay(), placement);
    std::vector<DelayAssignment> da, db;
    pair_delays(pairs, da, db);
    auto ra = route_with_delays(a, da, network);
    auto rb = route_with_delays(b, db, network);
    out.collisions = ra.collisions + rb.collisions;
    if (ra.collided == 0 && rb.collided == 0) {
        out.pairs = std::move(pairs);
        return out;
    }
    ++out.rematch_rounds;
    out.pairs = ledger_matching(ta, tb, network, placement);
    pair_delays(out.pairs, da, db);
    if (route_with_delays(a, da, network).collided + route_with_delays(b, db, network).collided != 0) {
        throw NumericError("matching_rmux: collision-aware re-matching left a collision");
    }
    return out;
}

MuxOutcome sliding_window_rmux(const PhotonStream& a, const PhotonStream& b, const DelayNetwork& network) {
    auto out = route_pairs(a, b, sliding_window_match(a, b, network.max_delay()), network);
    out.rematch_rounds = 1;
    return out;
}

std::size_t standard_mux_pairs(const PhotonStream& a, const PhotonStream& b, int S) {
    if (S < 0 || S > 40) {
        throw SpecError("S must lie in [0, 40]");
    }
    const std::size_t block = std::size_t{1} << S;
    const std::size_t n = std::min(a.bin_count(), b.bin_count()) / block;
    std::size_t pairs = 0;
    for (std::size_t k = 0; k < n; ++k) {
        auto first = static_cast<std::ptrdiff_t>(k * block);
        auto last = static_cast<std::ptrdiff_t>((k + 1) * block);
        bool fa = std::any_of(a.occupancy.begin() + first, a.occupancy.begin() + last, [](auto o) { return o != 0; });
        bool fb = std::any_of(b.occupancy.begin() + first, b.occupancy.begin() + last, [](auto o) { return o != 0; });
        pairs += fa && fb;
    }
    return pairs;
}

std::size_t sequential_match(const std::vector<PhotonStream>& streams, std::int64_t max_delay) {
    if (streams.empty()) {
        return 0;
    }
    auto events = streams[0].photon_bins();
    for (std::size_t k = 1; k < streams.size(); ++k) {
        auto pairs = max_interval_matching(events, streams[k].photon_bins(), max_delay, DelayPlacement::Both);
        events.clear();
        for (const auto& p : pairs) {
            events.push_back(std::max(p.a, p.b));
        }
        std::sort(events.begin(), events.end());
    }
    return events.size();
}

BlockMuxEstimate block_mux_monte_carlo(double p, int S, std::size_t blocks, std::uint64_t seed, int threads) {
    check_probability(p, "p");
    if (S < 0 || S > 30) {
        throw SpecError("S must lie in [0, 30]");
    }
    const CounterRng base(seed, 0x6d7578);
    const std::uint64_t block = std::uint64_t{1} << S;
    long long filled = 0;
    const auto n = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static) reduction(+ : filled) num_threads(resolve_threads(threads))
    for (long long k = 0; k < n; ++k) {
        CounterRng rng = base.split(static_cast<std::uint64_t>(k));
        bool any = false;
        for (std::uint64_t i = 0; i < block; ++i) {
            any |= rng.bernoulli(p);
        }
        filled += any ? 1 : 0;
    }
    BlockMuxEstimate e;
    e.blocks = blocks;
    e.filled = static_cast<std::size_t>(filled);
    e.estimate = blocks == 0 ? 0.0 : static_cast<double>(filled) / static_cast<double>(blocks);
    double q = standard_mux_prob(p, S);
    e.standard_error = blocks == 0 ? 0.0 : std::sqrt(q * (1 - q) / static_cast<double>(blocks));
    return e;
}

YieldCounts yield_instance(double p, int S, std::size_t bins, std::uint64_t seed, std::uint64_t instance) {
    check_probability(p, "p");
    if (S < 0 || S > 20) {
        throw SpecError("S must lie in [0, 20]");
    }
    CounterRng ra = CounterRng(seed, static_cast<std::uint64_t>(S)).split(2 * instance);
    CounterRng rb = CounterRng(seed, static_cast<std::uint64_t>(S)).split(2 * instance + 1);
    auto a = PhotonStream::generate(bins, p, ra, 0);
    auto b = PhotonStream::generate(bins, p, rb, 1);
    DelayNetwork net;
    net.stages = S;
    YieldCounts c;
    c.standard = standard_mux_pairs(a, b, S);
    auto sw = sliding_window_rmux(a, b, net);
    auto mm = matching_rmux(a, b, net, DelayPlacement::Both);
    c.sliding = sw.pairs.size();
    c.matching = mm.pairs.size();
    c.collisions = sw.collisions + mm.collisions;
    return c;
}

std::vector<YieldPoint> yield_curve(const YieldOptions& o) {
    check_probability(o.p, "p");
    if (o.s_max < 0 || o.s_max > 20 || o.bins == 0 || o.instances == 0) {
        throw SpecError("yield curve: need 0 <= s_max <= 20 and positive bins and instances");
    }
    const auto levels = static_cast<std::size_t>(o.s_max + 1);
    const auto tasks = static_cast<long long>(levels * o.instances);
    std::vector<YieldCounts> counts(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(o.threads))
    for (long long task = 0; task < tasks; ++task) {
        const auto t = static_cast<std::size_t>(task);
        counts[t] = yield_instance(o.p, static_cast<int>(t / o.instances), o.bins, o.seed, t % o.instances);
    }
    std::vector<YieldPoint> curve(levels);
    const double total = static_cast<double>(o.bins) * static_cast<double>(o.instances);
    for (std::size_t s = 0; s < levels; ++s) {
        std::size_t st = 0, sl = 0, ma = 0, co = 0;
        for (std::size_t i = 0; i < o.instances; ++i) {
            std::size_t t = s * o.instances + i;
            st += counts[t].standard;
            sl += counts[t].sliding;
            ma += counts[t].matching;
            co += counts[t].collisions;
        }
        auto& y = curve[s];
        y.S = static_cast<int>(s);
        y.standard_closed = standard_mux_pair_yield(o.p, y.S);
        y.standard_yield = static_cast<double>(st) / total;
        y.sliding_yield = static_cast<double>(sl) / total;
        y.matching_yield = static_cast<double>(ma) / total;
        y.sigma = std::sqrt(y.matching_yield * (1 - y.matching_yield) / total);
        y.collisions = co;
    }
    return curve;
}

std::string yield_curve_csv(const std::vector<YieldPoint>& curve) {
    std::ostringstream out;
    out << "S,standard_yield,sliding_yield,matching_yield,collisions\n" << std::setprecision(10);
    for (const auto& y : curve) {
        out << y.S << ',' << y.standard_yield << ',' << y.sliding_yield << ',' << y.matching_yield << ','
            << y.collisions << '\n';
    }
    return out.str();
}

void DtpParams::validate() const {
    check_probability(q, "dtp q");
    check_probability(transmission, "dtp transmission");
    if (crystals < 1) {
        throw SpecError("dtp crystal count must be >= 1");
    }
}

double dtp_herald_prob(const DtpParams& params) {
    params.validate();
    return 1.0 - std::pow(1.0 - params.q, params.crystals);
}

double dtp_success_prob(const DtpParams& params) {
    params.validate();
    double sum = 0;
    for (int k = 1; k <= params.crystals; ++k) {
        sum += params.q * std::pow(1.0 - params.q, k - 1) * std::pow(params.transmission, params.crystals - k);
    }
    return sum;
}

DtpEstimate dtp_monte_carlo(const DtpParams& params, std::size_t trials, std::uint64_t seed, int threads) {
    params.validate();
    const CounterRng base(seed, 0x647470);
    long long delivered = 0;
    const auto n = static_cast<long long>(trials);
#pragma omp parallel for schedule(static) reduction(+ : delivered) num_threads(resolve_threads(threads))
    for (long long t = 0; t < n; ++t) {
        CounterRng rng = base.split(static_cast<std::uint64_t>(t));
        for (int k = 1; k <= params.crystals; ++k) {
            if (rng.bernoulli(params.q)) {
                bool survived = true;
                for (int r = k; r < params.crystals; ++r) {
                    survived &= rng.bernoulli(params.transmission);
                }
                delivered += survived ? 1 : 0;
                break;
            }
        }
    }
    DtpEstimate e;
    e.trials = trials;
    e.delivered = static_cast<std::size_t>(delivered);
    e.estimate = trials == 0 ? 0.0 : static_cast<double>(delivered) / static_cast<double>(trials);
    double p = dtp_success_prob(params);
    e.standard_error = trials == 0 ? 0.0 : std::sqrt(p * (1 - p) / static_cast<double>(trials));
    return e;
}

double extinction_to_z_error(double extinction_db) {
    if (extinction_db > 0) {
        throw SpecError("extinction ratio must be <= 0 dB");
    }
    return std::pow(10.0, extinction_db / 10.0);
}

}  // namespace ballistic
