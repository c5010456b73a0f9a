#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "ballistic/errors.h"
#include "ballistic/multiplex.h"

using namespace ballistic;

namespace {

PhotonStream stream_of(std::size_t bins, std::initializer_list<std::int64_t> photons) {
    PhotonStream s;
    s.occupancy.assign(bins, 0);
    for (auto t : photons) {
        s.occupancy[static_cast<std::size_t>(t)] = 1;
    }
    return s;
}

// Clock-by-clock simulation with explicit shift registers per delay line.
// Returns (collision events, collided photons, exit bin per assignment).
struct BruteRoute {
    std::size_t collisions = 0;
    std::size_t collided = 0;
    std::vector<std::int64_t> exit_bin;
};

BruteRoute brute_force_route(const std::vector<DelayAssignment>& as, int stages) {
    BruteRoute r;
    r.exit_bin.assign(as.size(), -1);
    // lines[k][slot] holds a photon index or -1; slot 0 exits next tick.
    std::vector<std::vector<long>> lines(static_cast<std::size_t>(stages));
    for (int k = 0; k < stages; ++k) {
        lines[static_cast<std::size_t>(k)].assign(std::size_t{1} << k, -1);
    }
    std::int64_t horizon = 0;
    for (const auto& a : as) {
        horizon = std::max(horizon, a.bin + (std::int64_t{1} << stages) + 2);
    }
    for (std::int64_t t = 0; t <= horizon; ++t) {
        // Photons standing at switch 0 this tick.
        std::vector<long> at_switch;
        for (std::size_t i = 0; i < as.size(); ++i) {
            if (as[i].bin == t) {
                at_switch.push_back(static_cast<long>(i));
            }
        }
        for (int k = 0; k < stages; ++k) {
            auto& line = lines[static_cast<std::size_t>(k)];
            std::vector<long> arrivals;
            // Leaving the delay line this tick.
            if (line[0] >= 0) {
                arrivals.push_back(line[0]);
            }
            std::rotate(line.begin(), line.begin() + 1, line.end());
            line.back() = -1;
            for (long i : at_switch) {
                if (as[static_cast<std::size_t>(i)].delay & (std::int64_t{1} << k)) {
                    // Enters a line of length 2^k and emerges 2^k ticks later.
                    line.back() = i;
                } else {
                    arrivals.push_back(i);
                }
            }
            if (arrivals.size() > 1) {
                ++r.collisions;
                r.collided += arrivals.size();
                arrivals.clear();
            }
            at_switch = arrivals;
        }
        for (long i : at_switch) {
            r.exit_bin[static_cast<std::size_t>(i)] = t;
        }
    }
    return r;
}

// Exact maximum bipartite matching by augmenting paths.
std::size_t kuhn_matching(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                          const std::function<bool(std::int64_t, std::int64_t)>& edge) {
    std::vector<long> match_b(b.size(), -1);
    std::size_t size = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::vector<std::uint8_t> seen(b.size(), 0);
        std::function<bool(std::size_t)> augment = [&](std::size_t u) {
            for (std::size_t v = 0; v < b.size(); ++v) {
                if (!edge(a[u], b[v]) || seen[v]) {
                    continue;
                }
                seen[v] = 1;
                if (match_b[v] < 0 || augment(static_cast<std::size_t>(match_b[v]))) {
                    match_b[v] = static_cast<long>(u);
                    return true;
                }
            }
            return false;
        };
        size += augment(i);
    }
    return size;
}

}  // namespace

TEST(standard_mux, closed_form) {
    EXPECT_DOUBLE_EQ(standard_mux_prob(0.0, 5), 0.0);
    EXPECT_DOUBLE_EQ(standard_mux_prob(1.0, 5), 1.0);
    EXPECT_NEAR(standard_mux_prob(0.2, 2), 0.5904, 1e-15);
    EXPECT_NEAR(standard_mux_prob(0.2, 3), 1 - std::pow(0.8, 8), 1e-15);
    EXPECT_THROW(standard_mux_prob(1.5, 1), SpecError);
    EXPECT_THROW(standard_mux_prob(0.5, -1), SpecError);
}

TEST(standard_mux, pair_yield_shape) {
    EXPECT_NEAR(standard_mux_pair_yield(0.2, 0), 0.04, 1e-15);
    EXPECT_NEAR(standard_mux_pair_yield(0.2, 1), 0.0648, 1e-15);
    EXPECT_NEAR(standard_mux_pair_yield(0.2, 2), 0.5904 * 0.5904 / 4, 1e-15);
    EXPECT_NEAR(standard_mux_pair_yield(0.2, 2), 0.087143, 1e-6);
    EXPECT_NEAR(standard_mux_pair_yield(0.2, 3), 0.0866, 1e-4);
    EXPECT_NEAR(standard_mux_pair_yield(0.2, 4), 0.05904, 1e-5);
    EXPECT_DOUBLE_EQ(standard_mux_pair_yield(1.0, 0), 1.0);
    int best = 0;
    for (int S = 1; S <= 6; ++S) {
        if (standard_mux_pair_yield(0.2, S) > standard_mux_pair_yield(0.2, best)) {
            best = S;
        }
    }
    EXPECT_EQ(best, 2);
}

TEST(standard_mux, pair_yield_unimodal) {
    for (double p : {0.01, 0.05, 0.2, 0.5, 0.9, 0.99}) {
        bool falling = false;
        for (int S = 1; S <= 10; ++S) {
            double d = standard_mux_pair_yield(p, S) - standard_mux_pair_yield(p, S - 1);
            if (d < 0) {
                falling = true;
            } else {
                EXPECT_FALSE(falling && d > 0) << "p=" << p << " S=" << S;
            }
        }
    }
}

TEST(standard_mux, block_monte_carlo_matches_closed_form) {
    auto e = block_mux_monte_carlo(0.2, 3, 200000, 4);
    EXPECT_NEAR(e.estimate, standard_mux_prob(0.2, 3), 3 * e.standard_error);
    auto serial = block_mux_monte_carlo(0.2, 3, 20000, 4, 1);
    auto parallel = block_mux_monte_carlo(0.2, 3, 20000, 4, 4);
    EXPECT_EQ(serial.filled, parallel.filled);
}

TEST(photon_stream, rle_round_trip) {
    CounterRng rng(3);
    auto s = PhotonStream::generate(500, 0.3, rng, 7);
    auto text = stream_to_rle(s);
    EXPECT_EQ(text.rfind("photonstream v1 7 500 ", 0), 0u);
    auto back = stream_from_rle(text);
    EXPECT_EQ(back.occupancy, s.occupancy);
    EXPECT_EQ(back.id, 7u);
    EXPECT_DOUBLE_EQ(back.p, 0.3);
    auto golden = stream_of(8, {0, 1, 5});
    EXPECT_EQ(stream_to_rle(golden), "photonstream v1 0 8 0\n0 2 3 1 2\n");
    EXPECT_EQ(stream_from_rle("photonstream v1 0 8 0\n0 2 3 1 2\n").occupancy, golden.occupancy);
    EXPECT_THROW(stream_from_rle("photonstream v1 0 9 0\n0 2 3 1 2\n"), SpecError);
    EXPECT_THROW(stream_from_rle("photonstream v2 0 8 0\n"), SpecError);
    EXPECT_THROW(stream_from_rle("photonstream v1 0 8 0\n0 x\n"), SpecError);
}

TEST(route_with_delays, single_photon_exits_after_delay) {
    DelayNetwork net;
    net.stages = 3;
    for (std::int64_t d = 0; d <= net.max_delay(); ++d) {
        auto s = stream_of(10, {4});
        auto r = route_with_delays(s, {{4, d}}, net);
        EXPECT_EQ(r.collisions, 0u);
        EXPECT_EQ(r.exit_bin[0], 4 + d);
        EXPECT_TRUE(r.output.occupancy[static_cast<std::size_t>(4 + d)]);
        EXPECT_EQ(r.output.photon_count(), 1u);
    }
}

TEST(route_with_delays, shared_output_bin_drops_both) {
    DelayNetwork net;
    net.stages = 2;
    auto s = stream_of(6, {0, 3});
    auto r = route_with_delays(s, {{0, 3}, {3, 0}}, net);
    EXPECT_EQ(r.collisions, 1u);
    EXPECT_EQ(r.collided, 2u);
    EXPECT_EQ(r.output.photon_count(), 0u);
    net.policy = CollisionPolicy::KeepFirst;
    auto k = route_with_delays(s, {{0, 3}, {3, 0}}, net);
    EXPECT_EQ(k.collisions, 1u);
    EXPECT_EQ(k.collided, 1u);
    EXPECT_EQ(k.exit_bin[0], 3);
    EXPECT_EQ(k.exit_bin[1], -1);
}

TEST(route_with_delays, rejects_bad_assignments) {
    DelayNetwork net;
    net.stages = 2;
    auto s = stream_of(6, {0, 3});
    EXPECT_THROW(route_with_delays(s, {{0, 4}}, net), SpecError);
    EXPECT_THROW(route_with_delays(s, {{0, -1}}, net), SpecError);
    EXPECT_THROW(route_with_delays(s, {{1, 0}}, net), SpecError);
    EXPECT_THROW(route_with_delays(s, {{0, 1}, {0, 2}}, net), SpecError);
}

TEST(route_with_delays, naive_block_assignment_matches_brute_force) {
    std::size_t total_collisions = 0;
    for (std::uint64_t t = 0; t < 40; ++t) {
        CounterRng rng(9, t);
        auto s = PhotonStream::generate(64, 0.5, rng);
        for (int S : {1, 2, 3, 4}) {
            DelayNetwork net;
            net.stages = S;
            const std::int64_t block = std::int64_t{1} << S;
            std::vector<DelayAssignment> as;
            for (auto b : s.photon_bins()) {
                as.push_back({b, block - 1 - b % block});
            }
            auto r = route_with_delays(s, as, net);
            auto brute = brute_force_route(as, S);
            EXPECT_EQ(r.collisions, brute.collisions);
            EXPECT_EQ(r.collided, brute.collided);
            EXPECT_EQ(r.exit_bin, brute.exit_bin);
            EXPECT_EQ(r.output.photon_count() + r.collided + r.discarded + r.lost, s.photon_count());
            total_collisions += r.collisions;
        }
    }
    EXPECT_GT(total_collisions, 0u);
}

TEST(route_with_delays, random_assignments_match_brute_force) {
    for (std::uint64_t t = 0; t < 200; ++t) {
        CounterRng rng(10, t);
        auto s = PhotonStream::generate(48, 0.4, rng);
        DelayNetwork net;
        net.stages = 1 + static_cast<int>(rng.below(4));
        std::vector<DelayAssignment> as;
        for (auto b : s.photon_bins()) {
            if (rng.bernoulli(0.8)) {
                as.push_back({b, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(net.max_delay()) + 1))});
            }
        }
        auto r = route_with_delays(s, as, net);
        auto brute = brute_force_route(as, net.stages);
        ASSERT_EQ(r.collisions, brute.collisions) << t;
        ASSERT_EQ(r.exit_bin, brute.exit_bin) << t;
        EXPECT_EQ(r.output.photon_count() + r.collided + r.discarded + r.lost, s.photon_count());
    }
}

TEST(route_with_delays, switch_loss_conserves_photons) {
    DelayNetwork net;
    net.stages = 3;
    net.switches.loss_db_per_pass = 1.0;
    CounterRng gen(5), loss(6);
    auto s = PhotonStream::generate(4000, 0.2, gen);
    std::vector<DelayAssignment> as;
    for (auto b : s.photon_bins()) {
        as.push_back({b, 0});
    }
    auto r = route_with_delays(s, as, net, &loss);
    EXPECT_GT(r.lost, 0u);
    EXPECT_EQ(r.output.photon_count() + r.collided + r.discarded + r.lost, s.photon_count());
    double survive = net.switches.transmission(4);
    double n = static_cast<double>(as.size());
    EXPECT_NEAR(static_cast<double>(r.lost) / n, 1 - survive, 3 * std::sqrt(survive * (1 - survive) / n));
}

TEST(sliding_window, window_rule_examples) {
    auto a = stream_of(8, {0});
    auto b = stream_of(8, {2});
    auto pairs = sliding_window_match(a, b, 3);
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].a, 0);
    EXPECT_EQ(pairs[0].b, 2);
    EXPECT_TRUE(sliding_window_match(a, stream_of(8, {5}), 3).empty());
    // The earliest photon is taken first: A@1 pairs with B@3, so B@0 is discarded.
    auto c = sliding_window_match(stream_of(8, {1}), stream_of(8, {0, 3}), 3);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].b, 0);
}

TEST(matching, placements_follow_the_delay_side) {
    std::vector<std::int64_t> a{5}, b{3};
    EXPECT_TRUE(max_interval_matching(a, b, 3, DelayPlacement::StreamA).empty());
    EXPECT_EQ(max_interval_matching(a, b, 3, DelayPlacement::StreamB).size(), 1u);
    EXPECT_EQ(max_interval_matching(a, b, 3, DelayPlacement::Both).size(), 1u);
    EXPECT_EQ(max_interval_matching({1, 4}, {2, 6}, 3, DelayPlacement::StreamA).size(), 2u);
    EXPECT_EQ(max_interval_matching({4}, {4}, 0, DelayPlacement::StreamA).size(), 1u);
    EXPECT_EQ(max_interval_matching({4}, {4}, 0, DelayPlacement::StreamB).size(), 1u);
}

TEST(matching, greedy_is_maximum_against_exhaustive_oracle) {
    for (std::uint64_t t = 0; t < 1000; ++t) {
        CounterRng rng(12, t);
        const std::size_t bins = 6 + rng.below(30);
        auto sa = PhotonStream::generate(bins, 0.35, rng);
        auto sb = PhotonStream::generate(bins, 0.35, rng);
        auto a = sa.photon_bins();
        auto b = sb.photon_bins();
        if (a.size() + b.size() > 20) {
            continue;
        }
        const std::int64_t D = static_cast<std::int64_t>(rng.below(8));
        auto within = [D](std::int64_t x) { return x >= 0 && x <= D; };
        EXPECT_EQ(max_interval_matching(a, b, D, DelayPlacement::StreamA).size(),
                  kuhn_matching(a, b, [&](auto x, auto y) { return within(y - x); }))
            << t;
        EXPECT_EQ(max_interval_matching(a, b, D, DelayPlacement::StreamB).size(),
                  kuhn_matching(a, b, [&](auto x, auto y) { return within(x - y); }))
            << t;
        auto both = max_interval_matching(a, b, D, DelayPlacement::Both);
        EXPECT_EQ(both.size(), kuhn_matching(a, b, [&](auto x, auto y) { return within(std::abs(x - y)); })) << t;
        EXPECT_GE(both.size(), sliding_window_match(sa, sb, D).size()) << t;
        for (const auto& p : both) {
            EXPECT_LE(std::abs(p.a - p.b), D);
        }
    }
}

TEST(matching, rmux_output_is_collision_free_and_dominates_sliding) {
    for (std::uint64_t t = 0; t < 200; ++t) {
        CounterRng rng(13, t);
        auto a = PhotonStream::generate(300, 0.3, rng);
        auto b = PhotonStream::generate(300, 0.3, rng);
        DelayNetwork net;
        net.stages = static_cast<int>(rng.below(6));
        auto mm = matching_rmux(a, b, net);
        std::vector<DelayAssignment> da, db;
        pair_delays(mm.pairs, da, db);
        EXPECT_EQ(route_with_delays(a, da, net).collisions, 0u);
        EXPECT_EQ(route_with_delays(b, db, net).collisions, 0u);
        auto raw = max_interval_matching(a.photon_bins(), b.photon_bins(), net.max_delay(), DelayPlacement::Both);
        EXPECT_GE(raw.size(), sliding_window_match(a, b, net.max_delay()).size());
        EXPECT_LE(mm.pairs.size(), raw.size());
    }
}

TEST(matching, disjoint_singletons_in_range) {
    DelayNetwork net;
    net.stages = 2;
    auto mm = matching_rmux(stream_of(20, {0, 10}), stream_of(20, {2, 13}), net);
    EXPECT_EQ(mm.pairs.size(), 2u);
    EXPECT_EQ(mm.collisions, 0u);
}

TEST(yield_curve, relative_time_beats_standard) {
    YieldOptions o;
    o.p = 0.2;
    o.s_max = 6;
    o.bins = 100000;
    auto curve = yield_curve(o);
    ASSERT_EQ(curve.size(), 7u);
    for (const auto& y : curve) {
        double sigma = std::sqrt(2) * y.sigma;
        EXPECT_GE(y.sliding_yield + 3 * sigma, y.standard_yield) << "S=" << y.S;
        EXPECT_GE(y.matching_yield + 3 * sigma, y.sliding_yield) << "S=" << y.S;
        EXPECT_NEAR(y.standard_yield, y.standard_closed, 4 * y.sigma + 1e-3) << "S=" << y.S;
    }
    EXPECT_GT(curve[3].sliding_yield, standard_mux_pair_yield(0.2, 3));
    auto csv = yield_curve_csv(curve);
    EXPECT_EQ(csv.rfind("S,standard_yield,sliding_yield,matching_yield,collisions\n", 0), 0u);
}

TEST(yield_curve, independent_of_thread_count) {
    YieldOptions o;
    o.bins = 5000;
    o.instances = 3;
    o.s_max = 4;
    o.threads = 1;
    auto one = yield_curve_csv(yield_curve(o));
    o.threads = 4;
    EXPECT_EQ(one, yield_curve_csv(yield_curve(o)));
}

TEST(sequential_match, bell_and_ghz_streams) {
    CounterRng rng(14);
    std::vector<PhotonStream> streams;
    for (int k = 0; k < 6; ++k) {
        streams.push_back(PhotonStream::generate(20000, 0.3, rng, static_cast<std::uint64_t>(k)));
    }
    std::vector<PhotonStream> two(streams.begin(), streams.begin() + 2);
    std::vector<PhotonStream> four(streams.begin(), streams.begin() + 4);
    auto n2 = sequential_match(two, 7);
    auto n4 = sequential_match(four, 7);
    auto n6 = sequential_match(streams, 7);
    EXPECT_EQ(n2, max_interval_matching(streams[0].photon_bins(), streams[1].photon_bins(), 7,
                                        DelayPlacement::Both)
                      .size());
    EXPECT_GE(n2, n4);
    EXPECT_GE(n4, n6);
    EXPECT_GT(n6, 0u);
    EXPECT_EQ(sequential_match({}, 3), 0u);
}

TEST(dtp, closed_form) {
    EXPECT_NEAR(dtp_success_prob({0.2, 5, 1.0}), 0.67232, 1e-15);
    EXPECT_NEAR(dtp_success_prob({0.2, 6, 1.0}), 0.737856, 1e-15);
    EXPECT_NEAR(dtp_success_prob({0.3, 1, 0.5}), 0.3, 1e-15);
    EXPECT_NEAR(dtp_herald_prob({0.2, 5, 0.9}), 0.67232, 1e-15);
    EXPECT_LT(dtp_success_prob({0.2, 5, 0.9}), dtp_herald_prob({0.2, 5, 0.9}));
    EXPECT_THROW(dtp_success_prob({0.2, 0, 1.0}), SpecError);
    EXPECT_THROW(dtp_success_prob({1.2, 3, 1.0}), SpecError);
}

TEST(dtp, monotone_in_crystals_and_q) {
    for (double t : {1.0, 0.95}) {
        for (int K = 1; K < 10; ++K) {
            EXPECT_GE(dtp_herald_prob({0.2, K + 1, t}), dtp_herald_prob({0.2, K, t}));
            if (t == 1.0) {
                EXPECT_GE(dtp_success_prob({0.2, K + 1, t}), dtp_success_prob({0.2, K, t}));
            }
        }
        if (t == 1.0) {
            for (double q = 0.05; q < 0.85; q += 0.1) {
                EXPECT_GE(dtp_success_prob({q + 0.1, 5, t}), dtp_success_prob({q, 5, t}));
            }
        }
    }
    // With loss, early heralds pay for every remaining crystal.
    EXPECT_LT(dtp_success_prob({0.95, 5, 0.95}), dtp_success_prob({0.55, 5, 0.95}));
}

TEST(dtp, monte_carlo_agrees) {
    for (DtpParams p : {DtpParams{0.2, 5, 1.0}, DtpParams{0.2, 6, 1.0}, DtpParams{0.3, 4, 0.9}}) {
        auto e = dtp_monte_carlo(p, 200000, 15);
        EXPECT_NEAR(e.estimate, dtp_success_prob(p), 3 * e.standard_error);
    }
}

TEST(extinction, z_error_mapping) {
    EXPECT_DOUBLE_EQ(extinction_to_z_error(-50), 1e-5);
    EXPECT_NEAR(extinction_to_z_error(-65) / 3.162e-7, 1.0, 1e-3);
    EXPECT_DOUBLE_EQ(extinction_to_z_error(0), 1.0);
    EXPECT_THROW(extinction_to_z_error(1), SpecError);
    SwitchModel m;
    m.phase_jitter_variance = 1e-6;
    EXPECT_NEAR(m.z_error_per_pass(), 1.1e-5, 1e-18);
    m.loss_db_per_pass = -1;
    EXPECT_THROW(m.validate(), SpecError);
}
