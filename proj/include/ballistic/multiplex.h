#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ballistic/rng.h"

namespace ballistic {

struct PhotonStream {
    std::uint64_t id = 0;
    double p = 0;
    std::vector<std::uint8_t> occupancy;  // one entry per time bin

    std::size_t bin_count() const { return occupancy.size(); }
    std::size_t photon_count() const;
    // Occupied bins in increasing order.
    std::vector<std::int64_t> photon_bins() const;

    static PhotonStream generate(std::size_t bins, double p, CounterRng& rng, std::uint64_t id = 0);
};

// Run-length text: "photonstream v1 <id> <bins> <p>" then one line of
// alternating empty/occupied run lengths, starting with an empty run.
std::string stream_to_rle(const PhotonStream& s);
PhotonStream stream_from_rle(std::string_view text);

struct SwitchModel {
    double loss_db_per_pass = 0;
    double extinction_db = -50;
    double phase_jitter_variance = 0;  // rad^2

    void validate() const;
    // Survival probability through `passes` switches.
    double transmission(int passes) const;
    // Z-error per pass: extinction leakage plus small-angle phase jitter.
    double z_error_per_pass() const;
};

enum class CollisionPolicy { DropBoth, KeepFirst };

// Binary cascade: stage k is a delay line of 2^k bins with a bypass, so a
// photon can be delayed by any amount in [0, 2^S - 1] using S + 1 switches.
struct DelayNetwork {
    int stages = 0;  // S
    SwitchModel switches;
    CollisionPolicy policy = CollisionPolicy::DropBoth;

    std::int64_t max_delay() const { return (std::int64_t{1} << stages) - 1; }
    int switch_count() const { return stages + 1; }
};

struct DelayAssignment {
    std::int64_t bin = 0;
    std::int64_t delay = 0;
};

struct RouteResult {
    PhotonStream output;             // bins [0, input bins + max delay)
    std::size_t collisions = 0;      // (switch, bin) events with two or more photons
    std::size_t collided = 0;        // photons dropped by collisions
    std::size_t discarded = 0;       // photons without an assignment
    std::size_t lost = 0;            // photons lost in switches
    std::vector<std::int64_t> exit_bin;  // per assignment, -1 when dropped
};

// Transit of the assigned photons through `network`, stage by stage. Switch
// loss is sampled only when `loss_rng` is given.
RouteResult route_with_delays(const PhotonStream& stream, const std::vector<DelayAssignment>& assignments,
                              const DelayNetwork& network, CounterRng* loss_rng = nullptr);

double standard_mux_prob(double p, int S);
double standard_mux_pair_yield(double p, int S);

struct MatchedPair {
    std::int64_t a = 0;  // bin in stream A
    std::int64_t b = 0;  // bin in stream B
};

// Earliest-photon-first pairing within max_delay, delaying the earlier photon.
std::vector<MatchedPair> sliding_window_match(const PhotonStream& a, const PhotonStream& b, std::int64_t max_delay);

enum class DelayPlacement { StreamA, StreamB, Both };

// Maximum matching of photons with 0 <= t_b - t_a <= D (StreamA delayed),
// 0 <= t_a - t_b <= D (StreamB delayed) or |t_a - t_b| <= D (Both), by the
// earliest-deadline sweep. Inputs are sorted photon bins.
std::vector<MatchedPair> max_interval_matching(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b,
                                               std::int64_t max_delay, DelayPlacement placement);

struct MuxOutcome {
    std::vector<MatchedPair> pairs;  // pairs that survived the delay networks
    // Collisions the first-round pairing would have suffered.
    std::size_t collisions = 0;
    std::size_t rematch_rounds = 0;
};

// Delays of each pair on its two networks: the earlier photon waits.
void pair_delays(const std::vector<MatchedPair>& pairs, std::vector<DelayAssignment>& delays_a,
                 std::vector<DelayAssignment>& delays_b);

// Routes the pairs through one network per stream and drops pairs with a
// collided photon (no re-matching).
MuxOutcome route_pairs(const PhotonStream& a, const PhotonStream& b, std::vector<MatchedPair> pairs,
                       const DelayNetwork& network);

// Maximum matching followed by a collision check; if any route collides, the
// streams are re-matched by a sweep that commits only collision-free routes.
MuxOutcome matching_rmux(const PhotonStream& a, const PhotonStream& b, const DelayNetwork& network,
                         DelayPlacement placement = DelayPlacement::Both);

// Sliding-window pairing followed by routing.
MuxOutcome sliding_window_rmux(const PhotonStream& a, const PhotonStream& b, const DelayNetwork& network);

// Block multiplexing of both streams: pairs are blocks where both deliver.
std::size_t standard_mux_pairs(const PhotonStream& a, const PhotonStream& b, int S);

// n-stream sequential matching: stream k is matched against the partial
// tuples built from streams 0..k-1 (delays on both sides). Returns tuples.
std::size_t sequential_match(const std::vector<PhotonStream>& streams, std::int64_t max_delay);

struct BlockMuxEstimate {
    std::size_t blocks = 0;
    std::size_t filled = 0;
    double estimate = 0;
    double standard_error = 0;
};

// Fraction of 2^S-bin blocks holding at least one photon.
BlockMuxEstimate block_mux_monte_carlo(double p, int S, std::size_t blocks, std::uint64_t seed, int threads = 0);

struct YieldPoint {
    int S = 0;
    double standard_closed = 0;
    double standard_yield = 0;
    double sliding_yield = 0;
    double matching_yield = 0;
    double sigma = 0;  // binomial standard error of a yield near the matching value
    std::size_t collisions = 0;
};

struct YieldOptions {
    double p = 0.2;
    int s_max = 6;
    std::size_t bins = 100000;  // per instance
    std::size_t instances = 1;
    std::uint64_t seed = 1;
    int threads = 0;
};

struct YieldCounts {
    std::size_t standard = 0;
    std::size_t sliding = 0;
    std::size_t matching = 0;
    std::size_t collisions = 0;
};

// Pair counts of one stream-pair instance at S stages; yield_curve pools these.
YieldCounts yield_instance(double p, int S, std::size_t bins, std::uint64_t seed, std::uint64_t instance);

// Pair yields per original time bin for S = 0..s_max.
std::vector<YieldPoint> yield_curve(const YieldOptions& options);
// CSV columns: S,standard_yield,sliding_yield,matching_yield,collisions.
std::string yield_curve_csv(const std::vector<YieldPoint>& curve);

struct DtpParams {
    double q = 0.2;
    int crystals = 5;
    double transmission = 1.0;  // per remaining crystal

    void validate() const;
};

double dtp_herald_prob(const DtpParams& params);
double dtp_success_prob(const DtpParams& params);

struct DtpEstimate {
    std::size_t trials = 0;
    std::size_t delivered = 0;
    double estimate = 0;
    double standard_error = 0;
};

DtpEstimate dtp_monte_carlo(const DtpParams& params, std::size_t trials, std::uint64_t seed, int threads = 0);

// 10^(dB/10); positive dB is rejected.
double extinction_to_z_error(double extinction_db);

}  // namespace ballistic
