#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "neurosort/kmeans.hpp"

namespace neurosort {

struct AdaptationConfig {
    double percentile = 95.0;      // threshold rank within the training-distance distribution
    int window = 100;              // sliding window of recent spikes
    double trigger_fraction = 0.2; // exceedance fraction that forces retraining

    void validate() const {
        if (!(percentile > 0.0) || percentile > 100.0)
            throw ConfigError("AdaptationConfig: percentile must be in (0, 100]");
        if (window < 1) throw ConfigError("AdaptationConfig: window must be >= 1");
        if (!(trigger_fraction > 0.0) || trigger_fraction > 1.0)
            throw ConfigError("AdaptationConfig: trigger_fraction must be in (0, 1]");
    }
};

struct AdaptationState {
    std::uint64_t threshold = 0;
    std::vector<std::uint8_t> recent;  // ring buffer of exceedance flags
    std::size_t next = 0;              // ring write position
    std::size_t filled = 0;            // valid entries, <= window
    std::size_t exceed_count = 0;
    int triggered_count = 0;

    bool window_full(const AdaptationConfig& cfg) const { return filled == static_cast<std::size_t>(cfg.window); }

    void reset_window() {
        std::fill(recent.begin(), recent.end(), 0);
        next = 0;
        filled = 0;
        exceed_count = 0;
    }
};

// Nearest-rank percentile: the smallest value whose rank is at least
// ceil(p/100 * N) in the ascending sort.
inline std::uint64_t nearest_rank_percentile(std::vector<std::uint64_t> values, double percentile) {
    if (values.empty()) throw DataError("nearest_rank_percentile: empty sample");
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

// Builds the monitoring threshold from the distances of the training spikes
// to their assigned cluster means.
inline AdaptationState build_threshold(const KMeansModel& model, const std::vector<std::vector<std::uint32_t>>& train,
                                       const AdaptationConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw DataError("build_threshold: empty training set");
    std::vector<std::uint64_t> dist;
    dist.reserve(train.size());
    for (const auto& x : train)
        dist.push_back(sad_distance(x, model.means[static_cast<std::size_t>(kmeans_assign(model, x))]));
    AdaptationState state;
    state.threshold = nearest_rank_percentile(std::move(dist), cfg.percentile);
    state.recent.assign(static_cast<std::size_t>(cfg.window), 0);
    return state;
}

struct ObserveResult {
    int class_id = 0;
    std::uint64_t distance = 0;
    bool exceeded = false;
    bool retrain_needed = false;
};

// Classifies one spike, records whether its distance to the winning mean
// exceeds the threshold, and reports whether the recent window has drifted
// far enough to warrant retraining. The model itself is never touched;
// retraining policy belongs to the caller.
inline ObserveResult observe(AdaptationState& state, const KMeansModel& model,
                             const std::vector<std::uint32_t>& spike, const AdaptationConfig& cfg) {
    cfg.validate();
    ObserveResult r;
    r.class_id = kmeans_assign(model, spike);
    r.distance = sad_distance(spike, model.means[static_cast<std::size_t>(r.class_id)]);
    r.exceeded = r.distance > state.threshold;

    if (state.window_full(cfg)) state.exceed_count -= state.recent[state.next];
    state.recent[state.next] = r.exceeded ? 1 : 0;
    state.exceed_count += state.recent[state.next];
    state.next = (state.next + 1) % static_cast<std::size_t>(cfg.window);
    state.filled = std::min(state.filled + 1, static_cast<std::size_t>(cfg.window));

    const double fraction = static_cast<double>(state.exceed_count) / static_cast<double>(cfg.window);
    r.retrain_needed = state.window_full(cfg) && fraction >= cfg.trigger_fraction;
    if (r.retrain_needed) ++state.triggered_count;
    return r;
}

}  // namespace neurosort
