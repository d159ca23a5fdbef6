#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "neurosort/types.hpp"

namespace neurosort {

struct DetectorConfig {
    std::size_t neo_window = 8;     // moving-average width over the energy signal
    double threshold_scale = 8.0;   // threshold = scale * mean(smoothed energy)
    std::size_t refractory = 48;    // min samples between successive onsets
    std::size_t window_len = 64;    // samples per extracted spike window
    std::size_t align_offset = 12;  // peak position within the window

    void validate() const {
        if (neo_window == 0 || threshold_scale <= 0.0 || refractory == 0 || window_len == 0)
            throw ConfigError("DetectorConfig: all fields must be > 0");
        if (align_offset >= window_len)
            throw ConfigError("DetectorConfig: align_offset must be < window_len");
    }
};

// Nonlinear energy operator psi(k) = x(k)^2 - x(k-1)*x(k+1).
// Boundary samples are set to 0.
inline std::vector<double> neo(std::span<const double> x) {
    if (x.size() < 3)
        throw DataError("neo: input too short (" + std::to_string(x.size()) + " samples, need >= 3)");
    std::vector<double> e(x.size(), 0.0);
    for (std::size_t k = 1; k + 1 < x.size(); ++k) e[k] = x[k] * x[k] - x[k - 1] * x[k + 1];
    return e;
}

inline std::vector<double> neo(const NeuralTrace& trace) { return neo(std::span<const double>(trace.samples)); }

// Centered moving average of the given width (clipped at the ends).
inline std::vector<double> smooth_energy(std::span<const double> e, std::size_t width) {
    if (width == 0) throw ConfigError("smooth_energy: width must be > 0");
    std::vector<double> prefix(e.size() + 1, 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) prefix[i + 1] = prefix[i] + e[i];
    const std::size_t half_lo = (width - 1) / 2;
    const std::size_t half_hi = width / 2;
    std::vector<double> s(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        const std::size_t lo = k > half_lo ? k - half_lo : 0;
        const std::size_t hi = std::min(e.size(), k + half_hi + 1);
        s[k] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return s;
}

// Detects spike onsets. Returned indices are window starts: the max-|amplitude|
// sample of each window sits at onset + align_offset. The energy threshold is
// relative (threshold_scale * mean smoothed NEO), so detection is invariant to
// positive rescaling of the trace.
inline std::vector<std::size_t> detect(const NeuralTrace& trace, const DetectorConfig& cfg) {
    cfg.validate();
    const auto& x = trace.samples;
    if (x.size() < cfg.window_len)
        throw DataError("detect: trace shorter than window_len");

    const std::vector<double> s = smooth_energy(neo(trace), cfg.neo_window);
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(s.size());
    const double threshold = cfg.threshold_scale * mean;

    std::vector<std::size_t> onsets;
    if (!(threshold > 0.0)) return onsets;  // e.g. an all-zero trace

    std::size_t k = 0;
    while (k < s.size()) {
        if (s[k] > threshold) {
            // Peak-align within one window of the crossing.
            std::size_t peak = k;
            const std::size_t end = std::min(x.size(), k + cfg.window_len);
            for (std::size_t j = k; j < end; ++j)
                if (std::abs(x[j]) > std::abs(x[peak])) peak = j;
            std::size_t onset = peak >= cfg.align_offset ? peak - cfg.align_offset : 0;
            onset = std::min(onset, x.size() - cfg.window_len);
            if (onsets.empty() || onset >= onsets.back() + cfg.refractory) onsets.push_back(onset);
            k = std::max(k + 1, onset + cfg.refractory);
        } else {
            ++k;
        }
    }
    return onsets;
}

}  // namespace neurosort
