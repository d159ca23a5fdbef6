#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "neurosort/types.hpp"

namespace neurosort {

// Encoder parameters plus the global amplitude calibration. Quantization uses
// the whole-trace min/max (not per-window bounds): per-window normalization
// would erase the amplitude differences that separate spike classes.
struct EncoderConfig {
    std::size_t m = 16;        // downsampled feature count (mode 1)
    std::size_t bits = 5;      // bits per digitized sample (mode 1)
    std::size_t n_input = 300; // spike-train length N_I (mode 2)

    double cal_min = 0.0;      // global amplitude range for quantization
    double cal_max = 0.0;
    double cal_abs_max = 0.0;  // global max |amplitude| for duty-cycle encoding

    void validate() const {
        if (m < 1 || bits < 1 || n_input < 1)
            throw ConfigError("EncoderConfig: m, bits and n_input must be >= 1");
        if (bits > 31) throw ConfigError("EncoderConfig: bits must be <= 31");
    }
};

inline EncoderConfig calibrate(EncoderConfig cfg, const NeuralTrace& trace) {
    cfg.validate();
    if (trace.samples.empty()) throw DataError("calibrate: empty trace");
    double lo = trace.samples[0], hi = trace.samples[0];
    for (double v : trace.samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    cfg.cal_min = lo;
    cfg.cal_max = hi;
    cfg.cal_abs_max = std::max(std::abs(lo), std::abs(hi));
    return cfg;
}

namespace detail {

// Bin j covers samples [j*L/m, (j+1)*L/m); non-empty whenever L >= m.
// For L < m the (degenerate) bin falls back to its single nearest sample.
inline std::pair<std::size_t, std::size_t> bin_range(std::size_t L, std::size_t m, std::size_t j) {
    std::size_t lo = j * L / m;
    std::size_t hi = (j + 1) * L / m;
    if (hi <= lo) {
        lo = std::min(lo, L - 1);
        hi = lo + 1;
    }
    return {lo, hi};
}

}  // namespace detail

// Mode 1: average the window into m equal bins, then map each bin mean
// affinely from [cal_min, cal_max] onto [0, 2^bits - 1], rounded to nearest.
// A flat calibration range maps everything to the midpoint 2^(bits-1).
inline std::vector<std::uint32_t> encode_digitized(std::span<const double> window, const EncoderConfig& cfg) {
    cfg.validate();
    if (window.size() < cfg.m)
        throw DataError("encode_digitized: window shorter than m");
    const std::uint32_t q_max = (1u << cfg.bits) - 1u;
    std::vector<std::uint32_t> out(cfg.m);
    if (!(cfg.cal_max > cfg.cal_min)) {
        std::fill(out.begin(), out.end(), 1u << (cfg.bits - 1));
        return out;
    }
    const double scale = static_cast<double>(q_max) / (cfg.cal_max - cfg.cal_min);
    for (std::size_t j = 0; j < cfg.m; ++j) {
        const auto [lo, hi] = detail::bin_range(window.size(), cfg.m, j);
        double mean = 0.0;
        for (std::size_t i = lo; i < hi; ++i) mean += window[i];
        mean /= static_cast<double>(hi - lo);
        const double q = std::round((mean - cfg.cal_min) * scale);
        out[j] = static_cast<std::uint32_t>(std::clamp(q, 0.0, static_cast<double>(q_max)));
    }
    return out;
}

// Mode 2: deterministic duty-cycle spike train. The window's rectified
// amplitude is averaged into m bins; bin j drives a group of g_j consecutive
// slots (g_j = n_input/m, remainder spread over the leading groups), of which
// the first round(a_j * g_j) are 1, where a_j is the bin mean normalized by
// the global |amplitude| maximum. High-amplitude intervals therefore produce
// more 1s, and the total count is monotone in pointwise |amplitude|.
inline std::vector<std::uint8_t> encode_spike_train(std::span<const double> window, const EncoderConfig& cfg) {
    cfg.validate();
    if (window.empty()) throw DataError("encode_spike_train: empty window");
    std::vector<std::uint8_t> train(cfg.n_input, 0);
    const std::size_t base = cfg.n_input / cfg.m;
    const std::size_t rem = cfg.n_input % cfg.m;
    std::size_t slot = 0;
    for (std::size_t j = 0; j < cfg.m && slot < cfg.n_input; ++j) {
        const std::size_t g = std::min(base + (j < rem ? 1u : 0u), cfg.n_input - slot);
        const auto [lo, hi] = detail::bin_range(window.size(), cfg.m, j);
        double mean_abs = 0.0;
        for (std::size_t i = lo; i < hi; ++i) mean_abs += std::abs(window[i]);
        mean_abs /= static_cast<double>(hi - lo);
        double a = cfg.cal_abs_max > 0.0 ? mean_abs / cfg.cal_abs_max : 0.0;
        a = std::clamp(a, 0.0, 1.0);
        const auto ones = static_cast<std::size_t>(std::lround(a * static_cast<double>(g)));
        for (std::size_t i = 0; i < ones; ++i) train[slot + i] = 1;
        slot += g;
    }
    return train;
}

inline NSpike encode_nspike(std::span<const double> window, const EncoderConfig& cfg) {
    NSpike s;
    s.digitized = encode_digitized(window, cfg);
    s.spike_train = encode_spike_train(window, cfg);
    return s;
}

}  // namespace neurosort
