#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "neurosort/rng.hpp"
#include "neurosort/types.hpp"

namespace neurosort {

// Built-in spike templates. All four peak (in |amplitude|) at the same offset
// so one detector align_offset works for every class, and a trace label (the
// window start) equals detected onset when the waveform is clean.
inline constexpr std::size_t kTemplateLen = 64;
inline constexpr std::size_t kTemplatePeakOffset = 12;
inline constexpr int kNumTemplates = 4;

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

struct TemplateShape {
    double sign;
    double amplitude;
    double period;   // samples per oscillation
    double decay;    // exponential decay rate per sample
};

// The four classes form a decay ladder with counter-ordered peaks: slowly
// decaying templates ring through the whole window at low amplitude, fast
// ones spike hard and die early. Every pair of envelopes therefore crosses
// mid-window, which keeps the duty-cycle encodings of different classes from
// nesting inside each other. Peak amplitudes (about 1.0, 1.3, 1.6, 1.9) rise
// with decay so that peak nonlinear energy stays within ~1.5x across classes
// and a single mean-relative energy threshold detects all of them.
inline constexpr TemplateShape kTemplateShapes[kNumTemplates] = {
    {+1.0, 1.10, 21.0, 0.018},
    {+1.0, 1.65, 30.0, 0.033},
    {-1.0, 2.66, 44.0, 0.052},
    {+1.0, 4.41, 56.0, 0.075},
};

}  // namespace detail

// Damped sinusoid, zero-padded on the left so the |amplitude| peak lands at
// kTemplatePeakOffset, with a raised-cosine fade over the last 8 samples.
inline std::vector<double> template_waveform(int class_id) {
    if (class_id < 0 || class_id >= kNumTemplates)
        throw ConfigError("unsupported class id " + std::to_string(class_id) + ": only " +
                          std::to_string(kNumTemplates) + " built-in templates");
    const auto& s = detail::kTemplateShapes[class_id];

    const std::size_t probe_len = 2 * kTemplateLen;
    std::vector<double> d(probe_len);
    std::size_t peak = 0;
    for (std::size_t t = 0; t < probe_len; ++t) {
        d[t] = s.sign * s.amplitude * std::exp(-s.decay * static_cast<double>(t)) *
               std::sin(2.0 * detail::kPi * static_cast<double>(t) / s.period);
        if (std::abs(d[t]) > std::abs(d[peak])) peak = t;
    }
    // Shape parameters are chosen so the natural peak is not past the
    // alignment point; left-padding then positions it exactly there.
    const std::size_t pad = kTemplatePeakOffset - peak;

    std::vector<double> w(kTemplateLen, 0.0);
    for (std::size_t u = pad; u < kTemplateLen; ++u) w[u] = d[u - pad];
    const std::size_t fade = 8;
    for (std::size_t i = 0; i < fade; ++i) {
        const std::size_t u = kTemplateLen - fade + i;
        w[u] *= 0.5 * (1.0 + std::cos(detail::kPi * static_cast<double>(i + 1) / static_cast<double>(fade)));
    }
    return w;
}

// Emits one spike per entry of `class_ids`, in order, with randomized gaps
// and additive Gaussian noise. Label index = window start of each spike.
inline NeuralTrace synth_spike_sequence(std::span<const int> class_ids, double noise_sigma,
                                        std::uint64_t seed) {
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
    std::vector<std::vector<double>> templates;
    for (int id : class_ids) {
        if (id < 0 || id >= kNumTemplates)
            throw ConfigError("unsupported class id " + std::to_string(id) + ": only " +
                              std::to_string(kNumTemplates) + " built-in templates");
        while (templates.size() <= static_cast<std::size_t>(id))
            templates.push_back(template_waveform(static_cast<int>(templates.size())));
    }

    RngStream rng(seed);
    const std::size_t head = 256;
    const std::size_t base_gap = 128;

    NeuralTrace trace;
    std::vector<std::size_t> starts;
    starts.reserve(class_ids.size());
    std::size_t cursor = head;
    for (std::size_t i = 0; i < class_ids.size(); ++i) {
        starts.push_back(cursor);
        cursor += kTemplateLen + base_gap + rng.uniform_index(64);
    }
    trace.samples.assign(cursor + 256, 0.0);
    for (std::size_t i = 0; i < class_ids.size(); ++i) {
        const auto& w = templates[static_cast<std::size_t>(class_ids[i])];
        for (std::size_t u = 0; u < kTemplateLen; ++u) trace.samples[starts[i] + u] += w[u];
        trace.labels.push_back({starts[i], class_ids[i]});
    }
    if (noise_sigma > 0.0) {
        for (auto& x : trace.samples) x += rng.gaussian(0.0, noise_sigma);
    }
    trace.sample_rate = 24000.0;
    return trace;
}

// Balanced multi-class trace: classes 0..n_classes-1 cycle round-robin,
// spikes_per_class instances each. Deterministic given seed.
inline NeuralTrace synth_trace(int n_classes, int spikes_per_class, double noise_sigma,
                               std::uint64_t seed) {
    if (n_classes < 2) throw ConfigError("synth_trace: n_classes must be >= 2");
    if (n_classes > kNumTemplates)
        throw ConfigError("unsupported: synth_trace has only " + std::to_string(kNumTemplates) +
                          " built-in templates, requested " + std::to_string(n_classes));
    if (spikes_per_class < 0) throw ConfigError("synth_trace: spikes_per_class must be >= 0");
    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(spikes_per_class));
    for (int i = 0; i < n_classes * spikes_per_class; ++i) ids.push_back(i % n_classes);
    return synth_spike_sequence(ids, noise_sigma, seed);
}

}  // namespace neurosort
