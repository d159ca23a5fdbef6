#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neurosort/weights.hpp"

namespace neurosort {

struct DigitalResult {
    int class_id = 0;
    std::vector<std::uint32_t> scores;  // one counter value per output neuron
};

// Counter-based classifier: score_j counts input lines where both the spike
// bit and the trained weight bit are 1; winner is the largest counter, ties
// to the lowest index. A hardware implementation walks the bits through a
// shift register over N_I cycles; the sum is order-independent so only the
// final counter values are computed here.
inline DigitalResult classify_digital(const WeightMatrix& w, std::span<const std::uint8_t> spike) {
    if (static_cast<int>(spike.size()) != w.n_input)
        throw DataError("classify_digital: spike length " + std::to_string(spike.size()) + " != n_input " +
                        std::to_string(w.n_input));
    DigitalResult r;
    r.scores.assign(static_cast<std::size_t>(w.n_output), 0);
    for (int i = 0; i < w.n_input; ++i) {
        if (!spike[static_cast<std::size_t>(i)]) continue;
        for (int j = 0; j < w.n_output; ++j) r.scores[static_cast<std::size_t>(j)] += w.at(i, j);
    }
    for (int j = 1; j < w.n_output; ++j)
        if (r.scores[static_cast<std::size_t>(j)] > r.scores[static_cast<std::size_t>(r.class_id)]) r.class_id = j;
    return r;
}

// Fraction of spikes whose predicted class matches its label.
inline double digital_accuracy(const WeightMatrix& w, const std::vector<std::vector<std::uint8_t>>& spikes,
                               const std::vector<int>& labels) {
    if (spikes.size() != labels.size()) throw DataError("digital_accuracy: spike/label count mismatch");
    if (spikes.empty()) throw DataError("digital_accuracy: empty evaluation set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < spikes.size(); ++i)
        if (classify_digital(w, spikes[i]).class_id == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(spikes.size());
}

}  // namespace neurosort
