#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurosort/common.hpp"

namespace neurosort {

// Ground-truth annotation: `index` is the first sample of the spike window.
struct SpikeLabel {
    std::size_t index = 0;
    int class_id = 0;

    friend bool operator==(const SpikeLabel&, const SpikeLabel&) = default;
};

// A recorded (or synthesized) extracellular waveform.
struct NeuralTrace {
    std::vector<double> samples;
    double sample_rate = 24000.0;  // Hz
    std::vector<SpikeLabel> labels;

    void validate() const {
        if (sample_rate <= 0.0) throw DataError("NeuralTrace: sample_rate must be > 0");
        for (const auto& l : labels) {
            if (l.index >= samples.size())
                throw DataError("NeuralTrace: label index " + std::to_string(l.index) +
                                " out of range (trace has " + std::to_string(samples.size()) + " samples)");
        }
    }
};

// One detected spike in both encodings: the m-sample digitized vector
// (each value < 2^bits) and the N_I-bit binary spike train.
struct NSpike {
    std::vector<std::uint32_t> digitized;
    std::vector<std::uint8_t> spike_train;  // entries are 0/1
    std::optional<int> class_id;
};

inline std::size_t popcount(const std::vector<std::uint8_t>& bits) {
    std::size_t n = 0;
    for (auto b : bits) n += (b != 0);
    return n;
}

struct DatasetSplit {
    std::vector<NSpike> train;
    std::vector<NSpike> test;
};

// Splits by prefix: first ceil(fraction * n) spikes go to train, rest to test.
// Disjoint by construction.
inline DatasetSplit split_dataset(std::vector<NSpike> spikes, double train_fraction) {
    if (train_fraction < 0.0 || train_fraction > 1.0)
        throw ConfigError("split_dataset: train_fraction must be in [0, 1]");
    DatasetSplit out;
    const auto n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(spikes.size()) + 0.5);
    for (std::size_t i = 0; i < spikes.size(); ++i) {
        (i < n_train ? out.train : out.test).push_back(std::move(spikes[i]));
    }
    return out;
}

}  // namespace neurosort
