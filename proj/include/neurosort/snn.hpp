#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neurosort/digital.hpp"
#include "neurosort/rng.hpp"
#include "neurosort/weights.hpp"

namespace neurosort {

struct SnnTrainConfig {
    int n_input = 300;
    int n_output = 3;
    int leak = 1;
    int thr1 = 15;   // membrane threshold gating any synapse update
    int thr2 = 45;   // second threshold; above it update probabilities shrink
    int batch_per_class = 5;
    std::vector<double> p_up = {0.08, 0.06, 0.04, 0.02, 0.00};
    std::vector<double> p_dn = {0.00, 0.00, 0.00, 0.00, 0.08};
    double reduce_factor = 0.25;
    int restarts = 10;
    int train_count = 1500;
    // The update rule only resets potentials after a weight update. Set this
    // to also reset after every input presentation.
    bool reset_every_input = false;

    void validate() const {
        if (n_input < 1 || n_output < 1) throw ConfigError("SnnTrainConfig: dimensions must be positive");
        if (leak < 0) throw ConfigError("SnnTrainConfig: leak must be nonnegative");
        if (thr1 < 0 || thr2 <= thr1) throw ConfigError("SnnTrainConfig: need thr2 > thr1 >= 0");
        if (batch_per_class < 1) throw ConfigError("SnnTrainConfig: batch_per_class must be >= 1");
        if (p_up.size() != static_cast<std::size_t>(batch_per_class) ||
            p_dn.size() != static_cast<std::size_t>(batch_per_class))
            throw ConfigError("SnnTrainConfig: p_up/p_dn must have batch_per_class entries");
        for (double p : p_up)
            if (p < 0.0 || p > 1.0) throw ConfigError("SnnTrainConfig: p_up out of [0,1]");
        for (double p : p_dn)
            if (p < 0.0 || p > 1.0) throw ConfigError("SnnTrainConfig: p_dn out of [0,1]");
        if (reduce_factor < 0.0 || reduce_factor > 1.0)
            throw ConfigError("SnnTrainConfig: reduce_factor out of [0,1]");
        if (restarts < 1) throw ConfigError("SnnTrainConfig: restarts must be >= 1");
        if (train_count < 1) throw ConfigError("SnnTrainConfig: train_count must be >= 1");
    }
};

struct NeuronState {
    std::vector<long long> v;  // membrane potentials, may go negative

    explicit NeuronState(int n_output = 0) : v(static_cast<std::size_t>(n_output), 0) {}
    void reset() { std::fill(v.begin(), v.end(), 0LL); }
};

// One discrete membrane step: v_j += sum_i(w_ij * spike_i) - leak.
// Potentials are plain signed accumulators; nothing clamps them.
inline void integrate(NeuronState& state, const WeightMatrix& w, std::span<const std::uint8_t> spike, int leak) {
    if (static_cast<int>(spike.size()) != w.n_input || static_cast<int>(state.v.size()) != w.n_output)
        throw DataError("integrate: dimension mismatch");
    for (int i = 0; i < w.n_input; ++i) {
        if (!spike[static_cast<std::size_t>(i)]) continue;
        for (int j = 0; j < w.n_output; ++j) state.v[static_cast<std::size_t>(j)] += w.at(i, j);
    }
    for (auto& vj : state.v) vj -= leak;
}

// Bookkeeping from a single presentation, used by the statistical tests.
// "up" events are draws made at rate p_up[cycle], "dn" at p_dn[cycle]; for an
// anti-Hebbian presentation the up-rate draw depresses (1 -> 0) and the
// dn-rate draw potentiates, mirroring the Hebbian directions.
struct PresentOutcome {
    int out_max = 0;
    long long v_out_max = 0;
    bool updated = false;
    bool hebbian = false;
    std::size_t eligible_up = 0;
    std::size_t flipped_up = 0;
    std::size_t eligible_dn = 0;
    std::size_t flipped_dn = 0;
};

// Presents one labeled spike train: integrate, pick the winning output
// neuron (ties to the lowest index), and if its potential exceeds thr1 apply
// probabilistic flips to that column's synapses on active input rows. The
// update direction depends on whether the winner matches the label; above
// thr2 both rates are scaled down by reduce_factor. Potentials reset to rest
// after any update pass.
inline PresentOutcome present(NeuronState& state, WeightMatrix& w, std::span<const std::uint8_t> spike, int label,
                              int cycle, const SnnTrainConfig& cfg, RngStream& rng) {
    integrate(state, w, spike, cfg.leak);

    PresentOutcome out;
    for (int j = 1; j < w.n_output; ++j)
        if (state.v[static_cast<std::size_t>(j)] > state.v[static_cast<std::size_t>(out.out_max)]) out.out_max = j;
    out.v_out_max = state.v[static_cast<std::size_t>(out.out_max)];

    if (out.v_out_max > cfg.thr1) {
        out.updated = true;
        out.hebbian = (out.out_max == label);
        const double scale = out.v_out_max > cfg.thr2 ? cfg.reduce_factor : 1.0;
        const double pu = cfg.p_up[static_cast<std::size_t>(cycle)] * scale;
        const double pd = cfg.p_dn[static_cast<std::size_t>(cycle)] * scale;
        for (int i = 0; i < w.n_input; ++i) {
            if (!spike[static_cast<std::size_t>(i)]) continue;
            std::uint8_t& wij = w.at(i, out.out_max);
            // Hebbian potentiates unset synapses at pu and depresses set ones
            // at pd; anti-Hebbian swaps which state each rate acts on.
            const bool up_rate = out.hebbian ? (wij == 0) : (wij == 1);
            if (up_rate) {
                ++out.eligible_up;
                if (rng.bernoulli(pu)) {
                    wij ^= 1u;
                    ++out.flipped_up;
                }
            } else {
                ++out.eligible_dn;
                if (rng.bernoulli(pd)) {
                    wij ^= 1u;
                    ++out.flipped_dn;
                }
            }
        }
        state.reset();
    } else if (cfg.reset_every_input) {
        state.reset();
    }
    return out;
}

inline WeightMatrix random_weights(int n_input, int n_output, RngStream& rng) {
    WeightMatrix w(n_input, n_output);
    for (int i = 0; i < n_input; ++i)
        for (int j = 0; j < n_output; ++j) w.at(i, j) = rng.bernoulli(0.5) ? 1 : 0;
    return w;
}

// Supervised training pass. Classes feed the network round-robin,
// batch_per_class consecutive inputs each, drawn cyclically from that class's
// list; the position of an input within its batch selects the p_up/p_dn
// entry. Exactly cfg.train_count presentations are consumed.
inline WeightMatrix snn_train(const std::vector<std::vector<std::vector<std::uint8_t>>>& splits,
                              const SnnTrainConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (static_cast<int>(splits.size()) != cfg.n_output)
        throw DataError("snn_train: expected " + std::to_string(cfg.n_output) + " class lists, got " +
                        std::to_string(splits.size()));
    for (std::size_t c = 0; c < splits.size(); ++c) {
        if (splits[c].empty()) throw DataError("snn_train: class " + std::to_string(c) + " has no spike trains");
        for (const auto& s : splits[c])
            if (static_cast<int>(s.size()) != cfg.n_input)
                throw DataError("snn_train: class " + std::to_string(c) + " spike length mismatch");
    }

    RngStream rng(seed);
    WeightMatrix w = random_weights(cfg.n_input, cfg.n_output, rng);
    NeuronState state(cfg.n_output);
    std::vector<std::size_t> next(splits.size(), 0);  // per-class cyclic cursor

    int consumed = 0;
    while (consumed < cfg.train_count) {
        for (std::size_t c = 0; c < splits.size() && consumed < cfg.train_count; ++c) {
            for (int cycle = 0; cycle < cfg.batch_per_class && consumed < cfg.train_count; ++cycle) {
                const auto& spike = splits[c][next[c]];
                next[c] = (next[c] + 1) % splits[c].size();
                present(state, w, spike, static_cast<int>(c), cycle, cfg, rng);
                ++consumed;
            }
        }
    }
    return w;
}

struct TrainResult {
    WeightMatrix weights;
    double accuracy = 0.0;                // eval accuracy of the returned matrix
    std::vector<double> run_accuracies;   // one entry per restart, in run order
};

// Best-of-R restarts: trains cfg.restarts times from independent seeds,
// scores each run on the held-out set with the counter classifier, and keeps
// the best (ties to the earliest run).
inline TrainResult train_best_of(const std::vector<std::vector<std::vector<std::uint8_t>>>& splits,
                                 const SnnTrainConfig& cfg, std::uint64_t seed,
                                 const std::vector<std::vector<std::uint8_t>>& eval_spikes,
                                 const std::vector<int>& eval_labels) {
    cfg.validate();
    const RngStream root(seed);
    TrainResult best;
    for (int r = 0; r < cfg.restarts; ++r) {
        WeightMatrix w = snn_train(splits, cfg, root.split(static_cast<std::uint64_t>(r)).seed());
        const double acc = digital_accuracy(w, eval_spikes, eval_labels);
        best.run_accuracies.push_back(acc);
        if (r == 0 || acc > best.accuracy) {
            best.accuracy = acc;
            best.weights = std::move(w);
        }
    }
    return best;
}

}  // namespace neurosort
