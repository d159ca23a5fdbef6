#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "neurosort/crossbar.hpp"
#include "neurosort/rng.hpp"

namespace neurosort {

enum class VariationMode { uniform, gaussian };

inline VariationMode variation_mode_from_string(const std::string& s) {
    if (s == "uniform") return VariationMode::uniform;
    if (s == "gaussian") return VariationMode::gaussian;
    throw ConfigError("unknown variation mode: " + s);
}

// Multiplies every junction conductance (dummy column included) by (1 + u).
// Uniform mode draws u from [-min(level, 0.99), +level]; gaussian mode draws
// N(0, level) clamped at -0.99. Draws run row-major over the junction matrix,
// one per junction, or a single shared u when correlated is set.
inline JunctionMatrix perturb_conductances(const CrossbarConfig& cfg, const WeightMatrix& w, double level,
                                           std::uint64_t seed, VariationMode mode = VariationMode::uniform,
                                           bool correlated = false) {
    if (level < 0.0) throw ConfigError("perturb_conductances: level must be >= 0");
    JunctionMatrix j = nominal_conductances(cfg, w);
    RngStream rng(seed);
    const double lo = -std::min(level, 0.99);
    auto draw = [&]() {
        if (mode == VariationMode::uniform) return rng.uniform(lo, level);
        return std::max(rng.gaussian(0.0, level), -0.99);
    };
    if (correlated) {
        const double u = draw();
        for (double& g : j.g) g *= 1.0 + u;
    } else {
        for (double& g : j.g) g *= 1.0 + draw();
    }
    return j;
}

struct VariationSweepConfig {
    std::vector<double> levels = {0.0, 0.1, 0.3, 0.5, 1.0, 2.0};
    int trials_per_level = 20;
    std::uint64_t seed = 1;
    VariationMode mode = VariationMode::uniform;
    bool correlated = false;

    void validate() const {
        for (double l : levels)
            if (l < 0.0) throw ConfigError("VariationSweepConfig: levels must be >= 0");
        if (levels.empty()) throw ConfigError("VariationSweepConfig: no levels given");
        if (trials_per_level < 1) throw ConfigError("VariationSweepConfig: trials_per_level must be >= 1");
    }
};

struct SweepRow {
    double level = 0.0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    int trials = 0;
};

// For each variation level, classifies the evaluation set under
// trials_per_level independent perturbations of the trained crossbar and
// reports mean and sample standard deviation of the accuracy.
inline std::vector<SweepRow> run_variation_sweep(const CrossbarConfig& cfg, const WeightMatrix& w,
                                                 const VariationSweepConfig& sweep,
                                                 const std::vector<std::vector<std::uint8_t>>& spikes,
                                                 const std::vector<int>& labels) {
    sweep.validate();
    if (spikes.size() != labels.size() || spikes.empty())
        throw DataError("run_variation_sweep: bad evaluation set");
    const RngStream root(sweep.seed);
    std::vector<SweepRow> rows;
    rows.reserve(sweep.levels.size());
    for (std::size_t li = 0; li < sweep.levels.size(); ++li) {
        const double level = sweep.levels[li];
        const RngStream level_stream = root.split(li);
        std::vector<double> accs;
        accs.reserve(static_cast<std::size_t>(sweep.trials_per_level));
        for (int t = 0; t < sweep.trials_per_level; ++t) {
            const JunctionMatrix j = perturb_conductances(
                cfg, w, level, level_stream.split(static_cast<std::uint64_t>(t)).seed(), sweep.mode,
                sweep.correlated);
            const CrossbarSolver solver(cfg, j);
            accs.push_back(crossbar_accuracy(solver, spikes, labels));
        }
        SweepRow row;
        row.level = level;
        row.trials = sweep.trials_per_level;
        for (double a : accs) row.mean_accuracy += a;
        row.mean_accuracy /= static_cast<double>(accs.size());
        if (accs.size() > 1) {
            double ss = 0.0;
            for (double a : accs) ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
            row.std_accuracy = std::sqrt(ss / static_cast<double>(accs.size() - 1));
        }
        rows.push_back(row);
    }
    return rows;
}

struct PowerParams {
    double i_synapse = 3e-7;  // mirrored synaptic current (A)
    double n_column = 3.0;    // average number of driven columns
    double v_dd = 1.2;        // supply (V)
    double beta = 0.01;       // duty factor t_on / t_data

    void validate() const {
        if (i_synapse < 0.0 || n_column < 0.0 || v_dd < 0.0 || beta < 0.0)
            throw ConfigError("PowerParams: parameters must be nonnegative");
        if (beta > 1.0) throw ConfigError("PowerParams: beta must be <= 1");
    }
};

// Average power of the discharge path: each driven column sinks i_synapse
// from v_dd for a beta fraction of every bit period.
inline double average_power(const PowerParams& p) {
    p.validate();
    return p.i_synapse * p.n_column * p.v_dd * p.beta;
}

}  // namespace neurosort
