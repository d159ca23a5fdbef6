#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "neurosort/rng.hpp"
#include "neurosort/types.hpp"

namespace neurosort {

enum class KMeansInit { first_k, seeded_random };

struct KMeansConfig {
    int k = 3;
    int iterations = 10;  // fixed iteration count, as in the hardware datapath
    KMeansInit init = KMeansInit::first_k;

    void validate() const {
        if (k < 2) throw ConfigError("KMeansConfig: k must be >= 2");
        if (iterations < 1) throw ConfigError("KMeansConfig: iterations must be >= 1");
    }
};

struct KMeansModel {
    std::vector<std::vector<std::uint32_t>> means;  // k vectors of m samples
    std::vector<std::size_t> counts;                // cluster sizes from the last iteration
};

// Sum of absolute sample differences (the ABS DIFF + ACC datapath). The
// hardware description calls this "hamming distance" but operates on whole
// multi-bit samples, so it is SAD, not a bitwise distance.
inline std::uint64_t sad_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    if (a.size() != b.size())
        throw DataError("sad_distance: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    return acc;
}

namespace detail {

// Nearest mean by SAD; ties resolve to the lowest cluster index, matching a
// less-than comparator chain.
inline int nearest_mean(const KMeansModel& model, std::span<const std::uint32_t> spike) {
    int best = 0;
    std::uint64_t best_d = sad_distance(spike, model.means[0]);
    for (std::size_t c = 1; c < model.means.size(); ++c) {
        const std::uint64_t d = sad_distance(spike, model.means[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

}  // namespace detail

inline int kmeans_assign(const KMeansModel& model, std::span<const std::uint32_t> spike) {
    if (model.means.empty()) throw DataError("kmeans_assign: model has no means");
    return detail::nearest_mean(model, spike);
}

// Fixed-point Lloyd iterations emulating the register-level datapath:
// assign every spike to the nearest mean by SAD, accumulate per-cluster
// TOT sums and counts, then mean <- floor(TOT / count) per sample. Runs
// exactly cfg.iterations iterations; an empty cluster keeps its previous
// mean (the divider holds its output on a zero count).
inline KMeansModel kmeans_fit(const std::vector<std::vector<std::uint32_t>>& data, const KMeansConfig& cfg,
                              std::uint64_t seed) {
    cfg.validate();
    const auto k = static_cast<std::size_t>(cfg.k);
    if (data.size() < k)
        throw DataError("kmeans_fit: insufficient data (" + std::to_string(data.size()) + " spikes for k=" +
                        std::to_string(cfg.k) + ")");
    const std::size_t m = data[0].size();
    for (const auto& d : data)
        if (d.size() != m) throw DataError("kmeans_fit: inconsistent feature counts");

    KMeansModel model;
    model.means.reserve(k);
    if (cfg.init == KMeansInit::first_k) {
        // First k distinct points; falls back to plain first-k when the data
        // holds fewer than k distinct values.
        for (const auto& d : data) {
            if (model.means.size() == k) break;
            bool dup = false;
            for (const auto& mvec : model.means) dup = dup || mvec == d;
            if (!dup) model.means.push_back(d);
        }
        std::size_t i = 0;
        while (model.means.size() < k) model.means.push_back(data[i++ % data.size()]);
    } else {
        RngStream rng(seed);
        std::vector<std::size_t> idx(data.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.uniform_index(idx.size() - i);
            std::swap(idx[i], idx[j]);
            model.means.push_back(data[idx[i]]);
        }
    }

    model.counts.assign(k, 0);
    for (int it = 0; it < cfg.iterations; ++it) {
        std::vector<std::vector<std::uint64_t>> tot(k, std::vector<std::uint64_t>(m, 0));
        std::vector<std::size_t> counts(k, 0);
        for (const auto& d : data) {
            const auto c = static_cast<std::size_t>(detail::nearest_mean(model, d));
            ++counts[c];
            for (std::size_t s = 0; s < m; ++s) tot[c][s] += d[s];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t s = 0; s < m; ++s)
                model.means[c][s] = static_cast<std::uint32_t>(tot[c][s] / counts[c]);
        }
        model.counts = counts;
    }
    return model;
}

// CSV serialization: k rows of m integers (means only).
inline void save_kmeans_csv(const KMeansModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write kmeans model: " + path.string());
    for (const auto& mean : model.means) {
        for (std::size_t i = 0; i < mean.size(); ++i) out << (i ? "," : "") << mean[i];
        out << '\n';
    }
}

inline KMeansModel load_kmeans_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open kmeans model: " + path.string());
    KMeansModel model;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::uint32_t> mean;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) mean.push_back(static_cast<std::uint32_t>(std::stoul(cell)));
        model.means.push_back(std::move(mean));
    }
    if (model.means.empty()) throw DataError("empty kmeans model: " + path.string());
    model.counts.assign(model.means.size(), 0);
    return model;
}

}  // namespace neurosort
