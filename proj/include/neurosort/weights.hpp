#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "neurosort/common.hpp"

namespace neurosort {

// Binary synapse matrix, n_input rows by n_output columns. Stored row-major
// as 0/1 bytes; w(i, j) is the synapse from input line i to output neuron j.
struct WeightMatrix {
    int n_input = 0;
    int n_output = 0;
    std::vector<std::uint8_t> w;  // n_input * n_output entries

    WeightMatrix() = default;
    WeightMatrix(int rows, int cols)
        : n_input(rows), n_output(cols), w(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0) {
        if (rows < 1 || cols < 1) throw ConfigError("WeightMatrix: dimensions must be positive");
    }

    std::uint8_t& at(int i, int j) {
        return w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_output) + static_cast<std::size_t>(j)];
    }
    std::uint8_t at(int i, int j) const {
        return w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_output) + static_cast<std::size_t>(j)];
    }

    std::size_t ones() const {
        std::size_t n = 0;
        for (auto v : w) n += v;
        return n;
    }

    bool operator==(const WeightMatrix&) const = default;
};

// Text format: first line "n_input n_output", then n_input lines of n_output
// contiguous '0'/'1' characters.
inline void save_weights(const WeightMatrix& wm, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write weights: " + path.string());
    out << wm.n_input << ' ' << wm.n_output << '\n';
    for (int i = 0; i < wm.n_input; ++i) {
        for (int j = 0; j < wm.n_output; ++j) out << (wm.at(i, j) ? '1' : '0');
        out << '\n';
    }
}

inline WeightMatrix load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open weights: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw DataError("empty weight file: " + path.string());
    std::istringstream hs(header);
    int rows = 0, cols = 0;
    if (!(hs >> rows >> cols) || rows < 1 || cols < 1)
        throw DataError("bad weight header in " + path.string() + ": \"" + header + "\"");
    WeightMatrix wm(rows, cols);
    std::string line;
    for (int i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            throw DataError("truncated weight file " + path.string() + ": expected " + std::to_string(rows) +
                            " rows, got " + std::to_string(i));
        if (static_cast<int>(line.size()) < cols)
            throw DataError("short weight row " + std::to_string(i) + " in " + path.string());
        for (int j = 0; j < cols; ++j) {
            const char c = line[static_cast<std::size_t>(j)];
            if (c != '0' && c != '1')
                throw DataError("bad weight character '" + std::string(1, c) + "' at row " + std::to_string(i) +
                                " in " + path.string());
            wm.at(i, j) = static_cast<std::uint8_t>(c - '0');
        }
    }
    return wm;
}

}  // namespace neurosort
