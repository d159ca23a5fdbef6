#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "neurosort/common.hpp"

namespace neurosort {

// Deterministic cell formatting. Doubles use %.10g so values survive a
// round-trip at the precision the experiments care about without dragging
// platform-dependent noise digits into the files.
inline std::string csv_cell(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

template <typename T>
    requires std::is_integral_v<T>
inline std::string csv_cell(T v) {
    return std::to_string(v);
}

inline std::string csv_cell(const std::string& v) { return v; }
inline std::string csv_cell(const char* v) { return v; }

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    template <typename... Ts>
    void add_row(const Ts&... cells) {
        rows.push_back({csv_cell(cells)...});
    }
};

inline std::string hex_u64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Every emitted CSV carries the same three-comment header so any file can be
// traced back to the exact tool version, configuration, and seed. Nothing
// time- or host-dependent goes into these files; identical runs must produce
// identical bytes.
inline void write_csv(const CsvTable& table, const std::filesystem::path& path, std::uint64_t config_hash,
                      std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write csv: " + path.string());
    out << "# neurosort " << kVersion << '\n';
    out << "# config_hash=" << hex_u64(config_hash) << '\n';
    out << "# seed=" << seed << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw DataError("csv row width mismatch in " + path.string());
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

// Square confusion matrix indexed [true][predicted]; unmatched (-1) truth
// rows are skipped by the accumulator.
struct ConfusionMatrix {
    int k = 0;
    std::vector<std::size_t> counts;

    explicit ConfusionMatrix(int classes = 0)
        : k(classes), counts(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0) {}

    void add(int truth, int predicted) {
        if (truth < 0 || truth >= k || predicted < 0 || predicted >= k) return;
        ++counts[static_cast<std::size_t>(truth) * static_cast<std::size_t>(k) + static_cast<std::size_t>(predicted)];
    }

    std::size_t at(int truth, int predicted) const {
        return counts[static_cast<std::size_t>(truth) * static_cast<std::size_t>(k) +
                      static_cast<std::size_t>(predicted)];
    }
};

}  // namespace neurosort
