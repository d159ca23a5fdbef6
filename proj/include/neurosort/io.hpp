#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "neurosort/types.hpp"

namespace neurosort {

enum class TraceFormat { csv, raw_f64le };

inline TraceFormat trace_format_from_string(const std::string& s) {
    if (s == "csv") return TraceFormat::csv;
    if (s == "raw" || s == "raw-f64-le") return TraceFormat::raw_f64le;
    throw ConfigError("unknown trace format '" + s + "' (expected csv or raw-f64-le)");
}

namespace detail {

inline double f64_from_le_bytes(const unsigned char* p) {
    std::uint64_t u = 0;
    for (int i = 7; i >= 0; --i) u = (u << 8) | p[i];
    return std::bit_cast<double>(u);
}

inline void f64_to_le_bytes(double d, unsigned char* p) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// CSV layout: one amplitude per line, optional ",class_id" column marking a
// ground-truth spike at that row. Raw layout: packed little-endian float64,
// no labels.
inline NeuralTrace load_trace(const std::filesystem::path& path, TraceFormat format,
                              double sample_rate = 24000.0) {
    NeuralTrace trace;
    trace.sample_rate = sample_rate;

    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open trace file: " + path.string());

    if (format == TraceFormat::csv) {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string t = detail::trim(line);
            if (t.empty()) continue;
            const auto comma = t.find(',');
            const std::string amp_str = comma == std::string::npos ? t : detail::trim(t.substr(0, comma));
            std::size_t pos = 0;
            double amp = 0.0;
            try {
                amp = std::stod(amp_str, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos == 0 || pos != amp_str.size())
                throw DataError("parse error in " + path.string() + " at line " + std::to_string(line_no));
            if (comma != std::string::npos) {
                const std::string cls_str = detail::trim(t.substr(comma + 1));
                std::size_t cpos = 0;
                int cls = 0;
                try {
                    cls = std::stoi(cls_str, &cpos);
                } catch (const std::exception&) {
                    cpos = 0;
                }
                if (cpos == 0 || cpos != cls_str.size())
                    throw DataError("parse error in " + path.string() + " at line " + std::to_string(line_no));
                trace.labels.push_back({trace.samples.size(), cls});
            }
            trace.samples.push_back(amp);
        }
    } else {
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (bytes.size() % 8 != 0)
            throw DataError("raw trace " + path.string() + " has " + std::to_string(bytes.size()) +
                            " bytes, not a multiple of 8");
        trace.samples.reserve(bytes.size() / 8);
        for (std::size_t i = 0; i < bytes.size(); i += 8)
            trace.samples.push_back(detail::f64_from_le_bytes(bytes.data() + i));
    }

    if (trace.samples.empty()) throw DataError("empty trace file: " + path.string());
    trace.validate();
    return trace;
}

inline void save_trace(const NeuralTrace& trace, const std::filesystem::path& path, TraceFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write trace file: " + path.string());

    if (format == TraceFormat::csv) {
        std::size_t next_label = 0;
        char buf[64];
        for (std::size_t i = 0; i < trace.samples.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", trace.samples[i]);
            out << buf;
            while (next_label < trace.labels.size() && trace.labels[next_label].index == i) {
                out << ',' << trace.labels[next_label].class_id;
                ++next_label;
            }
            out << '\n';
        }
    } else {
        // Raw format carries samples only; labels are dropped.
        unsigned char b[8];
        for (double d : trace.samples) {
            detail::f64_to_le_bytes(d, b);
            out.write(reinterpret_cast<const char*>(b), 8);
        }
    }
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace neurosort
