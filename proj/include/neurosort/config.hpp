#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "neurosort/common.hpp"

namespace neurosort {

namespace detail {

inline std::string trim_ws(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat key=value configuration. Lines starting with '#' are comments; later
// assignments win. The canonical form (sorted keys) feeds the config hash
// recorded in every output header.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path.string());
        KeyValueConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = detail::trim_ws(line);
            if (t.empty() || t[0] == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value, got \"" + t +
                                  "\"");
            cfg.set(detail::trim_ws(t.substr(0, eq)), detail::trim_ws(t.substr(eq + 1)));
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) {
        if (key.empty()) throw ConfigError("empty config key");
        kv_[key] = value;
    }

    // Accepts a "key=value" token, as passed on the command line.
    void set_pair(const std::string& pair) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key=value, got \"" + pair + "\"");
        set(detail::trim_ws(pair.substr(0, eq)), detail::trim_ws(pair.substr(eq + 1)));
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& def) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": cannot parse \"" + it->second + "\" as a number");
        }
    }

    long long get_int(const std::string& key, long long def) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": cannot parse \"" + it->second + "\" as an integer");
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t def) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": cannot parse \"" + it->second + "\" as an unsigned integer");
        }
    }

    bool get_bool(const std::string& key, bool def) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config key " + key + ": cannot parse \"" + v + "\" as a boolean");
    }

    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& def) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return def;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell = detail::trim_ws(cell);
            if (cell.empty()) continue;
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(cell, &pos));
                if (pos != cell.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ConfigError("config key " + key + ": cannot parse list element \"" + cell + "\"");
            }
        }
        if (out.empty()) throw ConfigError("config key " + key + ": empty list");
        return out;
    }

    // Sorted key=value lines; stable across insertion orders.
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : kv_) {
            out += k;
            out += '=';
            out += v;
            out += '\n';
        }
        return out;
    }

    std::uint64_t hash() const { return fnv1a64(canonical()); }

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace neurosort
