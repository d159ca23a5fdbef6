#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "neurosort/weights.hpp"

namespace neurosort {

struct CrossbarConfig {
    int rows = 300;              // input lines
    int cols = 4;                // output columns including the dummy
    double g_on = 1e-4;          // junction conductance for weight 1 (10 kOhm)
    double g_off = 1e-6;         // junction conductance for weight 0 (1 MOhm)
    double g_p = 0.5;            // wire-segment conductance between adjacent nodes (2 Ohm)
    double g_t = 1e-4;           // termination conductance at each column output
    double i_in_on = 3e-7;       // injected current for a 1 spike bit
    double i_in_off = 0.0;       // injected current for a 0 spike bit
    double v_dd = 1.2;           // capacitor precharge voltage
    double delta_v_max = 0.2;    // allowed droop used to size the capacitor
    double t_on = 5e-8;          // row activation time per bit
    double t_data = 5e-6;        // bit period

    void validate() const {
        if (rows < 1) throw ConfigError("CrossbarConfig: rows must be >= 1");
        if (cols < 1) throw ConfigError("CrossbarConfig: cols must be >= 1");
        if (!(g_on > g_off) || !(g_off > 0.0)) throw ConfigError("CrossbarConfig: need g_on > g_off > 0");
        if (!(g_p > 0.0)) throw ConfigError("CrossbarConfig: g_p must be positive");
        if (!(g_t > 0.0)) throw ConfigError("CrossbarConfig: g_t must be positive");
        if (!(v_dd > 0.0)) throw ConfigError("CrossbarConfig: v_dd must be positive");
        if (!(delta_v_max > 0.0)) throw ConfigError("CrossbarConfig: delta_v_max must be positive");
        if (!(t_on > 0.0) || t_on > t_data) throw ConfigError("CrossbarConfig: need 0 < t_on <= t_data");
        if (i_in_on < 0.0 || i_in_off < 0.0) throw ConfigError("CrossbarConfig: input currents must be >= 0");
    }

    // Non-fatal checks. The current mirror behaves linearly only for synaptic
    // currents in roughly the 100 nA to 1 uA window.
    std::vector<std::string> warnings() const {
        std::vector<std::string> out;
        if (i_in_on > 0.0 && (i_in_on < 1e-7 || i_in_on > 1e-6))
            out.push_back("i_in_on = " + std::to_string(i_in_on) +
                          " A is outside the linear current-mirror window [100 nA, 1 uA]");
        return out;
    }
};

// Per-junction conductances, rows x cols, row-major. The last column is the
// dummy column added to balance row totals.
struct JunctionMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> g;

    JunctionMatrix() = default;
    JunctionMatrix(int r, int c) : rows(r), cols(c), g(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double& at(int r, int c) { return g[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
    double at(int r, int c) const { return g[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
};

// Maps weights to junction conductances and appends the dummy column: each
// dummy junction tops its row up to the largest row total (floor g_off), so
// every row presents the same total junction conductance to its driver.
inline JunctionMatrix nominal_conductances(const CrossbarConfig& cfg, const WeightMatrix& w) {
    if (w.n_input != cfg.rows || w.n_output != cfg.cols - 1)
        throw DataError("nominal_conductances: weight matrix is " + std::to_string(w.n_input) + "x" +
                        std::to_string(w.n_output) + ", config wants " + std::to_string(cfg.rows) + "x" +
                        std::to_string(cfg.cols - 1) + "+dummy");
    JunctionMatrix j(cfg.rows, cfg.cols);
    std::vector<double> row_total(static_cast<std::size_t>(cfg.rows), 0.0);
    for (int r = 0; r < cfg.rows; ++r) {
        for (int c = 0; c + 1 < cfg.cols; ++c) {
            const double g = w.at(r, c) ? cfg.g_on : cfg.g_off;
            j.at(r, c) = g;
            row_total[static_cast<std::size_t>(r)] += g;
        }
    }
    const double max_total = *std::max_element(row_total.begin(), row_total.end());
    for (int r = 0; r < cfg.rows; ++r)
        j.at(r, cfg.cols - 1) = std::max(max_total - row_total[static_cast<std::size_t>(r)] + cfg.g_off, cfg.g_off);
    return j;
}

// Nodal-analysis system G*v = i over N = 2*rows*cols nodes. Every junction
// owns two nodes: its row-bar node (side 0) and its col-bar node (side 1).
// Junctions are numbered down each column first, so for a 2x2 crossbar the
// node order is V1, V1', V2, V2', V3, V3', V4, V4'.
struct ConductanceSystem {
    int rows = 0;
    int cols = 0;
    int n = 0;
    std::vector<double> diag;
    struct OffDiag {
        int a, b;
        double g;  // stamped value (negative of the element conductance)
    };
    std::vector<OffDiag> off;
    std::vector<double> current;

    static int node_index(int rows, int r, int c, int side) { return 2 * (c * rows + r) + side; }
    int node(int r, int c, int side) const { return node_index(rows, r, c, side); }

    Eigen::SparseMatrix<double> matrix() const {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) + 2 * off.size());
        for (int k = 0; k < n; ++k) trip.emplace_back(k, k, diag[static_cast<std::size_t>(k)]);
        for (const auto& e : off) {
            trip.emplace_back(e.a, e.b, e.g);
            trip.emplace_back(e.b, e.a, e.g);
        }
        Eigen::SparseMatrix<double> m(n, n);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    // Dense copy, row-major. Intended for small systems in verification code.
    std::vector<double> dense() const {
        std::vector<double> m(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
        for (int k = 0; k < n; ++k) m[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)] = diag[static_cast<std::size_t>(k)];
        for (const auto& e : off) {
            m[static_cast<std::size_t>(e.a) * static_cast<std::size_t>(n) + static_cast<std::size_t>(e.b)] = e.g;
            m[static_cast<std::size_t>(e.b) * static_cast<std::size_t>(n) + static_cast<std::size_t>(e.a)] = e.g;
        }
        return m;
    }
};

inline std::vector<double> injection_vector(const CrossbarConfig& cfg, std::span<const std::uint8_t> spike) {
    if (static_cast<int>(spike.size()) != cfg.rows)
        throw DataError("injection_vector: spike length " + std::to_string(spike.size()) + " != rows " +
                        std::to_string(cfg.rows));
    std::vector<double> i(static_cast<std::size_t>(2 * cfg.rows * cfg.cols), 0.0);
    for (int r = 0; r < cfg.rows; ++r)
        i[static_cast<std::size_t>(ConductanceSystem::node_index(cfg.rows, r, 0, 0))] =
            spike[static_cast<std::size_t>(r)] ? cfg.i_in_on : cfg.i_in_off;
    return i;
}

// Assembles the conductance system. Stamp order is junctions, then row-bar
// wire segments, then col-bar segments, then terminations, which reproduces
// the textbook 2x2 expansion literally: A = (G11 + Gp), C = (B + Gt), with
// input currents entering the column-0 row-bar nodes.
inline ConductanceSystem build_system(const CrossbarConfig& cfg, const JunctionMatrix& j) {
    cfg.validate();
    if (j.rows != cfg.rows || j.cols != cfg.cols)
        throw DataError("build_system: junction matrix dimensions do not match config");
    ConductanceSystem sys;
    sys.rows = cfg.rows;
    sys.cols = cfg.cols;
    sys.n = 2 * cfg.rows * cfg.cols;
    sys.diag.assign(static_cast<std::size_t>(sys.n), 0.0);
    sys.current.assign(static_cast<std::size_t>(sys.n), 0.0);
    sys.off.reserve(static_cast<std::size_t>(cfg.rows) * static_cast<std::size_t>(cfg.cols) * 3);

    for (int c = 0; c < cfg.cols; ++c) {
        for (int r = 0; r < cfg.rows; ++r) {
            const double g = j.at(r, c);
            if (!(g > 0.0))
                throw DataError("build_system: junction (" + std::to_string(r) + "," + std::to_string(c) +
                                ") has non-positive conductance");
            const int a = sys.node(r, c, 0);
            const int b = sys.node(r, c, 1);
            sys.diag[static_cast<std::size_t>(a)] += g;
            sys.diag[static_cast<std::size_t>(b)] += g;
            sys.off.push_back({a, b, -g});
        }
    }
    for (int r = 0; r < cfg.rows; ++r) {
        for (int c = 0; c + 1 < cfg.cols; ++c) {
            const int a = sys.node(r, c, 0);
            const int b = sys.node(r, c + 1, 0);
            sys.diag[static_cast<std::size_t>(a)] += cfg.g_p;
            sys.diag[static_cast<std::size_t>(b)] += cfg.g_p;
            sys.off.push_back({a, b, -cfg.g_p});
        }
    }
    for (int c = 0; c < cfg.cols; ++c) {
        for (int r = 0; r + 1 < cfg.rows; ++r) {
            const int a = sys.node(r, c, 1);
            const int b = sys.node(r + 1, c, 1);
            sys.diag[static_cast<std::size_t>(a)] += cfg.g_p;
            sys.diag[static_cast<std::size_t>(b)] += cfg.g_p;
            sys.off.push_back({a, b, -cfg.g_p});
        }
    }
    for (int c = 0; c < cfg.cols; ++c) sys.diag[static_cast<std::size_t>(sys.node(cfg.rows - 1, c, 1))] += cfg.g_t;
    return sys;
}

inline ConductanceSystem build_system(const CrossbarConfig& cfg, const JunctionMatrix& j,
                                      std::span<const std::uint8_t> spike) {
    ConductanceSystem sys = build_system(cfg, j);
    sys.current = injection_vector(cfg, spike);
    return sys;
}

inline ConductanceSystem build_system(const CrossbarConfig& cfg, const WeightMatrix& w,
                                      std::span<const std::uint8_t> spike) {
    return build_system(cfg, nominal_conductances(cfg, w), spike);
}

struct CrossbarSolution {
    std::vector<double> v;                // node voltages
    std::vector<double> column_currents;  // termination current per column, dummy last
    double residual = 0.0;                // relative infinity-norm residual
};

struct CrossbarClassification {
    int class_id = 0;
    std::vector<double> final_voltages;  // final capacitor voltage per real column
    bool saturated = false;              // some column drooped past v_dd before clamping
};

// Capacitor sized so the worst-case discharge (all active rows feeding one
// column at full synaptic current) droops exactly delta_v_max.
inline double capacitance_for(const CrossbarConfig& cfg, std::size_t n_active) {
    if (!(cfg.delta_v_max > 0.0)) throw ConfigError("capacitance_for: delta_v_max must be positive");
    return static_cast<double>(n_active) * cfg.i_in_on * cfg.t_on / cfg.delta_v_max;
}

// Factors the conductance matrix once and reuses it for every injection
// pattern; the matrix depends only on the junction conductances, not on the
// spike, so classifying a whole evaluation set costs one factorization.
class CrossbarSolver {
public:
    CrossbarSolver(const CrossbarConfig& cfg, const JunctionMatrix& j)
        : cfg_(cfg), sys_(build_system(cfg, j)), g_(sys_.matrix()) {
        ldlt_.compute(g_);
        if (ldlt_.info() != Eigen::Success) throw NumericalError("crossbar factorization failed");
        const auto d = ldlt_.vectorD();
        double dmin = d(0), dmax = d(0);
        for (Eigen::Index k = 1; k < d.size(); ++k) {
            dmin = std::min(dmin, d(k));
            dmax = std::max(dmax, d(k));
        }
        if (!(dmin > 0.0) || dmax / dmin > 1e14)
            throw NumericalError("crossbar system is near-singular: smallest pivot " + std::to_string(dmin) +
                                 ", condition estimate " + std::to_string(dmax / std::abs(dmin)));
    }

    CrossbarSolver(const CrossbarConfig& cfg, const WeightMatrix& w)
        : CrossbarSolver(cfg, nominal_conductances(cfg, w)) {}

    const ConductanceSystem& system() const { return sys_; }
    const CrossbarConfig& config() const { return cfg_; }

    // Direct solve plus iterative refinement. Residuals are accumulated in
    // extended precision; with plain double accumulation the measured
    // residual floor can sit above the 1e-9 contract at large conductance
    // spreads even when the solution is as good as doubles allow.
    CrossbarSolution solve(const std::vector<double>& current) const {
        if (static_cast<int>(current.size()) != sys_.n) throw DataError("solve: current vector length mismatch");
        Eigen::VectorXd i(sys_.n);
        for (int k = 0; k < sys_.n; ++k) i(k) = current[static_cast<std::size_t>(k)];
        Eigen::VectorXd x = ldlt_.solve(i);

        double i_norm = 0.0;
        for (int k = 0; k < sys_.n; ++k) i_norm = std::max(i_norm, std::abs(current[static_cast<std::size_t>(k)]));

        Eigen::VectorXd r(sys_.n);
        double best_res = residual_into(current, x, r, i_norm);
        for (int pass = 0; pass < 4 && best_res > 1e-13; ++pass) {
            Eigen::VectorXd dx = ldlt_.solve(r);
            Eigen::VectorXd x2 = x + dx;
            Eigen::VectorXd r2(sys_.n);
            const double res2 = residual_into(current, x2, r2, i_norm);
            if (res2 >= best_res) break;
            x.swap(x2);
            r.swap(r2);
            best_res = res2;
        }

        CrossbarSolution sol;
        sol.v.resize(static_cast<std::size_t>(sys_.n));
        for (int k = 0; k < sys_.n; ++k) sol.v[static_cast<std::size_t>(k)] = x(k);
        sol.residual = best_res;
        sol.column_currents.resize(static_cast<std::size_t>(sys_.cols));
        for (int c = 0; c < sys_.cols; ++c)
            sol.column_currents[static_cast<std::size_t>(c)] =
                cfg_.g_t * sol.v[static_cast<std::size_t>(sys_.node(sys_.rows - 1, c, 1))];
        return sol;
    }

    CrossbarSolution solve_spike(std::span<const std::uint8_t> spike) const {
        return solve(injection_vector(cfg_, spike));
    }

private:
    // Writes r = current - G*x (accumulated in long double) and returns the
    // relative infinity-norm residual.
    double residual_into(const std::vector<double>& current, const Eigen::VectorXd& x, Eigen::VectorXd& r,
                         double i_norm) const {
        std::vector<long double> acc(static_cast<std::size_t>(sys_.n));
        for (int k = 0; k < sys_.n; ++k)
            acc[static_cast<std::size_t>(k)] =
                static_cast<long double>(current[static_cast<std::size_t>(k)]) -
                static_cast<long double>(sys_.diag[static_cast<std::size_t>(k)]) * static_cast<long double>(x(k));
        for (const auto& e : sys_.off) {
            acc[static_cast<std::size_t>(e.a)] -= static_cast<long double>(e.g) * static_cast<long double>(x(e.b));
            acc[static_cast<std::size_t>(e.b)] -= static_cast<long double>(e.g) * static_cast<long double>(x(e.a));
        }
        long double worst = 0.0L;
        for (int k = 0; k < sys_.n; ++k) {
            r(k) = static_cast<double>(acc[static_cast<std::size_t>(k)]);
            worst = std::max(worst, std::abs(acc[static_cast<std::size_t>(k)]));
        }
        const double scale = i_norm > 0.0 ? i_norm : 1.0;
        return static_cast<double>(worst / scale);
    }

    CrossbarConfig cfg_;
    ConductanceSystem sys_;
    Eigen::SparseMatrix<double> g_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// Applies the capacitor droop model to a solved injection pattern. Each real
// column's capacitor starts at v_dd and loses column_current * t_on / C_L per
// activation; by superposition the summed droop over per-row activations
// equals the droop of the single all-active-rows solve, which is what the
// caller hands in. The winner is the most discharged real column.
inline CrossbarClassification classify_solution(const CrossbarConfig& cfg, const CrossbarSolution& sol,
                                                std::size_t n_active) {
    if (cfg.cols < 2) throw ConfigError("classify_solution: need at least one real column plus the dummy");
    const double c_load = capacitance_for(cfg, n_active);
    CrossbarClassification out;
    const int n_real = cfg.cols - 1;
    out.final_voltages.resize(static_cast<std::size_t>(n_real));
    for (int c = 0; c < cfg.cols; ++c) {
        const double droop =
            c_load > 0.0 ? sol.column_currents[static_cast<std::size_t>(c)] * cfg.t_on / c_load : 0.0;
        if (droop > cfg.v_dd) out.saturated = true;
        if (c < n_real) out.final_voltages[static_cast<std::size_t>(c)] = std::max(cfg.v_dd - droop, 0.0);
    }
    for (int c = 1; c < n_real; ++c)
        if (out.final_voltages[static_cast<std::size_t>(c)] < out.final_voltages[static_cast<std::size_t>(out.class_id)])
            out.class_id = c;
    return out;
}

inline CrossbarClassification classify_crossbar(const CrossbarSolver& solver, std::span<const std::uint8_t> spike) {
    const CrossbarSolution sol = solver.solve_spike(spike);
    std::size_t n_active = 0;
    for (auto b : spike) n_active += b ? 1 : 0;
    return classify_solution(solver.config(), sol, n_active);
}

inline CrossbarClassification classify_crossbar(const CrossbarConfig& cfg, const WeightMatrix& w,
                                                std::span<const std::uint8_t> spike) {
    return classify_crossbar(CrossbarSolver(cfg, w), spike);
}

inline double crossbar_accuracy(const CrossbarSolver& solver, const std::vector<std::vector<std::uint8_t>>& spikes,
                                const std::vector<int>& labels) {
    if (spikes.size() != labels.size()) throw DataError("crossbar_accuracy: spike/label count mismatch");
    if (spikes.empty()) throw DataError("crossbar_accuracy: empty evaluation set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < spikes.size(); ++i)
        if (classify_crossbar(solver, spikes[i]).class_id == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(spikes.size());
}

// Matrix Market coordinate dump of the assembled system (lower triangle,
// symmetric storage) for inspection with external tools.
inline void write_matrix_market(const ConductanceSystem& sys, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write matrix dump: " + path.string());
    std::vector<std::tuple<int, int, double>> entries;
    entries.reserve(static_cast<std::size_t>(sys.n) + sys.off.size());
    for (int k = 0; k < sys.n; ++k) entries.emplace_back(k, k, sys.diag[static_cast<std::size_t>(k)]);
    for (const auto& e : sys.off) entries.emplace_back(std::max(e.a, e.b), std::min(e.a, e.b), e.g);
    std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
        return std::get<1>(x) != std::get<1>(y) ? std::get<1>(x) < std::get<1>(y) : std::get<0>(x) < std::get<0>(y);
    });
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << sys.n << ' ' << sys.n << ' ' << entries.size() << '\n';
    char buf[64];
    for (const auto& [r, c, g] : entries) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r + 1, c + 1, g);
        out << buf;
    }
}

inline void write_vector_market(const std::vector<double>& v, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write vector dump: " + path.string());
    out << "%%MatrixMarket matrix array real general\n";
    out << v.size() << " 1\n";
    char buf[48];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        out << buf;
    }
}

}  // namespace neurosort
