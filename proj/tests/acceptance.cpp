// System-level acceptance gate. Each check prints exactly one PASS/FAIL line
// with the measured numbers; the process exits 0 only if every check passes.
// Checks 4, 5, 7, 8 and 9 exercise full pipeline runs on synthetic data, so
// this binary takes noticeably longer than the unit suite.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "neurosort/crossbar.hpp"
#include "neurosort/pipeline.hpp"
#include "neurosort/rng.hpp"
#include "neurosort/snn.hpp"
#include "neurosort/variation.hpp"
#include "neurosort/weights.hpp"

namespace fs = std::filesystem;
using namespace neurosort;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", idx, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void run_check(int idx, const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
    try {
        const auto [ok, detail] = fn();
        report(idx, name, ok, detail);
    } catch (const std::exception& e) {
        report(idx, name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

RunConfig make_config(const std::vector<std::pair<std::string, std::string>>& pairs) {
    KeyValueConfig kv;
    for (const auto& [k, v] : pairs) kv.set(k, v);
    return RunConfig::from_kv(kv);
}

fs::path work_dir() {
    static const fs::path base = [] {
        fs::path p = fs::temp_directory_path() / "neurosort_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return base;
}

double median5(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

JunctionMatrix random_junctions(int rows, int cols, double g_lo, double g_hi, RngStream& rng) {
    JunctionMatrix j(rows, cols);
    const double ratio = g_hi / g_lo;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) j.at(r, c) = g_lo * std::pow(ratio, rng.uniform());
    return j;
}

std::vector<std::uint8_t> random_spike(int rows, RngStream& rng) {
    std::vector<std::uint8_t> s(static_cast<std::size_t>(rows), 0);
    for (auto& b : s) b = rng.bernoulli(0.5) ? 1 : 0;
    s[0] = 1;  // keep at least one driven row
    return s;
}

// --- check 1: closed-form average power -------------------------------------

std::pair<bool, std::string> check_power() {
    PowerParams p;  // defaults: 300 nA per synapse, 3 columns, 1.2 V, 1% duty
    const double w = average_power(p);
    const double expect = p.i_synapse * p.n_column * p.v_dd * p.beta;
    const bool exact = std::fabs(w - expect) <= 1e-15 * expect;
    const bool near_target = std::fabs(w - 1.0e-8) <= 0.10 * 1.0e-8;
    return {exact && near_target,
            fmt("average_power = %.6e W (formula product %.6e, within 10%% of 1e-8: %s)", w, expect,
                near_target ? "yes" : "no")};
}

// --- check 2: conductance stamps vs a hand-built 2x2 reference --------------

std::pair<bool, std::string> check_stamp_reference() {
    RngStream rng(2026);
    double worst = 0.0;
    for (int t = 0; t < 25; ++t) {
        CrossbarConfig cfg;
        cfg.rows = 2;
        cfg.cols = 2;
        cfg.g_p = rng.uniform(0.1, 1.0);
        cfg.g_t = rng.uniform(5e-5, 5e-4);
        JunctionMatrix j = random_junctions(2, 2, 1e-6, 1e-4, rng);
        const ConductanceSystem sys = build_system(cfg, j);
        if (sys.n != 8) return {false, "system size is not 8 nodes for a 2x2 array"};

        // Node order: junctions run down column 0 first, each owning a
        // row-bar node then a col-bar node. Wires join adjacent row-bar nodes
        // across columns and adjacent col-bar nodes down rows; terminations
        // sit on the last col-bar node of each column.
        const double G11 = j.at(0, 0), G21 = j.at(1, 0), G12 = j.at(0, 1), G22 = j.at(1, 1);
        const double Gp = cfg.g_p, Gt = cfg.g_t;
        double E[8][8] = {};
        E[0][0] = G11 + Gp; E[0][1] = -G11; E[0][4] = -Gp;
        E[1][1] = G11 + Gp; E[1][0] = -G11; E[1][3] = -Gp;
        E[2][2] = G21 + Gp; E[2][3] = -G21; E[2][6] = -Gp;
        E[3][3] = G21 + Gp + Gt; E[3][2] = -G21; E[3][1] = -Gp;
        E[4][4] = G12 + Gp; E[4][5] = -G12; E[4][0] = -Gp;
        E[5][5] = G12 + Gp; E[5][4] = -G12; E[5][7] = -Gp;
        E[6][6] = G22 + Gp; E[6][7] = -G22; E[6][2] = -Gp;
        E[7][7] = G22 + Gp + Gt; E[7][6] = -G22; E[7][5] = -Gp;

        const std::vector<double> d = sys.dense();
        for (int a = 0; a < 8; ++a) {
            for (int b = 0; b < 8; ++b) {
                const double got = d[static_cast<std::size_t>(a) * 8 + static_cast<std::size_t>(b)];
                const double want = E[a][b];
                if (want == 0.0) {
                    if (got != 0.0) return {false, fmt("unexpected fill-in at (%d,%d): %.3e", a, b, got)};
                    continue;
                }
                const double rel = std::fabs(got - want) / std::fabs(want);
                worst = std::max(worst, rel);
            }
        }
    }
    return {worst <= 1e-14, fmt("25 random 2x2 arrays, worst entry mismatch %.3e (tol 1e-14)", worst)};
}

// --- check 3: solver residual + dense LU cross-check -------------------------

std::pair<bool, std::string> check_solver_accuracy() {
    RngStream rng(31);
    double worst_res = 0.0, worst_lu = 0.0;
    int n_dense = 0;
    for (int t = 0; t < 50; ++t) {
        CrossbarConfig cfg;
        if (t == 0) {
            cfg.rows = 300;
            cfg.cols = 4;
        } else if (t <= 20) {
            cfg.rows = 2 + static_cast<int>(rng.uniform_index(19));   // 2..20, dense-checkable
            cfg.cols = 2 + static_cast<int>(rng.uniform_index(4));    // 2..5
        } else {
            cfg.rows = 21 + static_cast<int>(rng.uniform_index(280)); // 21..300
            cfg.cols = 2 + static_cast<int>(rng.uniform_index(3));    // 2..4
        }
        const JunctionMatrix j = random_junctions(cfg.rows, cfg.cols, cfg.g_off, cfg.g_on, rng);
        const auto spike = random_spike(cfg.rows, rng);
        const CrossbarSolver solver(cfg, j);
        const CrossbarSolution sol = solver.solve_spike(spike);
        worst_res = std::max(worst_res, sol.residual);

        if (cfg.rows <= 20) {
            const ConductanceSystem& sys = solver.system();
            const std::vector<double> d = sys.dense();
            const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
                d.data(), sys.n, sys.n);
            const std::vector<double> b = injection_vector(cfg, spike);
            const Eigen::Map<const Eigen::VectorXd> bv(b.data(), sys.n);
            const Eigen::VectorXd x = Eigen::MatrixXd(a).fullPivLu().solve(bv);
            double denom = 0.0, diff = 0.0;
            for (int k = 0; k < sys.n; ++k) {
                denom = std::max(denom, std::fabs(x(k)));
                diff = std::max(diff, std::fabs(x(k) - sol.v[static_cast<std::size_t>(k)]));
            }
            worst_lu = std::max(worst_lu, diff / denom);
            ++n_dense;
        }
    }
    const bool ok = worst_res <= 1e-9 && worst_lu <= 1e-10 && n_dense >= 10;
    return {ok, fmt("50 random arrays up to 300x4: worst residual %.3e (tol 1e-9), "
                    "worst gap vs dense LU %.3e over %d small arrays (tol 1e-10)",
                    worst_res, worst_lu, n_dense)};
}

// --- check 4: crossbar agrees with the digital counter classifier ------------

std::pair<bool, std::string> check_backend_agreement() {
    // Near-ideal wires: 100 S segments make the cumulative bar drop a few
    // ohms against 10 kOhm junctions, so the comparison isolates the
    // classifiers rather than the wire parasitics. Residual disagreement
    // comes from spikes whose top two digital counters tie exactly; the
    // counter breaks ties by index while the analog column currents have no
    // exact ties, so the agreement ceiling tracks the tie rate of the data.
    const RunConfig cfg = make_config({{"seed", "11"},
                                       {"synth.classes", "3"},
                                       {"synth.spikes_per_class", "450"},
                                       {"synth.noise_sigma", "0.025"},
                                       {"crossbar.g_p", "100"}});
    const PipelineSummary s = run_pipeline(cfg, work_dir() / "agreement");
    const bool ok = s.n_test >= 600 && s.agreement >= 0.95;
    return {ok, fmt("crossbar vs digital agreement %.4f on %zu held-out spikes (need >= 0.95 on >= 600)",
                    s.agreement, s.n_test)};
}

// --- check 5: accuracy knee under device variation ---------------------------

std::pair<bool, std::string> check_variation_knee() {
    const RunConfig cfg = make_config({{"seed", "5"},
                                       {"synth.classes", "3"},
                                       {"synth.spikes_per_class", "150"},
                                       {"synth.noise_sigma", "0.03"},
                                       {"sweep.levels", "0,0.3,2.0"},
                                       {"sweep.trials", "20"}});
    const auto rows = run_variation_cmd(cfg, work_dir() / "sweep");
    auto mean_at = [&](double level) {
        for (const auto& r : rows)
            if (std::fabs(r.level - level) < 1e-12) return r.mean_accuracy;
        throw DataError("sweep is missing a requested level");
    };
    const double a0 = mean_at(0.0), a30 = mean_at(0.3), a200 = mean_at(2.0);
    const bool flat_knee = std::fabs(a30 - a0) <= 0.05;
    const bool collapses = (a30 - a200) >= 0.10;
    return {flat_knee && collapses,
            fmt("mean accuracy %.4f at 0%%, %.4f at 30%%, %.4f at 200%% variation "
                "(need |30%%-0%%| <= 0.05 and 30%%-200%% >= 0.10, 20 trials each)",
                a0, a30, a200)};
}

// --- check 6: synapse flip frequency matches the configured probability ------

std::pair<bool, std::string> check_flip_probability() {
    SnnTrainConfig cfg;
    cfg.n_input = 300;
    cfg.n_output = 2;
    cfg.leak = 1;
    cfg.thr1 = 15;
    cfg.thr2 = 1'000'000;  // keep the reduced-rate regime out of this measurement
    cfg.batch_per_class = 1;
    cfg.p_up = {0.08};
    cfg.p_dn = {0.02};

    WeightMatrix base(cfg.n_input, cfg.n_output);
    for (int i = 0; i < 60; ++i) base.at(i, 0) = 1;  // column 0 wins every presentation
    const std::vector<std::uint8_t> spike(static_cast<std::size_t>(cfg.n_input), 1);

    RngStream rng(99);
    long long eligible = 0, flips = 0;
    for (int t = 0; t < 42; ++t) {
        WeightMatrix w = base;  // fresh weights so the eligible pool never shrinks
        NeuronState state(cfg.n_output);
        const PresentOutcome out = present(state, w, spike, 0, 0, cfg, rng);
        if (!out.updated || !out.hebbian) return {false, "presentation did not take the potentiation path"};
        eligible += static_cast<long long>(out.eligible_up);
        flips += static_cast<long long>(out.flipped_up);
    }
    const double p = cfg.p_up[0];
    const double expect = p * static_cast<double>(eligible);
    const double sigma = std::sqrt(static_cast<double>(eligible) * p * (1.0 - p));
    const bool ok = eligible >= 10000 && std::fabs(static_cast<double>(flips) - expect) <= 3.0 * sigma;
    return {ok, fmt("%lld flips over %lld eligible synapses, expected %.1f +- %.1f (3 sigma) at p=%.2f",
                    flips, eligible, expect, 3.0 * sigma, p)};
}

// --- check 7: train/test generalization gap ----------------------------------

std::pair<bool, std::string> check_generalization_gap() {
    const RunConfig cfg = make_config({{"seed", "21"},
                                       {"synth.classes", "3"},
                                       {"synth.spikes_per_class", "300"},
                                       {"synth.noise_sigma", "0.03"},
                                       {"split.train_fraction", "0.6"}});
    const PipelineSummary s = run_pipeline(cfg, work_dir() / "gap");
    const double gap = std::fabs(s.digital_train_accuracy - s.digital_test_accuracy);
    return {gap <= 0.05, fmt("train accuracy %.4f, test accuracy %.4f, gap %.4f (tol 0.05, 60%% train split)",
                             s.digital_train_accuracy, s.digital_test_accuracy, gap)};
}

// --- check 8: restart budget barely moves the best accuracy ------------------

std::pair<bool, std::string> check_restart_stability() {
    std::vector<double> gaps;
    std::string runs;
    for (int rep = 0; rep < 5; ++rep) {
        const RunConfig cfg = make_config({{"seed", std::to_string(40 + rep)},
                                           {"synth.classes", "3"},
                                           {"synth.spikes_per_class", "150"},
                                           {"synth.noise_sigma", "0.03"},
                                           {"restarts.small", "10"},
                                           {"restarts.large", "100"}});
        const RestartHistogramSummary h =
            run_restart_histogram(cfg, work_dir() / ("restarts" + std::to_string(rep)));
        gaps.push_back(h.max_large - h.max_small);
        runs += fmt("%s%.3f/%.3f", rep ? " " : "", h.max_small, h.max_large);
    }
    const double med = median5(gaps);
    return {med <= 0.03,
            fmt("best-of-10 vs best-of-100 accuracy per repetition [%s], median gap %.4f (tol 0.03)",
                runs.c_str(), med)};
}

// --- check 9: novelty monitor stays quiet, triggers, then settles ------------

std::pair<bool, std::string> check_adaptation() {
    const RunConfig cfg = make_config({{"seed", "7"},
                                       {"synth.classes", "2"},
                                       {"synth.spikes_per_class", "60"},
                                       {"synth.noise_sigma", "0.05"},
                                       {"adapt.window", "30"},
                                       {"adapt.phase1", "55"},
                                       {"adapt.phase2", "60"},
                                       {"adapt.novel_class", "2"}});
    const AdaptSummary s = run_adapt_cmd(cfg, work_dir() / "adapt");
    const bool ok = s.phase1_triggers == 0 && s.phase2_triggers >= 1 &&
                    s.post_mean_novel_distance < s.pre_mean_novel_distance;
    return {ok, fmt("phase-1 triggers %d (need 0), phase-2 triggers %d (need >= 1), "
                    "novel-class mean distance %.1f -> %.1f after retraining",
                    s.phase1_triggers, s.phase2_triggers, s.pre_mean_novel_distance,
                    s.post_mean_novel_distance)};
}

// --- check 10: current conservation and superposition -------------------------

std::pair<bool, std::string> check_conservation_superposition() {
    RngStream rng(77);
    double worst_cons = 0.0, worst_sup = 0.0;
    for (int t = 0; t < 100; ++t) {
        CrossbarConfig cfg;
        cfg.rows = 2 + static_cast<int>(rng.uniform_index(59));  // 2..60
        cfg.cols = 2 + static_cast<int>(rng.uniform_index(4));   // 2..5
        const JunctionMatrix j = random_junctions(cfg.rows, cfg.cols, cfg.g_off, cfg.g_on, rng);
        const CrossbarSolver solver(cfg, j);
        const int n = solver.system().n;

        // Everything injected at the row inputs must leave through the
        // column terminations; no other path reaches ground.
        const auto spike = random_spike(cfg.rows, rng);
        const CrossbarSolution sol = solver.solve_spike(spike);
        double injected = 0.0;
        for (const auto b : spike) injected += b ? cfg.i_in_on : 0.0;
        double out = 0.0;
        for (const double c : sol.column_currents) out += c;
        worst_cons = std::max(worst_cons, std::fabs(out - injected) / injected);

        // The network is linear: solving the summed injection must equal the
        // sum of the individual solutions.
        std::vector<double> b1(static_cast<std::size_t>(n), 0.0), b2 = b1, b12 = b1;
        for (int r = 0; r < cfg.rows; ++r) {
            const auto node = static_cast<std::size_t>(ConductanceSystem::node_index(cfg.rows, r, 0, 0));
            b1[node] = rng.uniform(0.0, cfg.i_in_on);
            b2[node] = rng.uniform(0.0, cfg.i_in_on);
            b12[node] = b1[node] + b2[node];
        }
        const CrossbarSolution s1 = solver.solve(b1);
        const CrossbarSolution s2 = solver.solve(b2);
        const CrossbarSolution s12 = solver.solve(b12);
        double denom = 0.0, diff = 0.0;
        for (int k = 0; k < n; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            denom = std::max(denom, std::fabs(s12.v[ks]));
            diff = std::max(diff, std::fabs(s12.v[ks] - (s1.v[ks] + s2.v[ks])));
        }
        worst_sup = std::max(worst_sup, diff / denom);
    }
    const bool ok = worst_cons <= 1e-9 && worst_sup <= 1e-9;
    return {ok, fmt("100 random arrays: worst conservation error %.3e, worst superposition error %.3e "
                    "(tol 1e-9 relative)",
                    worst_cons, worst_sup)};
}

// --- check 11: CLI reruns are byte-identical ----------------------------------

int run_cli(const std::string& args, const fs::path& out_dir, const fs::path& log) {
    const std::string cmd = std::string("\"") + NEUROSORT_CLI_PATH + "\" " + args + " --out \"" +
                            out_dir.string() + "\" > \"" + log.string() + "\" 2>&1";
    return std::system(cmd.c_str());
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_bytes(e.path());
    return files;
}

std::pair<bool, std::string> check_cli_determinism() {
    struct Cmd {
        const char* name;
        std::vector<const char*> sets;
    };
    const std::vector<Cmd> cmds = {
        {"pipeline",
         {"synth.spikes_per_class=40", "synth.noise_sigma=0.03", "snn.restarts=3", "snn.train_count=400"}},
        {"trainsize",
         {"synth.spikes_per_class=40", "synth.noise_sigma=0.03", "snn.restarts=2", "snn.train_count=300",
          "trainsize.fractions=0.5,1.0"}},
        {"restarts",
         {"synth.spikes_per_class=40", "synth.noise_sigma=0.03", "snn.train_count=300", "restarts.small=3",
          "restarts.large=6"}},
        {"sweep",
         {"synth.spikes_per_class=40", "synth.noise_sigma=0.03", "snn.restarts=2", "snn.train_count=300",
          "sweep.levels=0,0.5", "sweep.trials=3"}},
        {"adapt",
         {"synth.classes=2", "synth.spikes_per_class=60", "synth.noise_sigma=0.05", "adapt.window=30",
          "adapt.phase1=55", "adapt.phase2=60", "adapt.novel_class=2"}},
        {"power", {}},
        {"dump-matrix", {"encoder.n_input=32"}},
    };

    const fs::path base = work_dir() / "cli";
    const fs::path logs = base / "logs";
    fs::create_directories(logs);
    int files_compared = 0;
    for (const auto& cmd : cmds) {
        std::string args = std::string(cmd.name) + " --seed 9";
        for (const char* s : cmd.sets) args += std::string(" --set ") + s;
        const fs::path dir_a = base / (std::string(cmd.name) + "_a");
        const fs::path dir_b = base / (std::string(cmd.name) + "_b");
        for (const auto& [dir, tag] : {std::pair{dir_a, "a"}, std::pair{dir_b, "b"}}) {
            const int rc = run_cli(args, dir, logs / (std::string(cmd.name) + "_" + tag + ".log"));
            if (rc != 0) return {false, fmt("'%s' run %s exited with status %d", cmd.name, tag, rc)};
        }
        const auto tree_a = snapshot_tree(dir_a);
        const auto tree_b = snapshot_tree(dir_b);
        if (tree_a.empty()) return {false, fmt("'%s' produced no output files", cmd.name)};
        if (tree_a.size() != tree_b.size())
            return {false, fmt("'%s' reruns produced different file sets", cmd.name)};
        for (const auto& [rel, bytes] : tree_a) {
            const auto it = tree_b.find(rel);
            if (it == tree_b.end() || it->second != bytes)
                return {false, fmt("'%s' rerun differs in %s", cmd.name, rel.c_str())};
            ++files_compared;
        }
    }
    return {true, fmt("%zu subcommands rerun with fixed seeds, %d output files byte-identical",
                      cmds.size(), files_compared)};
}

}  // namespace

int main() {
    std::printf("acceptance checks, working under %s\n", work_dir().string().c_str());
    run_check(1, "average power model", check_power);
    run_check(2, "conductance stamps vs 2x2 reference", check_stamp_reference);
    run_check(3, "solver residual and dense LU agreement", check_solver_accuracy);
    run_check(4, "crossbar vs digital agreement", check_backend_agreement);
    run_check(5, "accuracy knee under device variation", check_variation_knee);
    run_check(6, "synapse flip probability calibration", check_flip_probability);
    run_check(7, "train/test generalization gap", check_generalization_gap);
    run_check(8, "restart budget stability", check_restart_stability);
    run_check(9, "novelty-triggered adaptation", check_adaptation);
    run_check(10, "current conservation and superposition", check_conservation_superposition);
    run_check(11, "CLI rerun determinism", check_cli_determinism);

    if (g_failures == 0) {
        std::printf("all 11 acceptance checks passed\n");
        return 0;
    }
    std::printf("%d acceptance check(s) failed\n", g_failures);
    return 1;
}
