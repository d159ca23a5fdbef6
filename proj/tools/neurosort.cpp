#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neurosort/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    bool seed_given = false;
    std::uint64_t seed = 0;
};

neurosort::RunConfig resolve_config(const CliOptions& opt) {
    neurosort::KeyValueConfig kv;
    if (!opt.config_path.empty()) kv = neurosort::KeyValueConfig::from_file(opt.config_path);
    // Seed precedence: --seed, then config file, then NEUROSORT_SEED, then 1.
    if (!kv.has("seed")) {
        if (const char* env = std::getenv("NEUROSORT_SEED")) kv.set("seed", env);
    }
    for (const auto& pair : opt.overrides) kv.set_pair(pair);
    if (opt.seed_given) kv.set("seed", std::to_string(opt.seed));
    return neurosort::RunConfig::from_kv(kv);
}

void print_config_warnings(const neurosort::RunConfig& cfg) {
    for (const auto& w : cfg.crossbar.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"neurosort: behavioral simulator of a low-power neural spike sorter"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "key=value config file");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--set", opt.overrides, "override a config key (key=value, repeatable)");
    auto* seed_opt = app.add_option("--seed", opt.seed, "global RNG seed");

    auto* cmd_pipeline = app.add_subcommand("pipeline", "detect, encode, cluster, train, classify with both back-ends")->fallthrough();
    auto* cmd_trainsize = app.add_subcommand("trainsize", "accuracy versus number of training presentations")->fallthrough();
    auto* cmd_restarts = app.add_subcommand("restarts", "per-restart accuracy histogram for small and large budgets")->fallthrough();
    auto* cmd_sweep = app.add_subcommand("sweep", "classification accuracy under junction-conductance variation")->fallthrough();
    auto* cmd_adapt = app.add_subcommand("adapt", "two-phase drift monitoring and conditional retraining")->fallthrough();
    auto* cmd_power = app.add_subcommand("power", "average power of the discharge path")->fallthrough();
    auto* cmd_dump = app.add_subcommand("dump-matrix", "write the assembled conductance system in Matrix Market form")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        opt.seed_given = seed_opt->count() > 0;
        const neurosort::RunConfig cfg = resolve_config(opt);
        print_config_warnings(cfg);

        if (cmd_pipeline->parsed()) {
            const auto s = neurosort::run_pipeline(cfg, opt.out_dir);
            std::printf("detected=%zu train=%zu test=%zu\n", s.n_detected, s.n_train, s.n_test);
            std::printf("digital: train=%.4f test=%.4f\n", s.digital_train_accuracy, s.digital_test_accuracy);
            std::printf("crossbar: test=%.4f agreement=%.4f\n", s.crossbar_test_accuracy, s.agreement);
            if (s.truth_test_accuracy >= 0.0) std::printf("truth: test=%.4f\n", s.truth_test_accuracy);
            std::printf("power_avg_w=%.6g\n", s.power_w);
        } else if (cmd_trainsize->parsed()) {
            for (const auto& r : neurosort::run_train_size_sweep(cfg, opt.out_dir))
                std::printf("fraction=%.3f train_count=%d train=%.4f test=%.4f\n", r.fraction, r.train_count,
                            r.train_accuracy, r.test_accuracy);
        } else if (cmd_restarts->parsed()) {
            const auto s = neurosort::run_restart_histogram(cfg, opt.out_dir);
            std::printf("max_small=%.4f max_large=%.4f difference=%.4f\n", s.max_small, s.max_large,
                        s.max_large - s.max_small);
        } else if (cmd_sweep->parsed()) {
            for (const auto& r : neurosort::run_variation_cmd(cfg, opt.out_dir))
                std::printf("level=%.3f mean=%.4f std=%.4f trials=%d\n", r.level, r.mean_accuracy, r.std_accuracy,
                            r.trials);
        } else if (cmd_adapt->parsed()) {
            const auto s = neurosort::run_adapt_cmd(cfg, opt.out_dir);
            std::printf("phase1_triggers=%d phase2_triggers=%d retrains=%d\n", s.phase1_triggers, s.phase2_triggers,
                        s.retrains);
            std::printf("novel_distance: pre=%.2f post=%.2f\n", s.pre_mean_novel_distance,
                        s.post_mean_novel_distance);
        } else if (cmd_power->parsed()) {
            std::printf("power_avg_w=%.6g\n", neurosort::run_power_cmd(cfg, opt.out_dir));
        } else if (cmd_dump->parsed()) {
            neurosort::run_dump_matrix(cfg, opt.out_dir);
            std::printf("wrote system.mtx and system_rhs.mtx\n");
        }
        return 0;
    } catch (const neurosort::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const neurosort::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const neurosort::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
