#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurosort/adaptation.hpp"
#include "neurosort/config.hpp"
#include "neurosort/crossbar.hpp"
#include "neurosort/detection.hpp"
#include "neurosort/digital.hpp"
#include "neurosort/encoding.hpp"
#include "neurosort/io.hpp"
#include "neurosort/kmeans.hpp"
#include "neurosort/report.hpp"
#include "neurosort/snn.hpp"
#include "neurosort/synth.hpp"
#include "neurosort/variation.hpp"

namespace neurosort {

struct SynthConfig {
    int classes = 3;
    int spikes_per_class = 300;
    double noise_sigma = 0.05;
};

// Whole-run configuration: one flat key=value namespace covering every stage.
// Cross-stage dimensions (encoder width feeds the trainer and the crossbar,
// cluster count feeds the output layer) are derived here once so the stages
// can never disagree.
struct RunConfig {
    std::string source = "synth";  // synth | file
    std::string input_path;
    TraceFormat input_format = TraceFormat::csv;
    double sample_rate = 24000.0;
    SynthConfig synth;
    DetectorConfig detector;
    EncoderConfig encoder;
    KMeansConfig kmeans;
    double train_fraction = 0.5;
    SnnTrainConfig snn;
    CrossbarConfig crossbar;
    double power_n_column = 3.0;
    VariationSweepConfig sweep;
    AdaptationConfig adapt;
    int adapt_phase1 = 200;
    int adapt_phase2 = 200;
    int adapt_novel_class = 3;
    std::vector<double> trainsize_fractions = {0.25, 0.5, 0.75, 1.0};
    int restarts_small = 10;
    int restarts_large = 100;
    std::string dump_weights_path;  // optional pre-trained weights for dump-matrix
    std::uint64_t seed = 1;
    std::uint64_t config_hash = 0;

    static RunConfig from_kv(const KeyValueConfig& kv) {
        RunConfig c;
        c.config_hash = kv.hash();
        c.seed = kv.get_u64("seed", 1);

        c.source = kv.get_string("source", "synth");
        if (c.source != "synth" && c.source != "file")
            throw ConfigError("source must be 'synth' or 'file', got '" + c.source + "'");
        c.input_path = kv.get_string("input.path", "");
        c.input_format = trace_format_from_string(kv.get_string("input.format", "csv"));
        c.sample_rate = kv.get_double("input.sample_rate", 24000.0);

        c.synth.classes = static_cast<int>(kv.get_int("synth.classes", 3));
        c.synth.spikes_per_class = static_cast<int>(kv.get_int("synth.spikes_per_class", 300));
        c.synth.noise_sigma = kv.get_double("synth.noise_sigma", 0.05);

        c.detector.neo_window = static_cast<int>(kv.get_int("detector.neo_window", 8));
        c.detector.threshold_scale = kv.get_double("detector.threshold_scale", 8.0);
        c.detector.refractory = static_cast<int>(kv.get_int("detector.refractory", 48));
        c.detector.window_len = static_cast<int>(kv.get_int("detector.window_len", 64));
        c.detector.align_offset = static_cast<int>(kv.get_int("detector.align_offset", 12));

        c.encoder.m = static_cast<int>(kv.get_int("encoder.m", 16));
        c.encoder.bits = static_cast<int>(kv.get_int("encoder.bits", 5));
        c.encoder.n_input = static_cast<int>(kv.get_int("encoder.n_input", 300));

        c.kmeans.k = static_cast<int>(kv.get_int("kmeans.k", 3));
        c.kmeans.iterations = static_cast<int>(kv.get_int("kmeans.iterations", 10));
        const std::string init = kv.get_string("kmeans.init", "first_k");
        if (init == "first_k")
            c.kmeans.init = KMeansInit::first_k;
        else if (init == "seeded_random")
            c.kmeans.init = KMeansInit::seeded_random;
        else
            throw ConfigError("kmeans.init must be 'first_k' or 'seeded_random', got '" + init + "'");

        c.train_fraction = kv.get_double("split.train_fraction", 0.5);
        if (!(c.train_fraction > 0.0) || !(c.train_fraction < 1.0))
            throw ConfigError("split.train_fraction must be in (0, 1)");

        c.snn.n_input = c.encoder.n_input;
        c.snn.n_output = c.kmeans.k;
        c.snn.leak = static_cast<int>(kv.get_int("snn.leak", 1));
        c.snn.thr1 = static_cast<int>(kv.get_int("snn.thr1", 15));
        c.snn.thr2 = static_cast<int>(kv.get_int("snn.thr2", 45));
        c.snn.batch_per_class = static_cast<int>(kv.get_int("snn.batch_per_class", 5));
        c.snn.p_up = kv.get_double_list("snn.p_up", {0.08, 0.06, 0.04, 0.02, 0.00});
        c.snn.p_dn = kv.get_double_list("snn.p_dn", {0.00, 0.00, 0.00, 0.00, 0.08});
        c.snn.reduce_factor = kv.get_double("snn.reduce_factor", 0.25);
        c.snn.restarts = static_cast<int>(kv.get_int("snn.restarts", 10));
        c.snn.train_count = static_cast<int>(kv.get_int("snn.train_count", 1500));
        c.snn.reset_every_input = kv.get_bool("snn.reset_every_input", false);

        c.crossbar.rows = c.encoder.n_input;
        c.crossbar.cols = c.kmeans.k + 1;
        c.crossbar.g_on = kv.get_double("crossbar.g_on", 1e-4);
        c.crossbar.g_off = kv.get_double("crossbar.g_off", 1e-6);
        c.crossbar.g_p = kv.get_double("crossbar.g_p", 0.5);
        c.crossbar.g_t = kv.get_double("crossbar.g_t", 1e-4);
        c.crossbar.i_in_on = kv.get_double("crossbar.i_in_on", 3e-7);
        c.crossbar.i_in_off = kv.get_double("crossbar.i_in_off", 0.0);
        c.crossbar.v_dd = kv.get_double("crossbar.v_dd", 1.2);
        c.crossbar.delta_v_max = kv.get_double("crossbar.delta_v_max", 0.2);
        c.crossbar.t_on = kv.get_double("crossbar.t_on", 5e-8);
        c.crossbar.t_data = kv.get_double("crossbar.t_data", 5e-6);

        c.power_n_column = kv.get_double("power.n_column", 3.0);

        c.sweep.levels = kv.get_double_list("sweep.levels", {0.0, 0.1, 0.3, 0.5, 1.0, 2.0});
        c.sweep.trials_per_level = static_cast<int>(kv.get_int("sweep.trials", 20));
        c.sweep.mode = variation_mode_from_string(kv.get_string("sweep.mode", "uniform"));
        c.sweep.correlated = kv.get_bool("sweep.correlated", false);
        c.sweep.seed = kv.get_u64("sweep.seed", RngStream(c.seed).split(4).seed());

        c.adapt.percentile = kv.get_double("adapt.percentile", 95.0);
        c.adapt.window = static_cast<int>(kv.get_int("adapt.window", 100));
        c.adapt.trigger_fraction = kv.get_double("adapt.trigger_fraction", 0.2);
        c.adapt_phase1 = static_cast<int>(kv.get_int("adapt.phase1", 200));
        c.adapt_phase2 = static_cast<int>(kv.get_int("adapt.phase2", 200));
        c.adapt_novel_class = static_cast<int>(kv.get_int("adapt.novel_class", 3));

        c.trainsize_fractions = kv.get_double_list("trainsize.fractions", {0.25, 0.5, 0.75, 1.0});
        c.restarts_small = static_cast<int>(kv.get_int("restarts.small", 10));
        c.restarts_large = static_cast<int>(kv.get_int("restarts.large", 100));
        c.dump_weights_path = kv.get_string("dump.weights", "");

        c.validate();
        return c;
    }

    void validate() const {
        detector.validate();
        encoder.validate();
        kmeans.validate();
        snn.validate();
        crossbar.validate();
        sweep.validate();
        adapt.validate();
        if (source == "file" && input_path.empty()) throw ConfigError("source=file requires input.path");
        if (source == "synth") {
            if (synth.classes < 2 || synth.classes > kNumTemplates)
                throw ConfigError("synth.classes must be in [2, " + std::to_string(kNumTemplates) + "]");
            if (synth.spikes_per_class < 1) throw ConfigError("synth.spikes_per_class must be >= 1");
            if (synth.noise_sigma < 0.0) throw ConfigError("synth.noise_sigma must be >= 0");
        }
        if (detector.window_len % encoder.m != 0)
            throw ConfigError("detector.window_len must be a multiple of encoder.m");
        if (adapt_phase1 < 1 || adapt_phase2 < 1) throw ConfigError("adapt phase sizes must be >= 1");
        if (adapt_novel_class < 0 || adapt_novel_class >= kNumTemplates)
            throw ConfigError("adapt.novel_class must name a generator template");
        for (double f : trainsize_fractions)
            if (!(f > 0.0) || f > 1.0) throw ConfigError("trainsize.fractions must be in (0, 1]");
        if (restarts_small < 1 || restarts_large < restarts_small)
            throw ConfigError("need restarts.large >= restarts.small >= 1");
        if (!(power_n_column > 0.0)) throw ConfigError("power.n_column must be positive");
    }
};

struct Dataset {
    EncoderConfig encoder;  // calibrated copy used for all encoding
    KMeansModel kmeans;
    std::vector<NSpike> train, test;         // class_id = cluster label
    std::vector<int> train_truth, test_truth;  // generator class, -1 if unmatched
    std::vector<std::size_t> train_onsets, test_onsets;
    std::vector<int> cluster_to_truth;  // majority generator class per cluster, -1 if unknown
    std::size_t n_detected = 0;
};

inline std::vector<std::vector<std::uint8_t>> spike_trains(const std::vector<NSpike>& v) {
    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(s.spike_train);
    return out;
}

inline std::vector<std::vector<std::uint32_t>> digitized_spikes(const std::vector<NSpike>& v) {
    std::vector<std::vector<std::uint32_t>> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(s.digitized);
    return out;
}

inline std::vector<int> spike_labels(const std::vector<NSpike>& v) {
    std::vector<int> out;
    out.reserve(v.size());
    for (const auto& s : v) {
        if (!s.class_id) throw DataError("spike_labels: unlabeled spike");
        out.push_back(*s.class_id);
    }
    return out;
}

// Groups training spike trains by assigned label into the per-class lists the
// trainer consumes.
inline std::vector<std::vector<std::vector<std::uint8_t>>> class_splits(const std::vector<NSpike>& v, int k) {
    std::vector<std::vector<std::vector<std::uint8_t>>> splits(static_cast<std::size_t>(k));
    for (const auto& s : v) {
        if (!s.class_id || *s.class_id < 0 || *s.class_id >= k)
            throw DataError("class_splits: spike label out of range");
        splits[static_cast<std::size_t>(*s.class_id)].push_back(s.spike_train);
    }
    for (std::size_t c = 0; c < splits.size(); ++c)
        if (splits[c].empty())
            throw DataError("class_splits: cluster " + std::to_string(c) + " received no training spikes");
    return splits;
}

namespace detail {

// Nearest ground-truth label within half a window of the detected onset.
inline int match_truth(const std::vector<SpikeLabel>& labels, std::size_t onset, int window_len) {
    if (labels.empty()) return -1;
    int best = -1;
    long long best_gap = 0;
    for (const auto& l : labels) {  // labels are sorted; linear scan is fine at these sizes
        const long long gap = std::llabs(static_cast<long long>(l.index) - static_cast<long long>(onset));
        if (best < 0 || gap < best_gap) {
            best_gap = gap;
            best = l.class_id;
        }
    }
    return best_gap <= window_len / 2 ? best : -1;
}

inline std::vector<NSpike> encode_windows(const NeuralTrace& trace, const std::vector<std::size_t>& onsets,
                                          const EncoderConfig& enc, int window_len,
                                          std::vector<int>* truth_out) {
    std::vector<NSpike> spikes;
    spikes.reserve(onsets.size());
    for (const auto onset : onsets) {
        const std::span<const double> window(trace.samples.data() + onset, static_cast<std::size_t>(window_len));
        spikes.push_back(encode_nspike(window, enc));
        if (truth_out) truth_out->push_back(match_truth(trace.labels, onset, window_len));
    }
    return spikes;
}

}  // namespace detail

// Front half of the system: acquire the trace, detect spikes, encode them
// both ways, split train/test chronologically, cluster the training half, and
// label every spike with its cluster.
inline Dataset prepare_dataset(const RunConfig& cfg) {
    const RngStream root(cfg.seed);
    NeuralTrace trace;
    if (cfg.source == "synth") {
        trace = synth_trace(cfg.synth.classes, cfg.synth.spikes_per_class, cfg.synth.noise_sigma,
                            root.split(1).seed());
    } else {
        trace = load_trace(cfg.input_path, cfg.input_format, cfg.sample_rate);
    }

    const std::vector<std::size_t> onsets = detect(trace, cfg.detector);
    if (onsets.empty()) throw DataError("no spikes detected in input trace");

    Dataset ds;
    ds.encoder = calibrate(cfg.encoder, trace);
    ds.n_detected = onsets.size();

    std::vector<int> truth;
    std::vector<NSpike> all = detail::encode_windows(trace, onsets, ds.encoder, cfg.detector.window_len, &truth);

    const auto n_train = static_cast<std::size_t>(
        std::llround(cfg.train_fraction * static_cast<double>(all.size())));
    if (n_train == 0 || n_train >= all.size())
        throw DataError("split leaves an empty train or test set (" + std::to_string(all.size()) + " spikes)");

    ds.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.test.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());
    ds.train_truth.assign(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.test_truth.assign(truth.begin() + static_cast<std::ptrdiff_t>(n_train), truth.end());
    ds.train_onsets.assign(onsets.begin(), onsets.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.test_onsets.assign(onsets.begin() + static_cast<std::ptrdiff_t>(n_train), onsets.end());

    ds.kmeans = kmeans_fit(digitized_spikes(ds.train), cfg.kmeans, root.split(2).seed());
    for (auto& s : ds.train) s.class_id = kmeans_assign(ds.kmeans, s.digitized);
    for (auto& s : ds.test) s.class_id = kmeans_assign(ds.kmeans, s.digitized);

    // Majority generator class per cluster, for reporting accuracy against
    // the synthetic ground truth.
    ds.cluster_to_truth.assign(static_cast<std::size_t>(cfg.kmeans.k), -1);
    std::vector<std::vector<std::size_t>> votes(
        static_cast<std::size_t>(cfg.kmeans.k), std::vector<std::size_t>(static_cast<std::size_t>(kNumTemplates), 0));
    for (std::size_t i = 0; i < ds.train.size(); ++i)
        if (ds.train_truth[i] >= 0) ++votes[static_cast<std::size_t>(*ds.train[i].class_id)][static_cast<std::size_t>(ds.train_truth[i])];
    for (int c = 0; c < cfg.kmeans.k; ++c) {
        std::size_t best = 0;
        for (int t = 0; t < kNumTemplates; ++t)
            if (votes[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)] > best) {
                best = votes[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
                ds.cluster_to_truth[static_cast<std::size_t>(c)] = t;
            }
    }
    return ds;
}

struct PipelineSummary {
    std::size_t n_detected = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double snn_best_eval_accuracy = 0.0;   // restart-selection accuracy (train set)
    double digital_train_accuracy = 0.0;   // vs cluster labels
    double digital_test_accuracy = 0.0;
    double crossbar_test_accuracy = 0.0;
    double agreement = 0.0;                // crossbar vs digital on test spikes
    double truth_test_accuracy = -1.0;     // vs generator truth via cluster mapping
    double power_w = 0.0;
};

// Full chain: dataset -> cluster labels -> trained binary weights -> both
// classifier back-ends on the held-out half, plus the average power figure.
inline PipelineSummary run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const RngStream root(cfg.seed);
    const Dataset ds = prepare_dataset(cfg);

    const auto splits = class_splits(ds.train, cfg.kmeans.k);
    const auto train_trains = spike_trains(ds.train);
    const auto train_labels = spike_labels(ds.train);
    const auto test_trains = spike_trains(ds.test);
    const auto test_labels = spike_labels(ds.test);

    const TrainResult best = train_best_of(splits, cfg.snn, root.split(3).seed(), train_trains, train_labels);

    PipelineSummary s;
    s.n_detected = ds.n_detected;
    s.n_train = ds.train.size();
    s.n_test = ds.test.size();
    s.snn_best_eval_accuracy = best.accuracy;
    s.digital_train_accuracy = digital_accuracy(best.weights, train_trains, train_labels);
    s.digital_test_accuracy = digital_accuracy(best.weights, test_trains, test_labels);

    const CrossbarSolver solver(cfg.crossbar, best.weights);
    CsvTable spikes_csv;
    spikes_csv.columns = {"index", "onset", "truth", "cluster", "digital", "crossbar"};
    ConfusionMatrix confusion(cfg.kmeans.k);
    std::size_t cb_hits = 0, agree = 0, truth_hits = 0, truth_total = 0;
    for (std::size_t i = 0; i < ds.test.size(); ++i) {
        const auto& spike = ds.test[i];
        const int digital = classify_digital(best.weights, spike.spike_train).class_id;
        const int crossbar = classify_crossbar(solver, spike.spike_train).class_id;
        const int cluster = *spike.class_id;
        if (crossbar == cluster) ++cb_hits;
        if (crossbar == digital) ++agree;
        confusion.add(cluster, digital);
        if (ds.test_truth[i] >= 0) {
            ++truth_total;
            if (ds.cluster_to_truth[static_cast<std::size_t>(digital)] == ds.test_truth[i]) ++truth_hits;
        }
        spikes_csv.add_row(i, ds.test_onsets[i], ds.test_truth[i], cluster, digital, crossbar);
    }
    s.crossbar_test_accuracy = static_cast<double>(cb_hits) / static_cast<double>(ds.test.size());
    s.agreement = static_cast<double>(agree) / static_cast<double>(ds.test.size());
    if (truth_total > 0) s.truth_test_accuracy = static_cast<double>(truth_hits) / static_cast<double>(truth_total);

    PowerParams power;
    power.i_synapse = cfg.crossbar.i_in_on;
    power.n_column = cfg.power_n_column;
    power.v_dd = cfg.crossbar.v_dd;
    power.beta = cfg.crossbar.t_on / cfg.crossbar.t_data;
    s.power_w = average_power(power);

    write_csv(spikes_csv, out_dir / "spikes.csv", cfg.config_hash, cfg.seed);

    CsvTable summary;
    summary.columns = {"metric", "value"};
    summary.add_row(std::string("n_detected"), s.n_detected);
    summary.add_row(std::string("n_train"), s.n_train);
    summary.add_row(std::string("n_test"), s.n_test);
    summary.add_row(std::string("snn_best_eval_accuracy"), s.snn_best_eval_accuracy);
    summary.add_row(std::string("digital_train_accuracy"), s.digital_train_accuracy);
    summary.add_row(std::string("digital_test_accuracy"), s.digital_test_accuracy);
    summary.add_row(std::string("crossbar_test_accuracy"), s.crossbar_test_accuracy);
    summary.add_row(std::string("crossbar_digital_agreement"), s.agreement);
    summary.add_row(std::string("truth_test_accuracy"), s.truth_test_accuracy);
    summary.add_row(std::string("power_avg_w"), s.power_w);
    write_csv(summary, out_dir / "summary.csv", cfg.config_hash, cfg.seed);

    CsvTable conf_csv;
    conf_csv.columns = {"cluster"};
    for (int j = 0; j < cfg.kmeans.k; ++j) conf_csv.columns.push_back("digital_" + std::to_string(j));
    for (int t = 0; t < cfg.kmeans.k; ++t) {
        std::vector<std::string> row{csv_cell(t)};
        for (int j = 0; j < cfg.kmeans.k; ++j) row.push_back(csv_cell(confusion.at(t, j)));
        conf_csv.rows.push_back(std::move(row));
    }
    write_csv(conf_csv, out_dir / "confusion.csv", cfg.config_hash, cfg.seed);

    save_weights(best.weights, out_dir / "weights.txt");
    save_kmeans_csv(ds.kmeans, out_dir / "kmeans_means.csv");
    return s;
}

struct TrainSizeRow {
    double fraction = 0.0;
    int train_count = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

// Accuracy as a function of how many presentations the trainer consumes.
inline std::vector<TrainSizeRow> run_train_size_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const RngStream root(cfg.seed);
    const Dataset ds = prepare_dataset(cfg);
    const auto splits = class_splits(ds.train, cfg.kmeans.k);
    const auto train_trains = spike_trains(ds.train);
    const auto train_labels = spike_labels(ds.train);
    const auto test_trains = spike_trains(ds.test);
    const auto test_labels = spike_labels(ds.test);

    std::vector<TrainSizeRow> rows;
    CsvTable csv;
    csv.columns = {"fraction", "train_count", "train_accuracy", "test_accuracy"};
    for (std::size_t gi = 0; gi < cfg.trainsize_fractions.size(); ++gi) {
        const double frac = cfg.trainsize_fractions[gi];
        SnnTrainConfig snn = cfg.snn;
        snn.train_count = std::max(1, static_cast<int>(std::llround(frac * cfg.snn.train_count)));
        const TrainResult best =
            train_best_of(splits, snn, root.split(3).split(gi).seed(), train_trains, train_labels);
        TrainSizeRow row;
        row.fraction = frac;
        row.train_count = snn.train_count;
        row.train_accuracy = digital_accuracy(best.weights, train_trains, train_labels);
        row.test_accuracy = digital_accuracy(best.weights, test_trains, test_labels);
        rows.push_back(row);
        csv.add_row(row.fraction, row.train_count, row.train_accuracy, row.test_accuracy);
    }
    write_csv(csv, out_dir / "train_size.csv", cfg.config_hash, cfg.seed);
    return rows;
}

struct RestartHistogramSummary {
    double max_small = 0.0;
    double max_large = 0.0;
    std::vector<double> runs_small, runs_large;
};

// Per-restart test accuracies for a small and a large restart budget, to show
// how little the achievable maximum moves between them.
inline RestartHistogramSummary run_restart_histogram(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const RngStream root(cfg.seed);
    const Dataset ds = prepare_dataset(cfg);
    const auto splits = class_splits(ds.train, cfg.kmeans.k);
    const auto test_trains = spike_trains(ds.test);
    const auto test_labels = spike_labels(ds.test);

    RestartHistogramSummary s;
    SnnTrainConfig snn = cfg.snn;
    snn.restarts = cfg.restarts_large;
    const TrainResult large = train_best_of(splits, snn, root.split(3).seed(), test_trains, test_labels);
    s.runs_large = large.run_accuracies;
    s.max_large = large.accuracy;
    // The small budget replays the first runs of the large one (shared seed
    // derivation), matching how a shorter experiment would have gone.
    s.runs_small.assign(large.run_accuracies.begin(),
                        large.run_accuracies.begin() + cfg.restarts_small);
    s.max_small = *std::max_element(s.runs_small.begin(), s.runs_small.end());

    CsvTable small_csv, large_csv, summary;
    small_csv.columns = large_csv.columns = {"run", "accuracy"};
    for (std::size_t i = 0; i < s.runs_small.size(); ++i) small_csv.add_row(i, s.runs_small[i]);
    for (std::size_t i = 0; i < s.runs_large.size(); ++i) large_csv.add_row(i, s.runs_large[i]);
    summary.columns = {"metric", "value"};
    summary.add_row(std::string("max_small"), s.max_small);
    summary.add_row(std::string("max_large"), s.max_large);
    summary.add_row(std::string("difference"), s.max_large - s.max_small);
    write_csv(small_csv, out_dir / "restart_runs_small.csv", cfg.config_hash, cfg.seed);
    write_csv(large_csv, out_dir / "restart_runs_large.csv", cfg.config_hash, cfg.seed);
    write_csv(summary, out_dir / "restart_summary.csv", cfg.config_hash, cfg.seed);
    return s;
}

// Robustness sweep of the analog classifier against junction variation.
inline std::vector<SweepRow> run_variation_cmd(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const RngStream root(cfg.seed);
    const Dataset ds = prepare_dataset(cfg);
    const auto splits = class_splits(ds.train, cfg.kmeans.k);
    const auto train_trains = spike_trains(ds.train);
    const auto train_labels = spike_labels(ds.train);
    const TrainResult best = train_best_of(splits, cfg.snn, root.split(3).seed(), train_trains, train_labels);

    const auto rows = run_variation_sweep(cfg.crossbar, best.weights, cfg.sweep, spike_trains(ds.test),
                                          spike_labels(ds.test));
    CsvTable csv;
    csv.columns = {"level", "mean_accuracy", "std_accuracy", "trials"};
    for (const auto& r : rows) csv.add_row(r.level, r.mean_accuracy, r.std_accuracy, r.trials);
    write_csv(csv, out_dir / "sweep.csv", cfg.config_hash, cfg.seed);

    PowerParams power;
    power.i_synapse = cfg.crossbar.i_in_on;
    power.n_column = cfg.power_n_column;
    power.v_dd = cfg.crossbar.v_dd;
    power.beta = cfg.crossbar.t_on / cfg.crossbar.t_data;
    CsvTable summary;
    summary.columns = {"metric", "value"};
    summary.add_row(std::string("power_avg_w"), average_power(power));
    write_csv(summary, out_dir / "sweep_summary.csv", cfg.config_hash, cfg.seed);
    return rows;
}

struct AdaptSummary {
    int phase1_triggers = 0;
    int phase2_triggers = 0;
    double pre_mean_novel_distance = 0.0;
    double post_mean_novel_distance = 0.0;
    int retrains = 0;
};

// Two-phase drift scenario: stream in-distribution spikes, then spikes from a
// template the clusterer never saw. Each trigger retrains the clusterer on
// the original training spikes plus the recent window and rebuilds the
// threshold.
inline AdaptSummary run_adapt_cmd(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const RngStream root(cfg.seed);
    const Dataset ds = prepare_dataset(cfg);
    const auto train_dig = digitized_spikes(ds.train);

    KMeansModel model = ds.kmeans;
    AdaptationState state = build_threshold(model, train_dig, cfg.adapt);

    // Phase 1 observations come from the held-out half of the training trace.
    std::vector<std::vector<std::uint32_t>> phase1 = digitized_spikes(ds.test);
    if (static_cast<int>(phase1.size()) > cfg.adapt_phase1)
        phase1.resize(static_cast<std::size_t>(cfg.adapt_phase1));

    // Phase 2 observations come from a fresh trace of the novel template,
    // encoded with the calibration of the original recording.
    std::vector<int> novel_ids(static_cast<std::size_t>(cfg.adapt_phase2), cfg.adapt_novel_class);
    const NeuralTrace novel_trace =
        synth_spike_sequence(novel_ids, cfg.synth.noise_sigma, root.split(6).seed());
    const auto novel_onsets = detect(novel_trace, cfg.detector);
    if (novel_onsets.empty()) throw DataError("no spikes detected in novel-phase trace");
    std::vector<NSpike> novel =
        detail::encode_windows(novel_trace, novel_onsets, ds.encoder, cfg.detector.window_len, nullptr);
    const auto novel_dig = digitized_spikes(novel);

    double pre_sum = 0.0;
    for (const auto& x : novel_dig)
        pre_sum += static_cast<double>(
            sad_distance(x, model.means[static_cast<std::size_t>(kmeans_assign(model, x))]));

    AdaptSummary s;
    CsvTable trace_csv;
    trace_csv.columns = {"index", "phase", "cluster", "distance", "threshold", "exceeded", "triggered"};
    std::deque<std::vector<std::uint32_t>> recent;
    std::size_t index = 0;
    const auto feed = [&](const std::vector<std::uint32_t>& x, int phase) {
        recent.push_back(x);
        if (recent.size() > static_cast<std::size_t>(cfg.adapt.window)) recent.pop_front();
        const ObserveResult r = observe(state, model, x, cfg.adapt);
        trace_csv.add_row(index++, phase, r.class_id, r.distance, state.threshold, r.exceeded ? 1 : 0,
                          r.retrain_needed ? 1 : 0);
        if (phase == 1 && r.retrain_needed) ++s.phase1_triggers;
        if (phase == 2 && r.retrain_needed) ++s.phase2_triggers;
        if (r.retrain_needed) {
            ++s.retrains;
            std::vector<std::vector<std::uint32_t>> refit = train_dig;
            refit.insert(refit.end(), recent.begin(), recent.end());
            model = kmeans_fit(refit, cfg.kmeans, root.split(2).split(static_cast<std::uint64_t>(s.retrains)).seed());
            state = build_threshold(model, refit, cfg.adapt);
        }
    };
    for (const auto& x : phase1) feed(x, 1);
    for (const auto& x : novel_dig) feed(x, 2);

    double post_sum = 0.0;
    for (const auto& x : novel_dig)
        post_sum += static_cast<double>(
            sad_distance(x, model.means[static_cast<std::size_t>(kmeans_assign(model, x))]));
    s.pre_mean_novel_distance = pre_sum / static_cast<double>(novel_dig.size());
    s.post_mean_novel_distance = post_sum / static_cast<double>(novel_dig.size());

    write_csv(trace_csv, out_dir / "adapt_trace.csv", cfg.config_hash, cfg.seed);
    CsvTable summary;
    summary.columns = {"metric", "value"};
    summary.add_row(std::string("phase1_triggers"), s.phase1_triggers);
    summary.add_row(std::string("phase2_triggers"), s.phase2_triggers);
    summary.add_row(std::string("retrains"), s.retrains);
    summary.add_row(std::string("pre_mean_novel_distance"), s.pre_mean_novel_distance);
    summary.add_row(std::string("post_mean_novel_distance"), s.post_mean_novel_distance);
    write_csv(summary, out_dir / "adapt_summary.csv", cfg.config_hash, cfg.seed);
    return s;
}

inline double run_power_cmd(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    PowerParams power;
    power.i_synapse = cfg.crossbar.i_in_on;
    power.n_column = cfg.power_n_column;
    power.v_dd = cfg.crossbar.v_dd;
    power.beta = cfg.crossbar.t_on / cfg.crossbar.t_data;
    const double w = average_power(power);
    CsvTable csv;
    csv.columns = {"i_synapse_a", "n_column", "v_dd_v", "beta", "power_avg_w"};
    csv.add_row(power.i_synapse, power.n_column, power.v_dd, power.beta, w);
    write_csv(csv, out_dir / "power.csv", cfg.config_hash, cfg.seed);
    return w;
}

// Dumps the assembled conductance system for one injection pattern. Weights
// come from dump.weights when given, otherwise a seeded random matrix; the
// injection drives every row.
inline void run_dump_matrix(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    WeightMatrix w;
    if (!cfg.dump_weights_path.empty()) {
        w = load_weights(cfg.dump_weights_path);
    } else {
        RngStream rng(RngStream(cfg.seed).split(5).seed());
        w = random_weights(cfg.crossbar.rows, cfg.crossbar.cols - 1, rng);
    }
    const std::vector<std::uint8_t> spike(static_cast<std::size_t>(cfg.crossbar.rows), 1);
    const ConductanceSystem sys = build_system(cfg.crossbar, w, spike);
    write_matrix_market(sys, out_dir / "system.mtx");
    write_vector_market(sys.current, out_dir / "system_rhs.mtx");
}

}  // namespace neurosort
