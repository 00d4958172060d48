#include "ecgopt/commands.hpp"

#include <fcntl.h>
#include <omp.h>
#include <signal.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "ecgopt/kernels.hpp"
#include "ecgopt/metrics.hpp"
#include "ecgopt/network.hpp"
#include "ecgopt/train.hpp"

namespace fs = std::filesystem;

namespace ecgopt {

namespace {

// One experiment process per output directory. The lock file carries the
// owning pid; a lock whose pid is gone is treated as stale and reclaimed.
class OutDirLock {
public:
    explicit OutDirLock(const fs::path& out_dir) : path_(out_dir / ".ecgopt.lock") {
        fs::create_directories(out_dir);
        for (int attempt = 0; attempt < 2; ++attempt) {
            const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
            if (fd >= 0) {
                const std::string pid = std::to_string(::getpid()) + "\n";
                (void)!::write(fd, pid.data(), pid.size());
                ::close(fd);
                held_ = true;
                return;
            }
            std::ifstream f(path_);
            long long pid = 0;
            if (f >> pid; pid > 0 && ::kill(static_cast<pid_t>(pid), 0) == 0)
                throw StateError("output directory is locked by running process " +
                                 std::to_string(pid) + " (" + path_.string() + ")");
            std::error_code ec;
            fs::remove(path_, ec); // stale lock
        }
        throw StateError("could not acquire output lock " + path_.string());
    }
    ~OutDirLock() {
        if (held_) {
            std::error_code ec;
            fs::remove(path_, ec);
        }
    }
    OutDirLock(const OutDirLock&) = delete;
    OutDirLock& operator=(const OutDirLock&) = delete;

private:
    fs::path path_;
    bool held_ = false;
};

void apply_engine_settings(const ExperimentConfig& cfg) {
    kernels::set_parallel(cfg.parallel_kernels);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw DataError("failed writing '" + path.string() + "'");
}

nlohmann::json class_counts(const std::vector<BeatSegment>& segments, const ClassSet& classes) {
    std::vector<long long> counts(classes.size(), 0);
    for (const auto& s : segments) ++counts[s.label];
    nlohmann::json j;
    for (int c = 0; c < classes.size(); ++c) j[classes.names()[c]] = counts[c];
    return j;
}

struct PreparedData {
    LabeledSet train, validation, test;
};

PreparedData load_prepared(const ExperimentConfig& cfg, const ClassSet& classes) {
    const fs::path out(cfg.out_dir);
    std::vector<std::string> missing;
    for (const char* name : {"train.csv", "val.csv", "test.csv"})
        if (!fs::exists(out / name)) missing.push_back((out / name).string());
    if (!missing.empty()) {
        std::string msg = "prepared dataset missing (run prepare first):";
        for (const auto& m : missing) msg += " " + m;
        throw DataError(msg);
    }
    PreparedData d;
    d.train = to_labeled_set(load_segments_csv((out / "train.csv").string(), classes));
    d.validation = to_labeled_set(load_segments_csv((out / "val.csv").string(), classes));
    d.test = to_labeled_set(load_segments_csv((out / "test.csv").string(), classes));
    return d;
}

TrainOptions train_options(const ExperimentConfig& cfg, const HyperParams& h,
                           std::uint64_t trial_seed) {
    TrainOptions opts;
    opts.max_epochs = cfg.train.max_epochs;
    opts.patience = cfg.train.patience;
    opts.batch_size = cfg.train.batch_size;
    opts.adam.learning_rate = h.learning_rate;
    opts.adam.decay = h.adam_decay;
    opts.seed = derive_seed(trial_seed, "sgd");
    return opts;
}

// Rows keyed by method in the fixed Table-2 order.
void upsert_comparison_row(const fs::path& csv, const std::string& method,
                           const SummaryMetrics& m) {
    std::map<std::string, std::string> rows;
    if (fs::exists(csv)) {
        std::ifstream f(csv);
        std::string line;
        std::getline(f, line); // header
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            rows[line.substr(0, line.find(','))] = line;
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g", method.c_str(), m.macro_precision,
                  m.macro_recall, m.macro_f1);
    rows[method] = buf;
    std::ostringstream out;
    out << "method,precision,recall,f1\n";
    for (const char* name : {"without_optimisation", "with_bayesian", "with_pso"})
        if (auto it = rows.find(name); it != rows.end()) out << it->second << '\n';
    write_text(csv, out.str());
}

SummaryMetrics evaluate_to_files(Network& net, const LabeledSet& set, const ClassSet& classes,
                                 const fs::path& metrics_csv, const fs::path& confusion_csv) {
    const std::vector<int> pred = predict_labels(net, set);
    const ConfusionMatrix cm = confusion(set.labels, pred, classes.names());
    write_metrics_csv(cm, metrics_csv.string());
    write_confusion_csv(cm, confusion_csv.string());
    return summarize(cm);
}

std::uint64_t trial_seed_for(const ExperimentConfig& cfg, int index) {
    return derive_seed(cfg.seed, "trial", static_cast<std::uint64_t>(index));
}

} // namespace

void cmd_prepare(const ExperimentConfig& cfg) {
    OutDirLock lock(cfg.out_dir);
    apply_engine_settings(cfg);
    const ClassSet classes(cfg.data.classes);

    std::vector<BeatSegment> segments;
    if (cfg.data.format == "csv") {
        segments = load_segments_csv(cfg.data.csv_path, classes);
    } else {
        for (const auto& ref : cfg.data.records) {
            const Recording rec =
                read_wfdb212_recording(ref.signal_path, ref.name, ref.sample_count,
                                       ref.channel_count, ref.gain, ref.sampling_rate);
            const auto anns = read_annotations(ref.annotation_path);
            auto segs = segment_beats(rec, anns, cfg.data.window_length, classes);
            segments.insert(segments.end(), std::make_move_iterator(segs.begin()),
                            std::make_move_iterator(segs.end()));
        }
    }
    if (cfg.data.normalize)
        for (auto& s : segments) s = normalize_segment(std::move(s));

    SplitDataset ds = split(std::move(segments), cfg.data.train_fraction,
                            cfg.data.validation_fraction, cfg.data.test_fraction,
                            derive_seed(cfg.seed, "split"));

    const fs::path out(cfg.out_dir);
    save_segments_csv(ds.train, classes, (out / "train.csv").string());
    save_segments_csv(ds.validation, classes, (out / "val.csv").string());
    save_segments_csv(ds.test, classes, (out / "test.csv").string());

    nlohmann::json summary{
        {"window_length", ds.train.empty() ? cfg.data.window_length
                                           : static_cast<int>(ds.train[0].values.size())},
        {"total", ds.train.size() + ds.validation.size() + ds.test.size()},
        {"counts",
         {{"train", class_counts(ds.train, classes)},
          {"validation", class_counts(ds.validation, classes)},
          {"test", class_counts(ds.test, classes)}}}};
    write_text(out / "prepare_summary.json", summary.dump(2) + "\n");
    std::cout << "prepared " << summary["total"] << " segments -> " << ds.train.size() << "/"
              << ds.validation.size() << "/" << ds.test.size() << " train/val/test in "
              << out.string() << "\n";
}

void cmd_train(const ExperimentConfig& cfg, const std::optional<HyperParams>& h_opt) {
    OutDirLock lock(cfg.out_dir);
    apply_engine_settings(cfg);
    const ClassSet classes(cfg.data.classes);
    const PreparedData data = load_prepared(cfg, classes);
    const HyperParams h = h_opt.value_or(cfg.default_hyper_params);

    const ModelSpec spec =
        build_model(h, cfg.data.window_length, classes.size(), cfg.model, &cfg.space);
    // Seeded identically to the tuning loop's trial 0 so the baseline and the
    // default-point trial are the same training run.
    const std::uint64_t trial_seed = trial_seed_for(cfg, 0);
    Network net(spec, derive_seed(trial_seed, "init"));
    std::cout << describe_model(spec);

    const TrainResult result = train(net, data.train, data.validation,
                                     train_options(cfg, h, trial_seed));
    if (result.diverged)
        throw NumericalError("training diverged at epoch " +
                             std::to_string(result.history.stopped_epoch + 1));

    const fs::path out(cfg.out_dir);
    save_model(net, (out / "model.bin").string());
    write_history_csv(result.history, (out / "history.csv").string());
    const SummaryMetrics m =
        evaluate_to_files(net, data.test, classes, out / "metrics.csv", out / "confusion.csv");
    upsert_comparison_row(out / "comparison.csv", "without_optimisation", m);

    nlohmann::json summary{{"hyper_params", to_json(h)},
                           {"stopped_epoch", result.history.stopped_epoch},
                           {"best_epoch", result.best_epoch},
                           {"val_loss", result.best_val_loss},
                           {"val_accuracy", result.best_val_accuracy},
                           {"test_accuracy_percent", m.accuracy},
                           {"test_macro_precision", m.macro_precision},
                           {"test_macro_recall", m.macro_recall},
                           {"test_macro_f1", m.macro_f1}};
    write_text(out / "train_summary.json", summary.dump(2) + "\n");
    std::printf("trained %d epochs (best %d): val acc %.4f, test acc %.2f%%\n",
                result.history.stopped_epoch, result.best_epoch, result.best_val_accuracy,
                m.accuracy);
}

namespace {

std::vector<TrialRecord> load_trial_log(const fs::path& path) {
    std::vector<TrialRecord> out;
    if (!fs::exists(path)) return out;
    std::ifstream f(path);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    // A crash can leave a torn final line (no trailing newline); completed
    // lines are kept and the torn tail is dropped before appending resumes.
    std::vector<std::string> lines;
    std::size_t start = 0;
    bool torn_tail = false;
    while (start < content.size()) {
        const std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos) {
            torn_tail = true;
            break;
        }
        if (nl > start) lines.push_back(content.substr(start, nl - start));
        start = nl + 1;
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            out.push_back(trial_from_json(nlohmann::json::parse(lines[i])));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ": line " + std::to_string(i + 1) +
                            " is not a valid trial record: " + e.what());
        }
    }
    if (torn_tail) {
        std::ofstream rewrite(path, std::ios::trunc);
        for (const auto& l : lines) rewrite << l << '\n';
    }
    return out;
}

} // namespace

void cmd_tune(const ExperimentConfig& cfg, const std::string& method) {
    if (method != "bo" && method != "pso")
        throw ConfigError("tune method must be bo or pso, got '" + method + "'");
    OutDirLock lock(cfg.out_dir);
    apply_engine_settings(cfg);
    const ClassSet classes(cfg.data.classes);
    const PreparedData data = load_prepared(cfg, classes);

    const fs::path out(cfg.out_dir);
    const fs::path tune_dir = out / ("tune_" + method);
    fs::create_directories(tune_dir);
    const fs::path log_path = tune_dir / "trials.jsonl";
    const fs::path model_path = tune_dir / "best_model.bin";

    const std::vector<TrialRecord> resumed = load_trial_log(log_path);
    double best_objective = std::numeric_limits<double>::infinity();
    for (const auto& t : resumed) best_objective = std::min(best_objective, t.objective);

    std::ofstream log_file(log_path, std::ios::app);
    if (!log_file) throw DataError("cannot open '" + log_path.string() + "' for appending");

    const bool use_val_loss = cfg.fitness_metric == "val_loss";
    FitnessFn fitness = [&](const std::vector<double>&, const HyperParams& h,
                            std::uint64_t trial_seed, int) -> FitnessOutcome {
        const ModelSpec spec =
            build_model(h, cfg.data.window_length, classes.size(), cfg.model, &cfg.space);
        Network net(spec, derive_seed(trial_seed, "init"));
        const TrainResult result =
            train(net, data.train, data.validation, train_options(cfg, h, trial_seed));
        FitnessOutcome outcome;
        outcome.extra = {{"stopped_epoch", result.history.stopped_epoch},
                         {"best_epoch", result.best_epoch},
                         {"best_val_loss", result.best_val_loss},
                         {"best_val_accuracy", result.best_val_accuracy}};
        if (result.diverged) {
            outcome.failed = true;
            return outcome;
        }
        outcome.objective =
            use_val_loss ? result.best_val_loss : 1.0 - result.best_val_accuracy;
        if (outcome.objective < best_objective) {
            best_objective = outcome.objective;
            save_model(net, model_path.string());
            write_history_csv(result.history, (tune_dir / "best_history.csv").string());
        }
        return outcome;
    };

    TrialSink sink = [&](const TrialRecord& t) {
        log_file << trial_to_json(t).dump() << '\n';
        log_file.flush();
        std::printf("trial %d [%s]: objective %.6f%s\n", t.index, t.source.c_str(), t.objective,
                    t.failed ? " (failed)" : "");
    };

    OptimizeResult result;
    if (method == "bo") {
        BoConfig bo = cfg.bo;
        bo.seed = cfg.seed;
        bo.seed_point = cfg.space.encode(cfg.default_hyper_params);
        result = optimise(fitness, cfg.space, bo, resumed, sink);
    } else {
        PsoConfig pso = cfg.pso;
        pso.seed = cfg.seed;
        pso.seed_point = cfg.space.encode(cfg.default_hyper_params);
        result = pso_optimise(fitness, cfg.space, pso, resumed, sink);
    }

    nlohmann::json best{{"index", result.best.index},
                        {"source", result.best.source},
                        {"hyper_params", to_json(result.best.hyper_params)},
                        {"unit_point", result.best.unit_point},
                        {"objective", result.best.objective},
                        {"val_accuracy", result.best.val_accuracy}};
    write_text(tune_dir / "best.json", best.dump(2) + "\n");

    if (!fs::exists(model_path))
        throw DataError("every trial failed; no tuned model was produced");
    Network best_net = load_model(model_path.string());
    const SummaryMetrics m = evaluate_to_files(best_net, data.test, classes,
                                               tune_dir / "metrics.csv",
                                               tune_dir / "confusion.csv");
    upsert_comparison_row(out / "comparison.csv",
                          method == "bo" ? "with_bayesian" : "with_pso", m);
    std::printf("best trial %d: objective %.6f (val acc %.4f), test acc %.2f%%\n",
                result.best.index, result.best.objective, result.best.val_accuracy, m.accuracy);
}

void cmd_evaluate(const ExperimentConfig& cfg, const std::string& model_path,
                  const std::string& split) {
    OutDirLock lock(cfg.out_dir);
    apply_engine_settings(cfg);
    const ClassSet classes(cfg.data.classes);
    const PreparedData data = load_prepared(cfg, classes);
    const LabeledSet* set = nullptr;
    if (split == "train")
        set = &data.train;
    else if (split == "val" || split == "validation")
        set = &data.validation;
    else if (split == "test")
        set = &data.test;
    else
        throw ConfigError("split must be train, val or test, got '" + split + "'");

    const fs::path out(cfg.out_dir);
    const std::string model =
        model_path.empty() ? (out / "model.bin").string() : model_path;
    Network net = load_model(model);
    const SummaryMetrics m = evaluate_to_files(net, *set, classes, out / "evaluate_metrics.csv",
                                               out / "evaluate_confusion.csv");
    std::printf("%s: accuracy %.2f%%, macro precision %.2f%%, recall %.2f%%, f1 %.2f%%\n",
                split.c_str(), m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1);
}

namespace {

struct HistoryRow {
    int epoch;
    double train_loss, train_acc, val_loss, val_acc;
};

std::vector<HistoryRow> read_history_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(f, line);
    std::vector<HistoryRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        HistoryRow r;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf", &r.epoch, &r.train_loss, &r.train_acc,
                        &r.val_loss, &r.val_acc) != 5)
            throw DataError(path.string() + ": malformed history row '" + line + "'");
        rows.push_back(r);
    }
    return rows;
}

} // namespace

void cmd_report(const ExperimentConfig& cfg) {
    OutDirLock lock(cfg.out_dir);
    const fs::path out(cfg.out_dir);

    std::vector<fs::path> tune_logs;
    for (const char* method : {"bo", "pso"}) {
        const fs::path p = out / (std::string("tune_") + method) / "trials.jsonl";
        if (fs::exists(p)) tune_logs.push_back(p);
    }
    std::vector<std::string> missing;
    if (!fs::exists(out / "confusion.csv")) missing.push_back((out / "confusion.csv").string());
    if (!fs::exists(out / "history.csv")) missing.push_back((out / "history.csv").string());
    if (tune_logs.empty()) missing.push_back((out / "tune_{bo,pso}/trials.jsonl").string());
    if (!missing.empty()) {
        std::string msg = "report inputs missing:";
        for (const auto& m : missing) msg += " " + m;
        throw DataError(msg);
    }

    const fs::path report = out / "report";
    fs::create_directories(report);

    const ConfusionMatrix cm = read_confusion_csv((out / "confusion.csv").string());
    write_metrics_csv(cm, (report / "per_class_metrics.csv").string());
    write_normalized_confusion_csv(cm, (report / "confusion_normalized.csv").string());

    // headline numbers both ways: overall accuracy and the macro averages
    const SummaryMetrics s = summarize(cm);
    {
        char buf[256];
        std::ostringstream text;
        text << "metric,value\n";
        std::snprintf(buf, sizeof(buf), "accuracy,%.12g\nmacro_precision,%.12g\n", s.accuracy,
                      s.macro_precision);
        text << buf;
        std::snprintf(buf, sizeof(buf), "macro_recall,%.12g\nmacro_f1,%.12g\n", s.macro_recall,
                      s.macro_f1);
        text << buf;
        write_text(report / "summary.csv", text.str());
    }

    for (const auto& log_path : tune_logs) {
        const auto trials = load_trial_log(log_path);
        const std::string method = log_path.parent_path().filename().string().substr(5);
        std::ostringstream curve;
        curve << "trial,objective,best_objective\n";
        double best = std::numeric_limits<double>::infinity();
        char buf[96];
        for (const auto& t : trials) {
            best = std::min(best, t.objective);
            std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", t.index, t.objective, best);
            curve << buf;
        }
        write_text(report / ("best_so_far_" + method + ".csv"), curve.str());
    }

    const auto history = read_history_csv(out / "history.csv");
    {
        std::ostringstream acc, loss;
        acc << "epoch,train_acc,val_acc\n";
        loss << "epoch,train_loss,val_loss\n";
        char buf[96];
        for (const auto& r : history) {
            std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", r.epoch, r.train_acc, r.val_acc);
            acc << buf;
            std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", r.epoch, r.train_loss, r.val_loss);
            loss << buf;
        }
        write_text(report / "accuracy_curve.csv", acc.str());
        write_text(report / "loss_curve.csv", loss.str());
    }
    std::cout << "report written to " << report.string() << "\n";
}

} // namespace ecgopt
