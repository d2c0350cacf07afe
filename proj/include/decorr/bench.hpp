#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "decorr/autotune.hpp"
#include "decorr/dataset.hpp"
#include "decorr/detector.hpp"
#include "decorr/metrics.hpp"
#include "decorr/tuning.hpp"

// Benchmark driver: for each labeled dataset, produce one anomaly-score
// column (fixed config, per-dataset grid peak, tuned-on-subset, or the
// automated learning-rate variant), measure the wall-clock of score
// production alone, compute AUC, and normalize AUC across all methods
// present, including externally supplied score files.

namespace decorr {

enum class BenchMode { FixedConfig, GridPeak, Tuned, Auto };

inline const char* to_string(BenchMode mode) {
    switch (mode) {
    case BenchMode::FixedConfig: return "fixed";
    case BenchMode::GridPeak: return "grid_peak";
    case BenchMode::Tuned: return "tuned";
    case BenchMode::Auto: return "auto";
    }
    return "unknown";
}

struct BenchOptions {
    BenchMode mode = BenchMode::GridPeak;
    DetectorConfig fixed;                            // FixedConfig
    std::vector<DetectorConfig> grid = default_grid(); // GridPeak, Tuned
    std::vector<double> tune_ratios = default_ratios();
    int tune_bins = 20;
    std::uint64_t tune_seed = 0;
    AutoTuneConfig auto_config;                      // Auto
    int repeats = 1;
    int workers = 1;
};

/// dataset name -> method name -> per-row scores
using ExternalScores = std::map<std::string, std::map<std::string, std::vector<double>>>;

/// Reads an (index, score) CSV; indices must cover 0..n-1 exactly.
inline std::vector<double> read_score_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("'" + path.string() + "': empty file");
    std::vector<std::pair<long, double>> entries;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (line.empty())
            continue;
        const auto tokens = detail::split_csv(line);
        if (tokens.size() < 2)
            throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) +
                             ": expected index,score");
        const long idx = std::lround(detail::parse_double(tokens[0], line_no));
        entries.emplace_back(idx, detail::parse_double(tokens[1], line_no));
    }
    std::vector<double> scores(entries.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& [idx, score] : entries) {
        if (idx < 0 || idx >= static_cast<long>(scores.size()) ||
            !std::isnan(scores[static_cast<std::size_t>(idx)]))
            throw ParseError("'" + path.string() + "': indices must cover 0.." +
                             std::to_string(scores.size() - 1) + " exactly");
        scores[static_cast<std::size_t>(idx)] = score;
    }
    return scores;
}

/// Scans a directory for `<dataset>__<method>.csv` score files.
inline ExternalScores load_external_scores(const std::filesystem::path& dir) {
    ExternalScores out;
    if (dir.empty())
        return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv")
            continue;
        const std::string stem = entry.path().stem().string();
        const auto sep = stem.find("__");
        if (sep == std::string::npos || sep == 0 || sep + 2 >= stem.size())
            continue;
        out[stem.substr(0, sep)][stem.substr(sep + 2)] = read_score_csv(entry.path());
    }
    return out;
}

struct EvalRow {
    std::string dataset;
    std::string method;
    double auc = std::numeric_limits<double>::quiet_NaN();
    double normalized_pct = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> wall_seconds; // one entry per repeat; empty for external rows
    double wall_mean = std::numeric_limits<double>::quiet_NaN();
    DetectorConfig config;
    bool has_config = false;
    bool failed = false;
    std::string error;
};

struct DatasetEval {
    std::string dataset;
    std::vector<EvalRow> rows; // detector row first, then external methods
    RocResult roc;             // detector ROC curve, when the run succeeded
    bool has_roc = false;
    std::vector<GridEntry> sweep; // audit table (GridPeak and Tuned modes)
    double tuned_ratio = 0.0;     // Tuned mode bookkeeping
    double tuned_subset_auc = 0.0;
};

struct EvalReport {
    std::vector<DatasetEval> per_dataset;
    BenchMode mode = BenchMode::GridPeak;
    int repeats = 1;
    int workers = 1;
};

namespace detail {

struct TimedRun {
    std::vector<double> scores;
    std::vector<double> wall_seconds;
};

/// Streams every row through a fresh detector `repeats` times; the clock
/// covers score production only (the data is already in memory, metrics
/// come later). Scores are identical across repeats, so they are kept once.
template <typename MakeScorer>
TimedRun timed_stream(const LabeledDataset& ds, int repeats, MakeScorer make_scorer) {
    TimedRun run;
    for (int rep = 0; rep < repeats; ++rep) {
        auto scorer = make_scorer();
        std::vector<double> scores;
        scores.reserve(static_cast<std::size_t>(ds.rows()));
        const auto start = std::chrono::steady_clock::now();
        for (long i = 0; i < ds.rows(); ++i)
            scores.push_back(scorer(ds.data.row(i).transpose()));
        const auto stop = std::chrono::steady_clock::now();
        run.wall_seconds.push_back(std::chrono::duration<double>(stop - start).count());
        if (rep == 0)
            run.scores = std::move(scores);
    }
    return run;
}

inline DatasetEval evaluate_dataset(const LabeledDataset& ds, const BenchOptions& opt) {
    DatasetEval eval;
    eval.dataset = ds.name;
    EvalRow row;
    row.dataset = ds.name;
    row.method = "DAD";
    try {
        ds.validate();
        if (!ds.labeled())
            throw ValidationError("dataset '" + ds.name + "' has no label column");
        if (ds.anomaly_count() == 0 || ds.anomaly_count() == ds.rows())
            throw SingleClassError("dataset '" + ds.name + "' has a single class");

        DetectorConfig chosen = opt.fixed;
        bool use_auto = false;
        switch (opt.mode) {
        case BenchMode::FixedConfig:
            break;
        case BenchMode::GridPeak: {
            eval.sweep = sweep_grid(ds, opt.grid);
            const GridEntry* best = &eval.sweep.front();
            for (const auto& entry : eval.sweep)
                if (entry.auc > best->auc ||
                    (entry.auc == best->auc && config_preferred(entry.config, best->config)))
                    best = &entry;
            chosen = best->config;
            break;
        }
        case BenchMode::Tuned: {
            const SubsetSelection sel =
                select_subset(ds, opt.tune_ratios, opt.tune_bins, opt.tune_seed);
            const TuneResult tuned = grid_search(extract_rows(ds, sel.indices), opt.grid);
            eval.sweep = tuned.grid_results;
            eval.tuned_ratio = sel.ratio;
            eval.tuned_subset_auc = tuned.subset_auc;
            chosen = tuned.best_params;
            break;
        }
        case BenchMode::Auto:
            use_auto = true;
            break;
        }

        TimedRun run;
        if (use_auto) {
            run = timed_stream(ds, opt.repeats, [&] {
                return [auto_det = AutoDetector(opt.auto_config, ds.dims())](
                           const auto& x) mutable { return auto_det.process(x); };
            });
            // rebuild once more to report the selected learning rate
            AutoDetector probe(opt.auto_config, ds.dims());
            for (long i = 0; i < ds.rows() && probe.phase() == AutoDetector::Phase::BurnIn; ++i)
                probe.process(ds.data.row(i).transpose());
            if (probe.phase() == AutoDetector::Phase::Operating) {
                row.config = DetectorConfig{probe.chosen_eta(), opt.auto_config.gamma, 0};
                row.has_config = true;
            }
        } else {
            run = timed_stream(ds, opt.repeats, [&] {
                return [det = Detector(chosen, ds.dims())](const auto& x) mutable {
                    return det.process(x);
                };
            });
            row.config = chosen;
            row.has_config = true;
        }

        eval.roc = roc_auc(run.scores, ds.labels);
        eval.has_roc = true;
        row.auc = eval.roc.auc;
        row.wall_seconds = std::move(run.wall_seconds);
        double total = 0.0;
        for (double w : row.wall_seconds) total += w;
        row.wall_mean = total / static_cast<double>(row.wall_seconds.size());
    } catch (const Error& e) {
        row.failed = true;
        row.error = e.what();
    }
    eval.rows.push_back(std::move(row));
    return eval;
}

inline void add_external_rows(DatasetEval& eval, const LabeledDataset& ds,
                              const std::map<std::string, std::vector<double>>& methods) {
    for (const auto& [method, scores] : methods) {
        EvalRow row;
        row.dataset = ds.name;
        row.method = method;
        try {
            if (scores.size() != static_cast<std::size_t>(ds.rows()))
                throw DimensionError("external scores for '" + method + "' have " +
                                     std::to_string(scores.size()) + " rows, dataset has " +
                                     std::to_string(ds.rows()));
            row.auc = roc_auc(scores, ds.labels).auc;
        } catch (const Error& e) {
            row.failed = true;
            row.error = e.what();
        }
        eval.rows.push_back(std::move(row));
    }
}

inline void normalize_dataset(DatasetEval& eval) {
    std::map<std::string, double> aucs;
    for (const auto& row : eval.rows)
        if (!row.failed)
            aucs[row.method] = row.auc;
    if (aucs.empty())
        return;
    const auto pct = normalized_auc(aucs);
    for (auto& row : eval.rows)
        if (!row.failed)
            row.normalized_pct = pct.at(row.method);
}

} // namespace detail

inline EvalReport run_benchmark(const std::vector<LabeledDataset>& datasets,
                                const BenchOptions& opt,
                                const ExternalScores& external = {}) {
    if (opt.repeats < 1)
        throw ConfigError("run_benchmark: repeats must be >= 1");
    if (opt.workers < 1)
        throw ConfigError("run_benchmark: workers must be >= 1");
    EvalReport report;
    report.mode = opt.mode;
    report.repeats = opt.repeats;
    report.workers = opt.workers;
    report.per_dataset.resize(datasets.size());

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < datasets.size(); i = next.fetch_add(1))
            report.per_dataset[i] = detail::evaluate_dataset(datasets[i], opt);
    };
    if (opt.workers == 1 || datasets.size() <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        const std::size_t n =
            std::min<std::size_t>(static_cast<std::size_t>(opt.workers), datasets.size());
        for (std::size_t i = 0; i < n; ++i)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }

    for (std::size_t i = 0; i < datasets.size(); ++i) {
        if (auto it = external.find(datasets[i].name); it != external.end())
            detail::add_external_rows(report.per_dataset[i], datasets[i], it->second);
        detail::normalize_dataset(report.per_dataset[i]);
    }
    return report;
}

inline std::string report_csv(const EvalReport& report) {
    std::string out = "dataset,method,auc,normalized_auc";
    for (int r = 1; r <= report.repeats; ++r)
        out += ",wall_s_" + std::to_string(r);
    out += ",wall_s_mean,eta,gamma,window_p,error\n";
    const auto num = [](double v) {
        return std::isnan(v) ? std::string() : detail::format_double(v);
    };
    for (const auto& eval : report.per_dataset) {
        for (const auto& row : eval.rows) {
            out += row.dataset + ',' + row.method + ',' + num(row.auc) + ',' +
                   num(row.normalized_pct);
            for (int r = 0; r < report.repeats; ++r) {
                out += ',';
                if (static_cast<std::size_t>(r) < row.wall_seconds.size())
                    out += detail::format_double(row.wall_seconds[static_cast<std::size_t>(r)]);
            }
            out += ',' + num(row.wall_mean);
            if (row.has_config) {
                out += ',' + detail::format_double(row.config.eta) + ',' +
                       detail::format_double(row.config.gamma) + ',' +
                       std::to_string(row.config.window_p);
            } else {
                out += ",,,";
            }
            out += ',' + row.error + '\n';
        }
    }
    return out;
}

inline nlohmann::json config_json(const DetectorConfig& config) {
    return {{"eta", config.eta}, {"gamma", config.gamma}, {"window_p", config.window_p}};
}

inline nlohmann::json report_json(const EvalReport& report) {
    nlohmann::json j;
    j["mode"] = to_string(report.mode);
    j["repeats"] = report.repeats;
    j["workers"] = report.workers;
    j["datasets"] = nlohmann::json::array();
    for (const auto& eval : report.per_dataset) {
        nlohmann::json je;
        je["dataset"] = eval.dataset;
        je["rows"] = nlohmann::json::array();
        for (const auto& row : eval.rows) {
            nlohmann::json jr;
            jr["method"] = row.method;
            if (row.failed) {
                jr["error"] = row.error;
            } else {
                jr["auc"] = row.auc;
                jr["normalized_auc"] = row.normalized_pct;
                if (!row.wall_seconds.empty()) {
                    jr["wall_seconds"] = row.wall_seconds;
                    jr["wall_mean"] = row.wall_mean;
                }
                if (row.has_config)
                    jr["config"] = config_json(row.config);
            }
            je["rows"].push_back(std::move(jr));
        }
        if (!eval.sweep.empty()) {
            je["sweep"] = nlohmann::json::array();
            for (const auto& entry : eval.sweep)
                je["sweep"].push_back({{"config", config_json(entry.config)},
                                       {"auc", entry.auc},
                                       {"diverged", entry.diverged}});
        }
        if (report.mode == BenchMode::Tuned) {
            je["tuned_ratio"] = eval.tuned_ratio;
            je["tuned_subset_auc"] = eval.tuned_subset_auc;
        }
        j["datasets"].push_back(std::move(je));
    }
    return j;
}

inline std::string curve_csv(const RocResult& roc) {
    std::string out = "fpr,tpr\n";
    for (const auto& [fpr, tpr] : roc.curve)
        out += detail::format_double(fpr) + ',' + detail::format_double(tpr) + '\n';
    return out;
}

} // namespace decorr
