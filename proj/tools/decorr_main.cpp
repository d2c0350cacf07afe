// decorr: streaming decorrelation anomaly detection toolkit.
//
// Subcommands:
//   generate  synthetic benchmark datasets (single scenario or 20-scenario suite)
//   score     stream a CSV through the detector, one score per row
//   tune      representative-subset selection + grid search on a labeled CSV
//   bench     AUC / normalized-AUC / wall-clock report over a dataset directory
//   rerun     re-execute a command from its run manifest
//
// Exit codes: 0 ok, 2 input parse error, 3 divergence, 4 bad flags,
// 5 selection failure, 6 degenerate/single-class data, 1 other errors.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "decorr/autotune.hpp"
#include "decorr/bench.hpp"
#include "decorr/dataset.hpp"
#include "decorr/detector.hpp"
#include "decorr/metrics.hpp"
#include "decorr/synth.hpp"
#include "decorr/tuning.hpp"
#include "decorr/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::vector<std::string>& args); // forward, used by rerun

std::string default_out_dir() {
    const char* env = std::getenv("DECORR_OUT");
    return env ? env : "";
}

void write_text(const fs::path& path, const std::string& content) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    decorr::atomic_write(path, content);
}

void write_manifest(const fs::path& path, const std::string& command,
                    const std::vector<std::string>& argv, const json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double seconds) {
    json j;
    j["command"] = command;
    j["argv"] = argv;
    j["version"] = decorr::version;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["wall_clock_seconds"] = seconds;
    write_text(path, j.dump(2) + "\n");
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    for (const auto tok : decorr::detail::split_csv(csv))
        out.push_back(decorr::detail::parse_double(tok, 0));
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (const auto tok : decorr::detail::split_csv(csv))
        out.push_back(static_cast<int>(std::lround(decorr::detail::parse_double(tok, 0))));
    return out;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    bool suite = false;
    std::uint64_t seed = 0;
    long m = 10000;
    std::string out_dir = default_out_dir();
    bool cov_diag = false;
    int w_c = 20;
    // single-spec mode
    std::string kind;
    int d = 2;
    double s = 0.9;
    std::string name;
    long anomaly_start = -1;
    long anomaly_len = 0;
    std::uint64_t alt_seed = 0;
    double alt_s = 0.9;
    double shift_sigmas = 3.0;
};

void write_cov_diagnostics(const decorr::LabeledDataset& ds, int w_c, const fs::path& dir) {
    const auto covs = decorr::sliding_cov(ds.data, w_c);
    std::string cov_out = "block,i,j,value\n";
    std::string corr_out = "block,mean_correlation\n";
    for (std::size_t b = 0; b < covs.size(); ++b) {
        for (long i = 0; i < covs[b].rows(); ++i)
            for (long j = 0; j < covs[b].cols(); ++j)
                cov_out += std::to_string(b) + ',' + std::to_string(i) + ',' + std::to_string(j) +
                           ',' + decorr::detail::format_double(covs[b](i, j)) + '\n';
        corr_out += std::to_string(b) + ',' +
                    decorr::detail::format_double(decorr::mean_correlation(covs[b])) + '\n';
    }
    write_text(dir / (ds.name + ".cov.csv"), cov_out);
    write_text(dir / (ds.name + ".meancorr.csv"), corr_out);
}

int cmd_generate(const GenerateArgs& a, const std::vector<std::string>& argv) {
    const auto start = std::chrono::steady_clock::now();
    if (a.out_dir.empty())
        throw CLI::ValidationError("--out", "output directory required (flag or DECORR_OUT)");
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    std::vector<std::string> outputs;

    auto emit = [&](const decorr::LabeledDataset& ds, const json& scenario_manifest) {
        const fs::path csv_path = dir / (ds.name + ".csv");
        decorr::write_csv(ds, csv_path);
        write_text(dir / (ds.name + ".manifest.json"), scenario_manifest.dump(2) + "\n");
        outputs.push_back(csv_path.string());
        outputs.push_back((dir / (ds.name + ".manifest.json")).string());
        if (a.cov_diag) {
            write_cov_diagnostics(ds, a.w_c, dir);
            outputs.push_back((dir / (ds.name + ".cov.csv")).string());
            outputs.push_back((dir / (ds.name + ".meancorr.csv")).string());
        }
    };

    if (a.suite) {
        for (const auto& spec : decorr::scenario_suite(a.seed, a.m))
            emit(decorr::build_scenario(spec), json(spec));
    } else {
        if (a.kind.empty())
            throw CLI::ValidationError("--kind", "required unless --suite is given");
        decorr::GeneratorKind kind;
        if (a.kind == "randcov")
            kind = decorr::GeneratorKind::RandomCovariance;
        else if (a.kind == "corr")
            kind = decorr::GeneratorKind::CorrelationStrength;
        else if (a.kind == "meanshift")
            kind = decorr::GeneratorKind::MeanShift;
        else
            throw CLI::ValidationError("--kind", "must be randcov, corr or meanshift");

        if (a.anomaly_len > 0) {
            decorr::ScenarioSpec spec;
            spec.label = a.name.empty() ? "scenario" : a.name;
            spec.d = a.d;
            spec.m = a.m;
            spec.kind = kind;
            spec.seed = a.seed;
            spec.anomaly_start = a.anomaly_start >= 0 ? a.anomaly_start : a.m / 2;
            spec.anomaly_length = a.anomaly_len;
            spec.alt_seed = a.alt_seed;
            spec.s_background = a.s;
            spec.s_anomaly = a.alt_s;
            spec.mean_shift_sigmas = a.shift_sigmas;
            emit(decorr::build_scenario(spec), json(spec));
        } else {
            decorr::LabeledDataset ds;
            ds.name = a.name.empty() ? a.kind : a.name;
            for (int j = 0; j < a.d; ++j)
                ds.feature_names.push_back("f" + std::to_string(j));
            switch (kind) {
            case decorr::GeneratorKind::RandomCovariance:
            case decorr::GeneratorKind::MeanShift:
                ds.data = decorr::gen_random_cov(a.d, a.m, a.seed);
                break;
            case decorr::GeneratorKind::CorrelationStrength:
                ds.data = decorr::gen_corr_strength(a.d, a.m, a.s, a.seed);
                break;
            }
            json manifest = {{"label", ds.name}, {"d", a.d},       {"m", a.m},
                             {"kind", a.kind},   {"seed", a.seed}, {"s", a.s}};
            emit(ds, manifest);
        }
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json config = {{"suite", a.suite},   {"seed", a.seed}, {"m", a.m},
                   {"cov_diag", a.cov_diag}, {"w_c", a.w_c},   {"kind", a.kind},
                   {"d", a.d},           {"s", a.s}};
    write_manifest(dir / "generate.manifest.json", "generate", argv, config, {}, outputs,
                   seconds);
    std::cout << "wrote " << outputs.size() << " files to " << dir.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- score

struct ScoreArgs {
    std::string input;
    std::string output;
    std::optional<double> eta;
    bool auto_mode = false;
    double gamma = 0.25;
    int window = 0;
    int burn_in = 50;
    std::string eta_grid; // comma list, auto mode
    bool diagnostics = false;
};

int cmd_score(const ScoreArgs& a, const std::vector<std::string>& argv) {
    const auto start = std::chrono::steady_clock::now();
    if (a.eta.has_value() == a.auto_mode)
        throw CLI::ValidationError("--eta/--auto", "exactly one scoring mode required");

    std::ifstream in(a.input, std::ios::binary);
    if (!in)
        throw decorr::ParseError("cannot open '" + a.input + "'");
    std::string line;
    if (!std::getline(in, line))
        throw decorr::ParseError("'" + a.input + "': empty file");
    decorr::detail::strip_cr(line);
    const auto header = decorr::detail::split_csv(line);
    const bool labeled = !header.empty() && header.back() == "label";
    const int d = static_cast<int>(header.size()) - (labeled ? 1 : 0);
    std::vector<std::string> feature_names(header.begin(), header.begin() + d);

    std::optional<decorr::Detector> core;
    std::optional<decorr::AutoDetector> autod;
    if (a.auto_mode) {
        decorr::AutoTuneConfig cfg;
        if (!a.eta_grid.empty())
            cfg.eta_grid = parse_double_list(a.eta_grid);
        cfg.burn_in_n = a.burn_in;
        cfg.gamma = a.gamma;
        autod.emplace(cfg, d);
    } else {
        core.emplace(decorr::DetectorConfig{*a.eta, a.gamma, a.window}, d);
    }

    const fs::path out_path(a.output);
    if (out_path.has_parent_path())
        fs::create_directories(out_path.parent_path());
    const fs::path tmp = out_path.string() + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
        throw decorr::Error("cannot open '" + tmp.string() + "' for writing");
    out << "index,score";
    if (a.diagnostics) {
        out << ",r_frob";
        for (const auto& fname : feature_names)
            out << ",col_norm_" << fname;
    }
    out << '\n';

    Eigen::VectorXd sample(d);
    long row = 0;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        decorr::detail::strip_cr(line);
        if (line.empty())
            continue;
        const auto tokens = decorr::detail::split_csv(line);
        if (tokens.size() != header.size())
            throw decorr::ParseError("'" + a.input + "' line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(header.size()) + " fields");
        for (int j = 0; j < d; ++j)
            sample(j) = decorr::detail::parse_double(tokens[static_cast<std::size_t>(j)], line_no);
        double score = 0.0;
        try {
            score = autod ? autod->process(sample) : core->process(sample);
        } catch (const decorr::DivergenceError& e) {
            out.close();
            fs::remove(tmp);
            std::cerr << "divergence at input row " << row << ": " << e.what() << "\n";
            return 3;
        }
        out << row << ',' << decorr::detail::format_double(score);
        if (a.diagnostics) {
            const decorr::Detector* det =
                autod ? (autod->phase() == decorr::AutoDetector::Phase::Operating
                             ? &autod->detector()
                             : nullptr)
                      : &*core;
            if (det) {
                out << ',' << decorr::detail::format_double(det->r_frobenius());
                const Eigen::VectorXd norms = det->column_norms();
                for (long j = 0; j < norms.size(); ++j)
                    out << ',' << decorr::detail::format_double(norms(j));
            } else { // burn-in: no single decorrelator exists yet
                out << ',';
                for (int j = 0; j < d; ++j)
                    out << ',';
            }
        }
        out << '\n';
        ++row;
    }
    if (!out.flush())
        throw decorr::Error("write failed for '" + tmp.string() + "'");
    out.close();
    fs::rename(tmp, out_path);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json config = {{"eta", a.eta ? json(*a.eta) : json()},
                   {"auto", a.auto_mode},
                   {"gamma", a.gamma},
                   {"window", a.window},
                   {"burn_in", a.burn_in},
                   {"eta_grid", a.eta_grid},
                   {"diagnostics", a.diagnostics}};
    write_manifest(out_path.string() + ".manifest.json", "score", argv, config, {a.input},
                   {a.output}, seconds);
    std::cout << "scored " << row << " rows -> " << a.output << "\n";
    return 0;
}

// -------------------------------------------------------------------- tune

struct TuneArgs {
    std::string input;
    std::string out_dir = default_out_dir();
    std::string ratios;
    int bins = 20;
    std::uint64_t seed = 0;
    std::string etas;
    std::string windows;
    double gamma = 0.25;
};

std::vector<decorr::DetectorConfig> build_grid(const std::string& etas,
                                               const std::string& windows, double gamma) {
    const std::vector<double> eta_list =
        etas.empty() ? decorr::default_eta_grid() : parse_double_list(etas);
    const std::vector<int> p_list = windows.empty() ? std::vector<int>{0, 1}
                                                    : parse_int_list(windows);
    std::vector<decorr::DetectorConfig> grid;
    for (int p : p_list)
        for (double eta : eta_list)
            grid.push_back(decorr::DetectorConfig{eta, gamma, p});
    return grid;
}

int cmd_tune(const TuneArgs& a, const std::vector<std::string>& argv) {
    const auto start = std::chrono::steady_clock::now();
    if (a.out_dir.empty())
        throw CLI::ValidationError("--out", "output directory required (flag or DECORR_OUT)");
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);

    const decorr::LabeledDataset ds = decorr::read_csv(a.input);
    if (!ds.labeled())
        throw decorr::ValidationError("'" + a.input + "' has no label column");
    const std::vector<double> ratios =
        a.ratios.empty() ? decorr::default_ratios() : parse_double_list(a.ratios);
    const auto grid = build_grid(a.etas, a.windows, a.gamma);

    const decorr::SubsetSelection sel = decorr::select_subset(ds, ratios, a.bins, a.seed);
    const decorr::LabeledDataset subset = decorr::extract_rows(ds, sel.indices);
    const decorr::TuneResult result = decorr::grid_search(subset, grid);

    json jt;
    jt["dataset"] = ds.name;
    jt["subset"] = {{"ratio", sel.ratio},
                    {"size", sel.indices.size()},
                    {"contamination", sel.contamination}};
    jt["subset"]["jsd_per_ratio"] = json::array();
    for (const auto& [ratio, mean_jsd] : sel.jsd_per_ratio)
        jt["subset"]["jsd_per_ratio"].push_back({{"ratio", ratio}, {"mean_jsd", mean_jsd}});
    jt["best"] = decorr::config_json(result.best_params);
    jt["subset_auc"] = result.subset_auc;
    jt["grid"] = json::array();
    for (const auto& entry : result.grid_results)
        jt["grid"].push_back({{"config", decorr::config_json(entry.config)},
                              {"auc", entry.auc},
                              {"diverged", entry.diverged}});
    write_text(dir / "tune.json", jt.dump(2) + "\n");

    std::string idx_csv = "index\n";
    for (long idx : sel.indices)
        idx_csv += std::to_string(idx) + '\n';
    write_text(dir / "subset_indices.csv", idx_csv);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json config = {{"ratios", a.ratios}, {"bins", a.bins},   {"seed", a.seed},
                   {"etas", a.etas},     {"windows", a.windows}, {"gamma", a.gamma}};
    write_manifest(dir / "tune.manifest.json", "tune", argv, config, {a.input},
                   {(dir / "tune.json").string(), (dir / "subset_indices.csv").string()},
                   seconds);
    std::cout << "tuned " << ds.name << ": ratio " << sel.ratio << ", best eta "
              << result.best_params.eta << ", p " << result.best_params.window_p
              << ", subset AUC " << result.subset_auc << "\n";
    return 0;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
    std::string dataset_dir;
    std::string out_dir = default_out_dir();
    bool tuned = false;
    bool grid = false;
    bool auto_mode = false;
    std::optional<double> eta;
    double gamma = 0.25;
    int window = 0;
    int repeats = 1;
    int workers = 1;
    std::string external_scores;
    std::uint64_t seed = 0;
    std::string ratios;
    int bins = 20;
    std::string etas;
    std::string windows;
    int burn_in = 50;
};

int cmd_bench(const BenchArgs& a, const std::vector<std::string>& argv) {
    const auto start = std::chrono::steady_clock::now();
    if (a.out_dir.empty())
        throw CLI::ValidationError("--out", "output directory required (flag or DECORR_OUT)");
    const int modes = int(a.tuned) + int(a.grid) + int(a.auto_mode) + int(a.eta.has_value());
    if (modes != 1)
        throw CLI::ValidationError("--tuned/--grid/--eta/--auto", "exactly one mode required");

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.dataset_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
            entry.path().stem().string().find(".") == std::string::npos)
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw decorr::ParseError("no .csv datasets in '" + a.dataset_dir + "'");
    std::vector<decorr::LabeledDataset> datasets;
    for (const auto& f : files)
        datasets.push_back(decorr::read_csv(f));

    decorr::BenchOptions opt;
    if (a.tuned)
        opt.mode = decorr::BenchMode::Tuned;
    else if (a.grid)
        opt.mode = decorr::BenchMode::GridPeak;
    else if (a.auto_mode)
        opt.mode = decorr::BenchMode::Auto;
    else {
        opt.mode = decorr::BenchMode::FixedConfig;
        opt.fixed = decorr::DetectorConfig{*a.eta, a.gamma, a.window};
    }
    opt.grid = build_grid(a.etas, a.windows, a.gamma);
    opt.tune_ratios = a.ratios.empty() ? decorr::default_ratios() : parse_double_list(a.ratios);
    opt.tune_bins = a.bins;
    opt.tune_seed = a.seed;
    opt.auto_config.burn_in_n = a.burn_in;
    opt.auto_config.gamma = a.gamma;
    if (!a.etas.empty())
        opt.auto_config.eta_grid = parse_double_list(a.etas);
    opt.repeats = a.repeats;
    opt.workers = a.workers;

    const decorr::ExternalScores external =
        a.external_scores.empty() ? decorr::ExternalScores{}
                                  : decorr::load_external_scores(a.external_scores);
    const decorr::EvalReport report = decorr::run_benchmark(datasets, opt, external);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir / "curves");
    write_text(dir / "report.csv", decorr::report_csv(report));
    write_text(dir / "report.json", decorr::report_json(report).dump(2) + "\n");
    std::vector<std::string> outputs = {(dir / "report.csv").string(),
                                        (dir / "report.json").string()};
    for (const auto& eval : report.per_dataset) {
        if (!eval.has_roc)
            continue;
        const fs::path curve_path = dir / "curves" / (eval.dataset + ".roc.csv");
        write_text(curve_path, decorr::curve_csv(eval.roc));
        outputs.push_back(curve_path.string());
    }

    for (const auto& eval : report.per_dataset)
        for (const auto& row : eval.rows)
            if (row.failed)
                std::cerr << "dataset " << row.dataset << " method " << row.method
                          << " failed: " << row.error << "\n";

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json config = {{"mode", decorr::to_string(opt.mode)},
                   {"eta", a.eta ? json(*a.eta) : json()},
                   {"gamma", a.gamma},
                   {"window", a.window},
                   {"repeats", a.repeats},
                   {"workers", a.workers},
                   {"seed", a.seed},
                   {"ratios", a.ratios},
                   {"bins", a.bins},
                   {"etas", a.etas},
                   {"windows", a.windows},
                   {"burn_in", a.burn_in},
                   {"external_scores", a.external_scores}};
    std::vector<std::string> inputs;
    for (const auto& f : files)
        inputs.push_back(f.string());
    write_manifest(dir / "bench.manifest.json", "bench", argv, config, inputs, outputs, seconds);
    std::cout << "benchmarked " << datasets.size() << " datasets -> " << dir.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- rerun

int cmd_rerun(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in)
        throw decorr::ParseError("cannot open '" + manifest_path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw decorr::ParseError("'" + manifest_path + "': " + e.what());
    }
    if (!j.contains("argv") || !j["argv"].is_array())
        throw decorr::ParseError("'" + manifest_path + "': no argv recorded");
    std::vector<std::string> args = j["argv"].get<std::vector<std::string>>();
    if (!args.empty() && args.front() == "rerun")
        throw decorr::ParseError("refusing to rerun a rerun manifest");
    return run_cli(args);
}

// --------------------------------------------------------------------- app

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"streaming decorrelation anomaly detection toolkit"};
    app.set_version_flag("--version", decorr::version);
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* cgen = app.add_subcommand("generate", "generate synthetic benchmark data");
    cgen->add_flag("--suite", gen.suite, "emit the 20-scenario suite (L1..L12, H1..H8)");
    cgen->add_option("--seed", gen.seed, "master seed");
    cgen->add_option("--m", gen.m, "samples per dataset")->check(CLI::PositiveNumber);
    cgen->add_option("-o,--out", gen.out_dir, "output directory (or DECORR_OUT)");
    cgen->add_flag("--cov-diag", gen.cov_diag, "also write sliding-covariance diagnostics");
    cgen->add_option("--w-c", gen.w_c, "diagnostic block size")->check(CLI::Range(2, 1 << 20));
    cgen->add_option("--kind", gen.kind, "single dataset: randcov, corr or meanshift");
    cgen->add_option("--d", gen.d, "feature count")->check(CLI::Range(2, 1 << 20));
    cgen->add_option("--s", gen.s, "correlation strength (corr kind)");
    cgen->add_option("--name", gen.name, "dataset name");
    cgen->add_option("--anomaly-start", gen.anomaly_start, "anomaly window start row");
    cgen->add_option("--anomaly-len", gen.anomaly_len, "anomaly window length (enables labels)");
    cgen->add_option("--alt-seed", gen.alt_seed, "window seed (randcov kind)");
    cgen->add_option("--alt-s", gen.alt_s, "window correlation strength (corr kind)");
    cgen->add_option("--shift-sigmas", gen.shift_sigmas, "mean shift in background sigmas");

    ScoreArgs sc;
    auto* cscore = app.add_subcommand("score", "stream a CSV through the detector");
    cscore->add_option("-i,--input", sc.input, "input CSV")->required();
    cscore->add_option("-o,--output", sc.output, "output score CSV")->required();
    double eta_val = 0.0;
    auto* eta_opt = cscore->add_option("--eta", eta_val, "fixed learning rate");
    cscore->add_flag("--auto", sc.auto_mode, "automated learning-rate selection");
    cscore->add_option("--gamma", sc.gamma, "momentum factor");
    cscore->add_option("--window", sc.window, "sliding window size p");
    cscore->add_option("--burn-in", sc.burn_in, "exploration length (auto mode)");
    cscore->add_option("--eta-grid", sc.eta_grid, "comma list of candidate rates (auto mode)");
    cscore->add_flag("--diagnostics", sc.diagnostics, "emit R norms per row");

    TuneArgs tu;
    auto* ctune = app.add_subcommand("tune", "subset selection + grid search");
    ctune->add_option("-i,--input", tu.input, "labeled input CSV")->required();
    ctune->add_option("-o,--out", tu.out_dir, "output directory (or DECORR_OUT)");
    ctune->add_option("--ratios", tu.ratios, "comma list of downsampling ratios");
    ctune->add_option("--bins", tu.bins, "histogram bins")->check(CLI::Range(2, 1 << 20));
    ctune->add_option("--seed", tu.seed, "subsampling seed");
    ctune->add_option("--etas", tu.etas, "comma list of learning rates");
    ctune->add_option("--windows", tu.windows, "comma list of window sizes");
    ctune->add_option("--gamma", tu.gamma, "momentum factor");

    BenchArgs be;
    auto* cbench = app.add_subcommand("bench", "evaluate datasets in a directory");
    cbench->add_option("-d,--datasets", be.dataset_dir, "directory of labeled CSVs")->required();
    cbench->add_option("-o,--out", be.out_dir, "output directory (or DECORR_OUT)");
    cbench->add_flag("--tuned", be.tuned, "tune on a subset, evaluate on the full set");
    cbench->add_flag("--grid", be.grid, "report the per-dataset grid peak");
    cbench->add_flag("--auto", be.auto_mode, "automated learning-rate selection");
    double bench_eta = 0.0;
    auto* bench_eta_opt = cbench->add_option("--eta", bench_eta, "fixed learning rate");
    cbench->add_option("--gamma", be.gamma, "momentum factor");
    cbench->add_option("--window", be.window, "sliding window size p (fixed mode)");
    cbench->add_option("--repeats", be.repeats, "timing repeats")->check(CLI::PositiveNumber);
    cbench->add_option("--workers", be.workers, "worker threads")->check(CLI::PositiveNumber);
    cbench->add_option("--external-scores", be.external_scores,
                       "directory of <dataset>__<method>.csv score files");
    cbench->add_option("--seed", be.seed, "tuning subsample seed");
    cbench->add_option("--ratios", be.ratios, "tuning ratios (tuned mode)");
    cbench->add_option("--bins", be.bins, "histogram bins (tuned mode)");
    cbench->add_option("--etas", be.etas, "comma list of learning rates (grid modes)");
    cbench->add_option("--windows", be.windows, "comma list of window sizes (grid modes)");
    cbench->add_option("--burn-in", be.burn_in, "exploration length (auto mode)");

    std::string manifest_path;
    auto* crerun = app.add_subcommand("rerun", "re-execute a command from its manifest");
    crerun->add_option("manifest", manifest_path, "run manifest JSON")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed)); // CLI11 consumes args back to front
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    try {
        if (cgen->parsed())
            return cmd_generate(gen, args);
        if (cscore->parsed()) {
            if (eta_opt->count())
                sc.eta = eta_val;
            return cmd_score(sc, args);
        }
        if (ctune->parsed())
            return cmd_tune(tu, args);
        if (cbench->parsed()) {
            if (bench_eta_opt->count())
                be.eta = bench_eta;
            return cmd_bench(be, args);
        }
        if (crerun->parsed())
            return cmd_rerun(manifest_path);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const decorr::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const decorr::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const decorr::SelectionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const decorr::SingleClassError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const decorr::DegenerateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const decorr::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run_cli(args);
}
