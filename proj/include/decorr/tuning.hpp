#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "decorr/dataset.hpp"
#include "decorr/detector.hpp"
#include "decorr/errors.hpp"
#include "decorr/metrics.hpp"
#include "decorr/rng.hpp"

// Hyperparameter tuning on a representative validation subset. Candidate
// subsets are drawn at ratios 10%..60%; the one whose per-feature histograms
// are closest to the parent (mean Jensen-Shannon divergence, shared bin
// edges) wins, subject to containing at least one anomaly. Grid search then
// maximizes AUC over that subset.

namespace decorr {

/// Per-feature equal-width bin ranges. Edges are always taken from the
/// parent dataset so parent and subset histograms are comparable.
struct HistogramGrid {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    int bins = 20;
};

inline HistogramGrid histogram_grid(const Eigen::Ref<const Eigen::MatrixXd>& data, int bins) {
    if (bins < 2)
        throw ConfigError("histogram_grid: bins must be >= 2");
    if (data.rows() < 1)
        throw ValidationError("histogram_grid: empty data");
    HistogramGrid grid;
    grid.bins = bins;
    grid.lo = data.colwise().minCoeff();
    grid.hi = data.colwise().maxCoeff();
    return grid;
}

/// d x bins matrix of per-feature bin probabilities (each row sums to 1).
/// A constant feature puts all mass in its first bin; values at the upper
/// edge land in the last bin.
inline Eigen::MatrixXd feature_histograms(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                          const HistogramGrid& grid) {
    const long d = data.cols();
    if (grid.lo.size() != d)
        throw DimensionError("feature_histograms: grid dimension mismatch");
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(d, grid.bins);
    const double m = static_cast<double>(data.rows());
    for (long j = 0; j < d; ++j) {
        const double lo = grid.lo(j);
        const double width = grid.hi(j) - lo;
        for (long i = 0; i < data.rows(); ++i) {
            long bin = 0;
            if (width > 0.0) {
                bin = static_cast<long>((data(i, j) - lo) / width * grid.bins);
                bin = std::clamp(bin, long{0}, static_cast<long>(grid.bins - 1));
            }
            probs(j, bin) += 1.0;
        }
        probs.row(j) /= m;
    }
    return probs;
}

inline Eigen::MatrixXd feature_histograms(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                          int bins) {
    return feature_histograms(data, histogram_grid(data, bins));
}

/// Jensen-Shannon divergence in base 2: symmetric, bounded to [0, 1],
/// 0 * log 0 taken as 0.
inline double jsd(const Eigen::Ref<const Eigen::VectorXd>& p,
                  const Eigen::Ref<const Eigen::VectorXd>& q) {
    if (p.size() != q.size())
        throw DimensionError("jsd: length mismatch");
    if (p.size() == 0)
        throw ValidationError("jsd: empty distributions");
    for (long i = 0; i < p.size(); ++i)
        if (!(p(i) >= 0.0) || !(q(i) >= 0.0))
            throw ValidationError("jsd: probabilities must be non-negative");
    if (std::abs(p.sum() - 1.0) > 1e-9 || std::abs(q.sum() - 1.0) > 1e-9)
        throw ValidationError("jsd: distributions must sum to 1");
    double div = 0.0;
    for (long i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p(i) + q(i));
        if (p(i) > 0.0)
            div += 0.5 * p(i) * std::log2(p(i) / m);
        if (q(i) > 0.0)
            div += 0.5 * q(i) * std::log2(q(i) / m);
    }
    return div;
}

struct SubsetSelection {
    double ratio = 0.0;
    std::vector<long> indices; // strictly increasing rows of the parent
    std::vector<std::pair<double, double>> jsd_per_ratio; // (ratio, mean JSD)
    double contamination = 0.0;
};

/// Order-preserving uniform subsample without replacement (selection
/// sampling): k of m indices, ascending.
inline std::vector<long> sample_indices(long m, long k, Rng& rng) {
    std::vector<long> out;
    out.reserve(static_cast<std::size_t>(k));
    long needed = k;
    for (long i = 0; i < m && needed > 0; ++i) {
        const long remaining = m - i;
        if (rng.uniform() * static_cast<double>(remaining) < static_cast<double>(needed)) {
            out.push_back(i);
            --needed;
        }
    }
    return out;
}

inline std::vector<double> default_ratios() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}; }

inline LabeledDataset extract_rows(const LabeledDataset& ds, const std::vector<long>& indices) {
    LabeledDataset out;
    out.name = ds.name;
    out.feature_names = ds.feature_names;
    out.data.resize(static_cast<long>(indices.size()), ds.data.cols());
    if (ds.labeled())
        out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.data.row(static_cast<long>(i)) = ds.data.row(indices[i]);
        if (ds.labeled())
            out.labels.push_back(ds.labels[static_cast<std::size_t>(indices[i])]);
    }
    return out;
}

/// Picks the downsampling ratio whose subset best matches the parent
/// distribution (minimal mean JSD over features), skipping candidates with
/// zero contamination. Ties go to the smaller ratio. Each ratio draws from
/// its own derived seed, so results do not depend on evaluation order.
inline SubsetSelection select_subset(const LabeledDataset& ds,
                                     const std::vector<double>& ratios = default_ratios(),
                                     int bins = 20, std::uint64_t seed = 0) {
    ds.validate();
    if (!ds.labeled() || ds.anomaly_count() == 0)
        throw SelectionError("select_subset: dataset must contain at least one anomaly");
    if (ratios.empty())
        throw ConfigError("select_subset: no ratios given");
    const long m = ds.rows();
    const HistogramGrid grid = histogram_grid(ds.data, bins);
    const Eigen::MatrixXd parent_hist = feature_histograms(ds.data, grid);

    struct Candidate {
        double ratio;
        double mean_jsd;
        double contamination;
        std::vector<long> indices;
    };
    std::vector<Candidate> candidates;
    SubsetSelection result;
    for (std::size_t r = 0; r < ratios.size(); ++r) {
        const double ratio = ratios[r];
        if (!(ratio > 0.0 && ratio <= 1.0))
            throw ConfigError("select_subset: ratios must lie in (0, 1]");
        const long k = std::lround(ratio * static_cast<double>(m));
        if (k < 1)
            throw ConfigError("select_subset: ratio " + std::to_string(ratio) +
                              " selects no rows");
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        Candidate cand;
        cand.ratio = ratio;
        cand.indices = sample_indices(m, k, rng);
        const LabeledDataset sub = extract_rows(ds, cand.indices);
        const Eigen::MatrixXd sub_hist = feature_histograms(sub.data, grid);
        double total = 0.0;
        for (long j = 0; j < ds.data.cols(); ++j)
            total += jsd(sub_hist.row(j).transpose(), parent_hist.row(j).transpose());
        cand.mean_jsd = total / static_cast<double>(ds.data.cols());
        cand.contamination =
            static_cast<double>(sub.anomaly_count()) / static_cast<double>(sub.rows());
        result.jsd_per_ratio.emplace_back(ratio, cand.mean_jsd);
        candidates.push_back(std::move(cand));
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.mean_jsd != b.mean_jsd ? a.mean_jsd < b.mean_jsd : a.ratio < b.ratio;
    });
    for (auto& cand : candidates) {
        if (cand.contamination > 0.0) {
            result.ratio = cand.ratio;
            result.indices = std::move(cand.indices);
            result.contamination = cand.contamination;
            return result;
        }
    }
    throw SelectionError("select_subset: every candidate subset has zero contamination");
}

struct GridEntry {
    DetectorConfig config;
    double auc = 0.5;
    bool diverged = false;
};

struct TuneResult {
    DetectorConfig best_params;
    double subset_auc = 0.0;
    std::vector<GridEntry> grid_results;
};

/// Streams the dataset through a fresh detector and returns per-row scores.
/// Throws DivergenceError like the detector itself.
inline std::vector<double> score_stream(const DetectorConfig& config, const LabeledDataset& ds) {
    Detector det(config, ds.dims());
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(ds.rows()));
    for (long i = 0; i < ds.rows(); ++i)
        scores.push_back(det.process(ds.data.row(i).transpose()));
    return scores;
}

/// One AUC per config; a diverging config scores 0.5 and is flagged rather
/// than aborting the sweep.
inline std::vector<GridEntry> sweep_grid(const LabeledDataset& ds,
                                         const std::vector<DetectorConfig>& grid) {
    std::vector<GridEntry> entries;
    entries.reserve(grid.size());
    for (const auto& config : grid) {
        GridEntry entry;
        entry.config = config;
        try {
            entry.auc = roc_auc(score_stream(config, ds), ds.labels).auc;
        } catch (const DivergenceError&) {
            entry.auc = 0.5;
            entry.diverged = true;
        }
        entries.push_back(entry);
    }
    return entries;
}

/// Table-1 defaults: the recommended learning rates crossed with p in
/// {0, 1}, gamma fixed at 0.25.
inline std::vector<DetectorConfig> default_grid() {
    std::vector<DetectorConfig> grid;
    for (int p : {0, 1})
        for (double eta : default_eta_grid())
            grid.push_back(DetectorConfig{eta, 0.25, p});
    return grid;
}

inline bool config_preferred(const DetectorConfig& a, const DetectorConfig& b) {
    if (a.eta != b.eta) return a.eta < b.eta;
    if (a.window_p != b.window_p) return a.window_p < b.window_p;
    return a.gamma < b.gamma;
}

/// Exhaustive search over the grid, maximizing subset AUC. Equal AUC breaks
/// toward the smaller eta, then the smaller p.
inline TuneResult grid_search(const LabeledDataset& subset,
                              const std::vector<DetectorConfig>& grid) {
    if (grid.empty())
        throw ConfigError("grid_search: empty grid");
    if (!subset.labeled() || subset.anomaly_count() == 0 ||
        subset.anomaly_count() == subset.rows())
        throw SingleClassError("grid_search: subset must contain both classes");
    TuneResult result;
    result.grid_results = sweep_grid(subset, grid);
    const GridEntry* best = &result.grid_results.front();
    for (const auto& entry : result.grid_results) {
        if (entry.auc > best->auc ||
            (entry.auc == best->auc && config_preferred(entry.config, best->config)))
            best = &entry;
    }
    result.best_params = best->config;
    result.subset_auc = best->auc;
    return result;
}

} // namespace decorr
