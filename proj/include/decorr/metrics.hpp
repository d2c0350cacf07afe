#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "decorr/errors.hpp"

// Scoring-quality metrics. AUC follows the Mann-Whitney convention: the
// probability that a random positive outscores a random negative, with ties
// counted half. The curve sweeps thresholds over distinct score values, so
// its trapezoidal area equals that statistic exactly.

namespace decorr {

struct RocResult {
    double auc = 0.0;
    std::vector<std::pair<double, double>> curve; // (fpr, tpr) from (0,0) to (1,1)
    long n_pos = 0;
    long n_neg = 0;
};

inline RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DimensionError("roc_auc: scores and labels differ in length");
    if (scores.empty())
        throw ValidationError("roc_auc: empty input");
    RocResult res;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]))
            throw ValidationError("roc_auc: non-finite score at row " + std::to_string(i));
        if (labels[i] != 0 && labels[i] != 1)
            throw ValidationError("roc_auc: labels must be 0 or 1");
        (labels[i] ? res.n_pos : res.n_neg)++;
    }
    if (res.n_pos == 0 || res.n_neg == 0)
        throw SingleClassError("roc_auc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    res.curve.emplace_back(0.0, 0.0);
    double area = 0.0;
    long tp = 0, fp = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        // consume the whole tie group at this score
        const double v = scores[order[i]];
        while (i < order.size() && scores[order[i]] == v) {
            (labels[order[i]] ? tp : fp)++;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(res.n_neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(res.n_pos);
        area += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        res.curve.emplace_back(fpr, tpr);
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    res.auc = area;
    return res;
}

/// Each method's AUC as a percentage of the per-dataset maximum; the best
/// method maps to exactly 100.
inline std::map<std::string, double>
normalized_auc(const std::map<std::string, double>& aucs) {
    if (aucs.empty())
        throw ValidationError("normalized_auc: empty input");
    double max_auc = 0.0;
    for (const auto& [method, auc] : aucs) {
        if (!std::isfinite(auc) || auc < 0.0 || auc > 1.0)
            throw ValidationError("normalized_auc: AUC for '" + method + "' outside [0, 1]");
        max_auc = std::max(max_auc, auc);
    }
    if (max_auc <= 0.0)
        throw DegenerateError("normalized_auc: maximum AUC is 0");
    std::map<std::string, double> out;
    for (const auto& [method, auc] : aucs)
        out[method] = auc / max_auc * 100.0;
    return out;
}

} // namespace decorr
