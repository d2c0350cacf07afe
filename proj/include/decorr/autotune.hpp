#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "decorr/detector.hpp"
#include "decorr/errors.hpp"

// Automated learning-rate selection. For the first n samples (the burn-in)
// one candidate decorrelator per grid entry is raced on the same stream,
// all emitting score 0. Each step records the candidate's correlation level
//
//   c = (1/d^2) * sum of all entries of (x R^T)^T (x R^T)
//
// signed, diagonal included. After n samples the candidate with the largest
// mean level among those within 2.5% of the minimum is selected (the slowest
// learner that still near-minimally decorrelates), its matrix is carried
// forward, and scoring proceeds as a plain windowless detector.

namespace decorr {

struct AutoTuneConfig {
    std::vector<double> eta_grid = default_eta_grid();
    int burn_in_n = 50;
    double gamma = 0.25;

    void validate() const {
        if (eta_grid.empty())
            throw ConfigError("eta_grid must not be empty");
        for (std::size_t i = 0; i < eta_grid.size(); ++i) {
            if (!std::isfinite(eta_grid[i]) || eta_grid[i] <= 0.0)
                throw ConfigError("eta_grid entries must be finite and positive");
            for (std::size_t j = i + 1; j < eta_grid.size(); ++j)
                if (eta_grid[i] == eta_grid[j])
                    throw ConfigError("eta_grid entries must be distinct");
        }
        if (burn_in_n < 1)
            throw ConfigError("burn_in_n must be >= 1");
        if (!std::isfinite(gamma) || gamma <= 0.0 || gamma > 1.0)
            throw ConfigError("gamma must lie in (0, 1]");
    }
};

/// Signed mean over all d^2 entries of (x R^T)^T (x R^T).
inline double correlation_level(const Eigen::MatrixXd& r,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::VectorXd xhat = r * x; // column form of x * R^T
    const Eigen::MatrixXd outer = xhat * xhat.transpose();
    const double d = static_cast<double>(x.size());
    return outer.sum() / (d * d);
}

/// Admit-then-argmax rule on mean correlation levels: admit candidates with
/// cbar_i <= threshold * min_j cbar_j, pick the admitted maximum, break exact
/// ties toward the larger eta. The inequality is applied to signed values; a
/// negative minimum can make it admit nobody, in which case the minimizing
/// candidate is chosen. Throws SelectionError when no candidate is alive.
inline std::size_t select_learning_rate(const std::vector<double>& cbar,
                                        const std::vector<double>& etas,
                                        const std::vector<char>& alive,
                                        double threshold = 1.025) {
    if (cbar.size() != etas.size() || cbar.size() != alive.size())
        throw DimensionError("select_learning_rate: mismatched table sizes");
    std::optional<std::size_t> min_idx;
    for (std::size_t i = 0; i < cbar.size(); ++i) {
        if (!alive[i] || !std::isfinite(cbar[i]))
            continue;
        if (!min_idx || cbar[i] < cbar[*min_idx])
            min_idx = i;
    }
    if (!min_idx)
        throw SelectionError("no learning-rate candidate survived the burn-in");
    const double cutoff = threshold * cbar[*min_idx];
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cbar.size(); ++i) {
        if (!alive[i] || !std::isfinite(cbar[i]) || cbar[i] > cutoff)
            continue;
        if (!best || cbar[i] > cbar[*best] || (cbar[i] == cbar[*best] && etas[i] > etas[*best]))
            best = i;
    }
    return best ? *best : *min_idx;
}

class AutoDetector {
public:
    enum class Phase { BurnIn, Operating };

    AutoDetector(const AutoTuneConfig& config, int d) : cfg_(config), d_(d) {
        cfg_.validate();
        candidates_.reserve(cfg_.eta_grid.size());
        for (double eta : cfg_.eta_grid)
            candidates_.emplace_back(DetectorConfig{eta, cfg_.gamma, 0}, d);
        alive_.assign(cfg_.eta_grid.size(), 1);
        corr_sums_.assign(cfg_.eta_grid.size(), 0.0);
    }

    /// One sample in, one score out. Burn-in steps emit exactly 0.
    double process(const Eigen::Ref<const Eigen::VectorXd>& sample) {
        if (phase_ == Phase::Operating)
            return chosen_->process(sample);
        burn_in_step(sample);
        if (++t_ == cfg_.burn_in_n)
            select();
        return 0.0;
    }

    Phase phase() const { return phase_; }
    int dim() const { return d_; }
    long t() const { return phase_ == Phase::Operating ? chosen_->t() : t_; }

    std::size_t chosen_index() const {
        require_operating();
        return chosen_index_;
    }
    double chosen_eta() const { return cfg_.eta_grid[chosen_index()]; }
    const Detector& detector() const {
        require_operating();
        return *chosen_;
    }

    /// Mean correlation level per candidate; populated at selection time.
    const std::vector<double>& mean_corr_levels() const { return mean_corr_; }
    const std::vector<char>& candidate_alive() const { return alive_; }

private:
    void burn_in_step(const Eigen::Ref<const Eigen::VectorXd>& sample) {
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            if (!alive_[i])
                continue;
            try {
                candidates_[i].process(sample);
            } catch (const DivergenceError&) {
                alive_[i] = 0;
                continue;
            }
            const double c = correlation_level(candidates_[i].r(), sample);
            if (!std::isfinite(c)) {
                alive_[i] = 0;
                continue;
            }
            corr_sums_[i] += c;
        }
    }

    void select() {
        mean_corr_.resize(corr_sums_.size());
        for (std::size_t i = 0; i < corr_sums_.size(); ++i)
            mean_corr_[i] = corr_sums_[i] / static_cast<double>(cfg_.burn_in_n);
        chosen_index_ = select_learning_rate(mean_corr_, cfg_.eta_grid, alive_);
        chosen_.emplace(std::move(candidates_[chosen_index_]));
        chosen_->reset_score(); // scores restart at 0; R is carried forward
        candidates_.clear();
        candidates_.shrink_to_fit();
        phase_ = Phase::Operating;
    }

    void require_operating() const {
        if (phase_ != Phase::Operating)
            throw SelectionError("burn-in still running; no learning rate chosen yet");
    }

    AutoTuneConfig cfg_;
    int d_;
    Phase phase_ = Phase::BurnIn;
    long t_ = 0;
    std::vector<Detector> candidates_;
    std::vector<char> alive_;
    std::vector<double> corr_sums_;
    std::vector<double> mean_corr_;
    std::size_t chosen_index_ = 0;
    std::optional<Detector> chosen_;
};

} // namespace decorr
