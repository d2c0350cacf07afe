#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

#include "decorr/errors.hpp"

// Streaming decorrelation detector.
//
// The detector keeps a trainable decorrelation matrix R (d x d, started at
// the identity). Each incoming sample x is decorrelated as xhat = x * R^T;
// the cross-feature products of xhat drive the update
//
//   R <- R - eta / ((p+1)(d-1)) * (C - diag(C)) * R,   C = xhat^T xhat
//
// where the window stacks the current sample with up to p previous ones.
// The anomaly score is a momentum-smoothed absolute change of the Frobenius
// norm of R:
//
//   s <- (1 - gamma) * s + gamma * | ||R_t||_F - ||R_{t-1}||_F |
//
// Memory is O(d^2 + p*d) and independent of the stream length; every sample
// is consumed exactly once.
//
// Caveat: the score tracks the *norm* of R, so an update that rotates R
// without changing its Frobenius norm produces a zero increment. This is a
// property of the scoring rule, kept as is.

namespace decorr {

/// Recommended learning-rate set, largest first.
inline const std::vector<double>& default_eta_grid() {
    static const std::vector<double> grid = {0.8,  0.2,  0.08, 0.02, 0.008, 0.002,
                                             8e-4, 2e-4, 8e-5, 2e-5, 8e-6,  2e-6};
    return grid;
}

struct DetectorConfig {
    double eta = 0.02;   // learning rate, > 0
    double gamma = 0.25; // momentum factor, in (0, 1]
    int window_p = 0;    // past samples contributing to each update, >= 0

    void validate() const {
        if (!std::isfinite(eta) || eta <= 0.0)
            throw ConfigError("eta must be a finite positive value");
        if (!std::isfinite(gamma) || gamma <= 0.0 || gamma > 1.0)
            throw ConfigError("gamma must lie in (0, 1]");
        if (window_p < 0)
            throw ConfigError("window_p must be non-negative");
    }
};

class Detector {
public:
    Detector(const DetectorConfig& config, int d) : cfg_(config), d_(d) {
        cfg_.validate();
        if (d < 2)
            throw DimensionError("detector needs d >= 2 features (normalizer divides by d-1)");
        const int p = cfg_.window_p;
        r_ = Eigen::MatrixXd::Identity(d, d);
        buffer_ = Eigen::MatrixXd::Zero(p > 0 ? p : 0, d);
        window_ = Eigen::MatrixXd::Zero(p + 1, d);
        xhat_ = Eigen::MatrixXd::Zero(p + 1, d);
        cross_ = Eigen::MatrixXd::Zero(d, d);
        next_r_ = Eigen::MatrixXd::Zero(d, d);
        cur_frob_ = prev_frob_ = r_.norm(); // sqrt(d) for the identity
    }

    /// Consumes one sample and returns its anomaly score. The first
    /// window_p samples only fill the buffer and score 0.
    double process(const Eigen::Ref<const Eigen::VectorXd>& sample) {
        if (poisoned_)
            throw DivergenceError(cfg_.eta, t_);
        check_sample(sample);
        const int p = cfg_.window_p;
        ++t_;
        if (t_ <= p) {
            buffer_.row(buffered_++) = sample.transpose();
            return 0.0;
        }
        for (int i = 0; i < p; ++i)
            window_.row(i) = buffer_.row((head_ + i) % p);
        window_.row(p) = sample.transpose();
        update_r();
        update_score();
        if (p > 0) {
            buffer_.row(head_) = sample.transpose();
            head_ = (head_ + 1) % p;
        }
        return score_;
    }

    /// Applies the current decorrelator to a block of rows: window * R^T.
    /// Pure; does not advance the stream.
    Eigen::MatrixXd decorrelate(const Eigen::Ref<const Eigen::MatrixXd>& window) const {
        if (window.cols() != d_)
            throw DimensionError("decorrelate: window has " + std::to_string(window.cols()) +
                                 " columns, detector expects " + std::to_string(d_));
        return window * r_.transpose();
    }

    /// Euclidean norm of each column of R (the column used to decorrelate
    /// the corresponding feature). Readable even after divergence.
    Eigen::VectorXd column_norms() const { return r_.colwise().norm(); }

    const Eigen::MatrixXd& r() const { return r_; }
    double score() const { return score_; }
    double r_frobenius() const { return cur_frob_; }
    long t() const { return t_; }
    int dim() const { return d_; }
    const DetectorConfig& config() const { return cfg_; }
    bool poisoned() const { return poisoned_; }

    /// Restarts score tracking without touching R. Used when a warmed-up
    /// matrix is handed over to a fresh scoring run.
    void reset_score() {
        score_ = 0.0;
        prev_frob_ = cur_frob_;
    }

    /// Back to the initial state: R = I, empty buffer, t = 0.
    void reset() {
        r_.setIdentity();
        cur_frob_ = prev_frob_ = r_.norm();
        score_ = 0.0;
        t_ = 0;
        buffered_ = 0;
        head_ = 0;
        poisoned_ = false;
    }

    /// Bytes held by the state and its scratch space. Constant in t by
    /// construction; exposed so tests can assert the memory bound.
    std::size_t state_bytes() const {
        const auto mat_bytes = [](const Eigen::MatrixXd& m) {
            return static_cast<std::size_t>(m.size()) * sizeof(double);
        };
        return sizeof(*this) + mat_bytes(r_) + mat_bytes(buffer_) + mat_bytes(window_) +
               mat_bytes(xhat_) + mat_bytes(cross_) + mat_bytes(next_r_);
    }

private:
    void check_sample(const Eigen::Ref<const Eigen::VectorXd>& sample) const {
        if (sample.size() != d_)
            throw DimensionError("sample has " + std::to_string(sample.size()) +
                                 " entries, detector expects " + std::to_string(d_));
        if (!sample.allFinite())
            throw ValidationError("sample contains non-finite entries");
    }

    void update_r() {
        xhat_.noalias() = window_ * r_.transpose();
        cross_.noalias() = xhat_.transpose() * xhat_;
        cross_.diagonal().setZero();
        prev_frob_ = cur_frob_;
        if ((cross_.array() == 0.0).all())
            return; // off-diagonal products vanish: R stays bit-identical
        const double rate = cfg_.eta / ((cfg_.window_p + 1) * (d_ - 1));
        next_r_.noalias() = r_ - rate * cross_ * r_;
        if (!next_r_.allFinite()) {
            poisoned_ = true;
            throw DivergenceError(cfg_.eta, t_);
        }
        r_.swap(next_r_);
        cur_frob_ = r_.norm();
    }

    void update_score() {
        score_ = (1.0 - cfg_.gamma) * score_ + cfg_.gamma * std::abs(cur_frob_ - prev_frob_);
    }

    DetectorConfig cfg_;
    int d_;
    Eigen::MatrixXd r_;
    Eigen::MatrixXd buffer_; // ring of the last window_p samples
    Eigen::MatrixXd window_; // scratch, (p+1) x d
    Eigen::MatrixXd xhat_;   // scratch, (p+1) x d
    Eigen::MatrixXd cross_;  // scratch, d x d
    Eigen::MatrixXd next_r_; // scratch, d x d
    double prev_frob_ = 0.0;
    double cur_frob_ = 0.0;
    double score_ = 0.0;
    long t_ = 0;
    int buffered_ = 0;
    int head_ = 0;
    bool poisoned_ = false;
};

} // namespace decorr
