#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "decorr/dataset.hpp"
#include "decorr/errors.hpp"
#include "decorr/rng.hpp"

// Synthetic benchmark streams: zero-mean Gaussian backgrounds with one
// injected window drawn from an alternate distribution. Three anomaly
// families are covered: a switched random covariance structure, a switched
// correlation strength, and a pure mean shift. Block-wise covariance and
// mean-correlation diagnostics mirror how such streams are visualized.

namespace decorr {

/// d x d covariance A * A^T with A filled row-major from N(0, 1).
inline Eigen::MatrixXd random_cov_sigma(int d, std::uint64_t seed) {
    if (d < 2)
        throw DimensionError("random_cov_sigma: d must be >= 2");
    Rng rng(seed);
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            a(i, j) = rng.normal();
    return a * a.transpose();
}

namespace detail {

/// Lower Cholesky factor; PSD-but-singular inputs get 1e-10 diagonal jitter.
inline Eigen::MatrixXd cholesky_factor(Eigen::MatrixXd sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success)
        return llt.matrixL();
    sigma.diagonal().array() += 1e-10;
    llt.compute(sigma);
    if (llt.info() != Eigen::Success)
        throw DegenerateError("covariance is not positive semi-definite");
    return llt.matrixL();
}

/// m draws from N(0, Sigma); one row per sample, normals drawn row-major.
inline Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& sigma, long m, Rng& rng) {
    const int d = static_cast<int>(sigma.rows());
    const Eigen::MatrixXd chol = cholesky_factor(sigma);
    Eigen::MatrixXd out(m, d);
    Eigen::VectorXd z(d);
    for (long i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j)
            z(j) = rng.normal();
        out.row(i) = (chol * z).transpose();
    }
    return out;
}

} // namespace detail

/// Gaussian stream with a random covariance structure (seed fixes both the
/// structure and the draws).
inline Eigen::MatrixXd gen_random_cov(int d, long m, std::uint64_t seed) {
    if (d < 2)
        throw DimensionError("gen_random_cov: d must be >= 2");
    if (m < 1)
        throw ValidationError("gen_random_cov: m must be >= 1");
    Rng rng(seed);
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            a(i, j) = rng.normal();
    const Eigen::MatrixXd sigma = a * a.transpose();
    return detail::sample_gaussian(sigma, m, rng);
}

/// Gaussian stream from Sigma = (1-s) I + s 11^T, then each feature is
/// standardized by its empirical mean and sample (n-1) standard deviation.
inline Eigen::MatrixXd gen_corr_strength(int d, long m, double s, std::uint64_t seed) {
    if (d < 2)
        throw DimensionError("gen_corr_strength: d must be >= 2");
    if (m < 1)
        throw ValidationError("gen_corr_strength: m must be >= 1");
    if (!(s >= 0.0 && s < 1.0))
        throw ConfigError("gen_corr_strength: s must lie in [0, 1)");
    Rng rng(seed);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(d, d, s);
    sigma.diagonal().setConstant(1.0);
    Eigen::MatrixXd x = detail::sample_gaussian(sigma, m, rng);
    for (int j = 0; j < d; ++j) {
        const double mean = x.col(j).mean();
        const double var =
            m > 1 ? (x.col(j).array() - mean).square().sum() / static_cast<double>(m - 1) : 0.0;
        const double sd = std::sqrt(var);
        if (sd == 0.0)
            throw DegenerateError("gen_corr_strength: feature " + std::to_string(j) +
                                  " has zero standard deviation");
        x.col(j) = (x.col(j).array() - mean) / sd;
    }
    return x;
}

/// Block covariances X^T X / (w_c - 1) over consecutive non-overlapping
/// blocks of w_c rows (zero-mean data assumed); the remainder is dropped.
inline std::vector<Eigen::MatrixXd> sliding_cov(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                                int w_c) {
    if (w_c < 2)
        throw ConfigError("sliding_cov: w_c must be >= 2");
    const long blocks = data.rows() / w_c;
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(blocks));
    for (long b = 0; b < blocks; ++b) {
        const auto x = data.middleRows(b * w_c, w_c);
        out.emplace_back(x.transpose() * x / static_cast<double>(w_c - 1));
    }
    return out;
}

/// Mean over all d^2 entries of the correlation matrix of `cov`.
inline double mean_correlation(const Eigen::Ref<const Eigen::MatrixXd>& cov) {
    const long d = cov.rows();
    if (cov.cols() != d)
        throw DimensionError("mean_correlation: covariance must be square");
    for (long i = 0; i < d; ++i)
        if (!(cov(i, i) > 0.0))
            throw DegenerateError("mean_correlation: non-positive variance on the diagonal");
    double sum = 0.0;
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j)
            sum += cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
    return sum / static_cast<double>(d * d);
}

/// Mean of the off-diagonal entries of the correlation matrix.
inline double mean_offdiag_correlation(const Eigen::Ref<const Eigen::MatrixXd>& cov) {
    const long d = cov.rows();
    if (d < 2)
        throw DimensionError("mean_offdiag_correlation: need d >= 2");
    const double full = mean_correlation(cov) * static_cast<double>(d * d);
    return (full - static_cast<double>(d)) / static_cast<double>(d * (d - 1));
}

enum class GeneratorKind { RandomCovariance, CorrelationStrength, MeanShift };

inline const char* to_string(GeneratorKind kind) {
    switch (kind) {
    case GeneratorKind::RandomCovariance: return "random_covariance";
    case GeneratorKind::CorrelationStrength: return "correlation_strength";
    case GeneratorKind::MeanShift: return "mean_shift";
    }
    return "unknown";
}

inline GeneratorKind generator_kind_from(const std::string& s) {
    if (s == "random_covariance") return GeneratorKind::RandomCovariance;
    if (s == "correlation_strength") return GeneratorKind::CorrelationStrength;
    if (s == "mean_shift") return GeneratorKind::MeanShift;
    throw ParseError("unknown generator kind '" + s + "'");
}

/// Recipe for one benchmark scenario: a background stream plus one window
/// of rows replaced by draws from the alternate distribution.
struct ScenarioSpec {
    std::string label;
    int d = 2;
    long m = 10000;
    GeneratorKind kind = GeneratorKind::RandomCovariance;
    std::uint64_t seed = 0;
    long anomaly_start = 0;
    long anomaly_length = 100;
    // alternate-distribution parameters, used per kind:
    std::uint64_t alt_seed = 0;     // RandomCovariance: seed of the window covariance
    double s_background = 0.05;     // CorrelationStrength only
    double s_anomaly = 0.9;         // CorrelationStrength only
    double mean_shift_sigmas = 3.0; // MeanShift only

    void validate() const {
        if (d < 2)
            throw DimensionError("scenario '" + label + "': d must be >= 2");
        if (m < 2)
            throw ValidationError("scenario '" + label + "': m must be >= 2");
        if (anomaly_start < 0 || anomaly_length < 1 || anomaly_start + anomaly_length > m)
            throw ValidationError("scenario '" + label + "': anomaly window out of bounds");
        if (anomaly_length >= m)
            throw ValidationError("scenario '" + label + "': anomalies must be the minority");
        if (kind == GeneratorKind::CorrelationStrength) {
            if (!(s_background >= 0.0 && s_background < 1.0) ||
                !(s_anomaly >= 0.0 && s_anomaly < 1.0))
                throw ConfigError("scenario '" + label + "': s must lie in [0, 1)");
        }
    }
};

inline void to_json(nlohmann::json& j, const ScenarioSpec& spec) {
    j = nlohmann::json{{"label", spec.label},
                       {"d", spec.d},
                       {"m", spec.m},
                       {"kind", to_string(spec.kind)},
                       {"seed", spec.seed},
                       {"anomaly_start", spec.anomaly_start},
                       {"anomaly_length", spec.anomaly_length},
                       {"alt_seed", spec.alt_seed},
                       {"s_background", spec.s_background},
                       {"s_anomaly", spec.s_anomaly},
                       {"mean_shift_sigmas", spec.mean_shift_sigmas}};
}

inline void from_json(const nlohmann::json& j, ScenarioSpec& spec) {
    j.at("label").get_to(spec.label);
    j.at("d").get_to(spec.d);
    j.at("m").get_to(spec.m);
    spec.kind = generator_kind_from(j.at("kind").get<std::string>());
    j.at("seed").get_to(spec.seed);
    j.at("anomaly_start").get_to(spec.anomaly_start);
    j.at("anomaly_length").get_to(spec.anomaly_length);
    j.at("alt_seed").get_to(spec.alt_seed);
    j.at("s_background").get_to(spec.s_background);
    j.at("s_anomaly").get_to(spec.s_anomaly);
    j.at("mean_shift_sigmas").get_to(spec.mean_shift_sigmas);
}

inline LabeledDataset build_scenario(const ScenarioSpec& spec) {
    spec.validate();
    LabeledDataset ds;
    ds.name = spec.label;
    for (int j = 0; j < spec.d; ++j)
        ds.feature_names.push_back("f" + std::to_string(j));

    switch (spec.kind) {
    case GeneratorKind::RandomCovariance:
        ds.data = gen_random_cov(spec.d, spec.m, spec.seed);
        ds.data.middleRows(spec.anomaly_start, spec.anomaly_length) =
            gen_random_cov(spec.d, spec.anomaly_length, spec.alt_seed);
        break;
    case GeneratorKind::CorrelationStrength:
        // Same seed for both blocks: only the correlation strength switches.
        ds.data = gen_corr_strength(spec.d, spec.m, spec.s_background, spec.seed);
        ds.data.middleRows(spec.anomaly_start, spec.anomaly_length) =
            gen_corr_strength(spec.d, spec.anomaly_length, spec.s_anomaly, spec.seed);
        break;
    case GeneratorKind::MeanShift: {
        ds.data = gen_random_cov(spec.d, spec.m, spec.seed);
        const Eigen::MatrixXd sigma = random_cov_sigma(spec.d, spec.seed);
        const Eigen::RowVectorXd shift =
            spec.mean_shift_sigmas * sigma.diagonal().array().sqrt().transpose();
        ds.data.middleRows(spec.anomaly_start, spec.anomaly_length).rowwise() += shift;
        break;
    }
    }

    ds.labels.assign(static_cast<std::size_t>(spec.m), 0);
    for (long i = spec.anomaly_start; i < spec.anomaly_start + spec.anomaly_length; ++i)
        ds.labels[static_cast<std::size_t>(i)] = 1;
    return ds;
}

namespace detail {

inline double corr_matrix_distance(const Eigen::MatrixXd& sigma_a,
                                   const Eigen::MatrixXd& sigma_b) {
    const auto to_corr = [](const Eigen::MatrixXd& sigma) {
        const Eigen::VectorXd inv_sd = sigma.diagonal().array().sqrt().inverse();
        return Eigen::MatrixXd(inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal());
    };
    return (to_corr(sigma_a) - to_corr(sigma_b)).norm();
}

/// Window placement: the first 10% of the stream is kept anomaly-free so
/// the detector has a learning prefix.
inline void draw_window(ScenarioSpec& spec, Rng& rng) {
    spec.anomaly_length = rng.below(2) == 0 ? 100 : 1000;
    const long lo = (spec.m + 9) / 10;
    const long hi = spec.m - spec.anomaly_length;
    if (hi < lo)
        throw ValidationError("scenario '" + spec.label + "': stream too short for the window");
    spec.anomaly_start = lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

inline ScenarioSpec draw_random_cov_scenario(std::string label, int d, long m, Rng& rng) {
    ScenarioSpec spec;
    spec.label = std::move(label);
    spec.d = d;
    spec.m = m;
    spec.kind = GeneratorKind::RandomCovariance;
    draw_window(spec, rng);
    spec.seed = rng.next_u64();
    const Eigen::MatrixXd sigma_bg = random_cov_sigma(d, spec.seed);
    // Redraw until the window covariance differs in correlation structure;
    // a pure scale change is invisible to a converged decorrelator.
    const double margin = d == 2 ? 0.7 : 1.2;
    double best_dist = -1.0;
    std::uint64_t best_seed = 0;
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::uint64_t cand = rng.next_u64();
        const double dist = corr_matrix_distance(sigma_bg, random_cov_sigma(d, cand));
        if (dist > best_dist) {
            best_dist = dist;
            best_seed = cand;
        }
        if (dist >= margin)
            break;
    }
    spec.alt_seed = best_seed;
    return spec;
}

inline ScenarioSpec draw_corr_strength_scenario(std::string label, int d, long m, Rng& rng) {
    ScenarioSpec spec;
    spec.label = std::move(label);
    spec.d = d;
    spec.m = m;
    spec.kind = GeneratorKind::CorrelationStrength;
    draw_window(spec, rng);
    spec.seed = rng.next_u64();
    const double weak = 0.3 * rng.uniform();
    const double strong = 0.6 + 0.35 * rng.uniform();
    const bool weak_background = rng.below(2) == 0;
    spec.s_background = weak_background ? weak : strong;
    spec.s_anomaly = weak_background ? strong : weak;
    return spec;
}

inline ScenarioSpec draw_mean_shift_scenario(std::string label, int d, long m, Rng& rng) {
    ScenarioSpec spec;
    spec.label = std::move(label);
    spec.d = d;
    spec.m = m;
    spec.kind = GeneratorKind::MeanShift;
    draw_window(spec, rng);
    spec.seed = rng.next_u64();
    spec.mean_shift_sigmas = 3.0;
    return spec;
}

} // namespace detail

/// The 20-scenario benchmark: L1..L12 with d = 2 (L11 is a pure mean shift)
/// and H1..H8 with d = 8 (H8 switches correlation strength 0.05 -> 0.9).
/// Every scenario derives its own seed stream from the master seed, so the
/// suite is reproducible from one knob and scenarios are order-independent.
inline std::vector<ScenarioSpec> scenario_suite(std::uint64_t master_seed, long m = 10000) {
    std::vector<ScenarioSpec> suite;
    suite.reserve(20);
    for (int k = 0; k < 20; ++k) {
        const bool low_dim = k < 12;
        const int d = low_dim ? 2 : 8;
        const std::string label =
            low_dim ? "L" + std::to_string(k + 1) : "H" + std::to_string(k - 11);
        Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(k)));
        if (label == "L11") {
            suite.push_back(detail::draw_mean_shift_scenario(label, d, m, rng));
        } else if (label == "H8") {
            ScenarioSpec spec = detail::draw_corr_strength_scenario(label, d, m, rng);
            spec.s_background = 0.05;
            spec.s_anomaly = 0.9;
            suite.push_back(spec);
        } else if (rng.below(2) == 0) {
            suite.push_back(detail::draw_random_cov_scenario(label, d, m, rng));
        } else {
            suite.push_back(detail::draw_corr_strength_scenario(label, d, m, rng));
        }
    }
    return suite;
}

} // namespace decorr
