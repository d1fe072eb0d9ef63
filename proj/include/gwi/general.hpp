#pragma once

#include "gwi/moments.hpp"
#include "gwi/oracle.hpp"

#include <optional>
#include <string>
#include <variant>

namespace gwi {

/// Assumption inputs of the regularized log estimator. None of these are
/// estimated: they encode prior knowledge about the parameter region.
struct RegularizerConfig {
    double lambda_minus = 0.1;  // known lower bound on lambda0
    double lambda_plus = 0.95;  // known upper bound on lambda0
    double k_m = 0.0;           // lower bound on |Xi|, mandatory
    double c_y = 0.0;           // bound on the first two absolute moments of Y_0, mandatory
    double c = 0.0;             // k_n = floor(c ln n)

    /// Throws InvalidArgument unless 0 < lambda_minus <= lambda_plus < 1, k_m > 0, c_y > 0, c > 0.
    void validate() const;

    /// Upper end of the admissible log-rate window, -1 / (2 ln lambda_minus).
    double max_log_rate() const;
};

/// 0.95 of the admissible log-rate bound for the given lower bound.
double default_log_rate(double lambda_minus);

/// m0 / (1 - lambda_plus): the moment bound used when a model is known.
double default_moment_bound(const ModelSpec& spec, double lambda_plus);

/// K_m for positively correlated immigration from lower bounds on the
/// variances and the mean immigration.
double km_positive_correlation(double var_xi_min, double m_min, double var_eps_min, double lambda_minus,
                               double lambda_plus);

// ---------------------------------------------------------------------------
// Smooth cut-offs.
// ---------------------------------------------------------------------------

/// Degree-7 smoothstep: 0 below 0, 1 above 1, 35x^4 - 84x^5 + 70x^6 - 20x^7 between.
double smoothstep(double x) noexcept;
double smoothstep_d1(double x) noexcept;
double smoothstep_d2(double x) noexcept;

/// smoothstep(2x / (K_m lambda_minus^k)); equal to 1 from K_m lambda_minus^k / 2 on.
double varpi_k(double x, int k, const RegularizerConfig& cfg) noexcept;

/// Plateau gate: 1 on [0, M] with M = max(C_Y, C_Y^2), zero outside [-1, M+1].
double gate_g(double x, const RegularizerConfig& cfg) noexcept;

/// (1/k) varpi_k(|x|) ln|x|, with H_k(0) = 0.
double h_k(double x, int k, const RegularizerConfig& cfg) noexcept;

/// G(a) G(b) H_k(a^2 - b).
double psi_k(double a, double b, int k, const RegularizerConfig& cfg) noexcept;

// ---------------------------------------------------------------------------

struct LogRateLag {};
struct SqrtLag {};
struct FixedLag {
    int k;
};
/// How k_n is chosen: floor(c ln n) by default, floor(sqrt n) or a fixed value as overrides.
using LagRule = std::variant<LogRateLag, SqrtLag, FixedLag>;

int lag_for(std::size_t n, const RegularizerConfig& cfg, const LagRule& rule = LogRateLag{});

struct GeneralEstimate {
    double s_hat = 0.0;  // estimate of ln lambda0
    double n_hat = 0.0;  // estimate of m0
    int k_n = 0;
    std::size_t n = 0;
    double ybar = 0.0;
    double ybar_lag = 0.0;  // Ybar_{k_n+1,n}
    double raw_log = 0.0;   // (1/k_n) ln|Ybar^2 - Ybar_{k_n+1,n}|; -inf when the difference is 0
    double gate_ybar = 0.0;
    double gate_ybar_lag = 0.0;
    double gate_varpi = 0.0;
};

/// Needs n + k_n + 1 observations. Throws InvalidArgument when k_n = 0.
GeneralEstimate s_hat(std::span<const Count> values, std::size_t n, const RegularizerConfig& cfg,
                      const LagRule& rule = LogRateLag{});

struct TwoTermPrediction {
    int k_n = 0;
    double xi = 0.0;
    double bias_term = 0.0;    // (1/k_n) ln|Xi|
    double noise_scale = 0.0;  // 1 / (sqrt(n) k_n lambda0^k_n)
    std::optional<double> sigma;  // V S V'; empty when the covariance series diverge
    std::string sigma_error;
    double zeta = 0.0;  // decay rate of nu_h
    double c_lower = 0.0;
    double c_upper = 0.0;
    bool c_admissible = false;
    /// zeta < lambda_minus, needed for the expansion to hold at all.
    bool decay_admissible = false;
};

TwoTermPrediction two_term_prediction(const ModelSpec& spec, std::size_t n, const RegularizerConfig& cfg,
                                      const LagRule& rule = LogRateLag{},
                                      SigmaVariant variant = SigmaVariant::Weighted);

}  // namespace gwi
