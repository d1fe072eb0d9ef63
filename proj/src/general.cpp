#include "gwi/general.hpp"

#include "gwi/error.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace gwi {

void RegularizerConfig::validate() const {
    if (!(lambda_minus > 0.0 && lambda_minus <= lambda_plus && lambda_plus < 1.0))
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("need 0 < lambda_minus <= lambda_plus < 1, got [{}, {}]", lambda_minus, lambda_plus));
    if (!(k_m > 0.0)) throw Error(ErrorKind::InvalidArgument, "K_m must be positive");
    if (!(c_y > 0.0)) throw Error(ErrorKind::InvalidArgument, "C_Y must be positive");
    if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "log-rate constant c must be positive");
}

double RegularizerConfig::max_log_rate() const { return -1.0 / (2.0 * std::log(lambda_minus)); }

double default_log_rate(double lambda_minus) { return 0.95 * (-1.0 / (2.0 * std::log(lambda_minus))); }

double default_moment_bound(const ModelSpec& spec, double lambda_plus) { return spec.m0() / (1.0 - lambda_plus); }

double km_positive_correlation(double var_xi_min, double m_min, double var_eps_min, double lambda_minus,
                               double lambda_plus) {
    const double lm2 = 1.0 - lambda_minus * lambda_minus;
    return var_xi_min * m_min * lambda_minus / (lm2 * (1.0 + lambda_plus)) + var_eps_min * lambda_minus / lm2;
}

double smoothstep(double x) noexcept {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double x2 = x * x;
    return x2 * x2 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
}

double smoothstep_d1(double x) noexcept {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double s = x * (1.0 - x);
    return 140.0 * s * s * s;
}

double smoothstep_d2(double x) noexcept {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double s = x * (1.0 - x);
    return 420.0 * s * s * (1.0 - 2.0 * x);
}

double varpi_k(double x, int k, const RegularizerConfig& cfg) noexcept {
    if (x <= 0.0) return 0.0;
    const double threshold = 0.5 * cfg.k_m * std::pow(cfg.lambda_minus, k);
    if (threshold > 1e-290) return smoothstep(x / threshold);
    // lambda_minus^k underflows: compare in log space.
    const double log_ratio = std::log(x) - (std::log(0.5 * cfg.k_m) + k * std::log(cfg.lambda_minus));
    if (log_ratio >= 0.0) return 1.0;
    return smoothstep(std::exp(log_ratio));
}

double gate_g(double x, const RegularizerConfig& cfg) noexcept {
    const double plateau = std::max(cfg.c_y, cfg.c_y * cfg.c_y);
    if (x < -1.0 || x > plateau + 1.0) return 0.0;
    if (x < 0.0) return smoothstep(x + 1.0);
    if (x <= plateau) return 1.0;
    return smoothstep(plateau + 1.0 - x);
}

double h_k(double x, int k, const RegularizerConfig& cfg) noexcept {
    const double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    const double w = varpi_k(ax, k, cfg);
    if (w == 0.0) return 0.0;
    return w * std::log(ax) / static_cast<double>(k);
}

double psi_k(double a, double b, int k, const RegularizerConfig& cfg) noexcept {
    const double g = gate_g(a, cfg) * gate_g(b, cfg);
    if (g == 0.0) return 0.0;
    return g * h_k(a * a - b, k, cfg);
}

int lag_for(std::size_t n, const RegularizerConfig& cfg, const LagRule& rule) {
    if (std::holds_alternative<SqrtLag>(rule)) {
        auto root = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
        while (root * root > n) --root;
        while ((root + 1) * (root + 1) <= n) ++root;
        return static_cast<int>(root);
    }
    if (const auto* fixed = std::get_if<FixedLag>(&rule)) return fixed->k;
    return static_cast<int>(std::floor(cfg.c * std::log(static_cast<double>(n))));
}

GeneralEstimate s_hat(std::span<const Count> values, std::size_t n, const RegularizerConfig& cfg,
                      const LagRule& rule) {
    cfg.validate();
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "general estimator needs n >= 2");
    GeneralEstimate out;
    out.n = n;
    out.k_n = lag_for(n, cfg, rule);
    if (out.k_n < 1)
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("k_n = {} for n = {}: n too small for c = {}", out.k_n, n, cfg.c));

    const auto lag = static_cast<std::size_t>(out.k_n) + 1;
    out.ybar = sample_mean(values, n);
    out.ybar_lag = sample_lag_product(values, lag, n);

    const double diff = out.ybar * out.ybar - out.ybar_lag;
    const double k = static_cast<double>(out.k_n);
    out.raw_log = diff == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(diff)) / k;
    out.gate_ybar = gate_g(out.ybar, cfg);
    out.gate_ybar_lag = gate_g(out.ybar_lag, cfg);
    out.gate_varpi = varpi_k(std::abs(diff), out.k_n, cfg);
    out.s_hat = psi_k(out.ybar, out.ybar_lag, out.k_n, cfg);
    out.n_hat = out.ybar * (1.0 - std::exp(out.s_hat));
    return out;
}

TwoTermPrediction two_term_prediction(const ModelSpec& spec, std::size_t n, const RegularizerConfig& cfg,
                                      const LagRule& rule, SigmaVariant variant) {
    cfg.validate();
    TwoTermPrediction out;
    out.k_n = lag_for(n, cfg, rule);
    if (out.k_n < 1) throw Error(ErrorKind::InvalidArgument, "k_n must be >= 1");
    const double k = static_cast<double>(out.k_n);
    const double lambda = spec.lambda0();

    out.xi = xi(spec);
    out.bias_term = std::log(std::abs(out.xi)) / k;
    out.noise_scale = 1.0 / (std::sqrt(static_cast<double>(n)) * k * std::pow(lambda, k));

    out.zeta = nu_sequence(spec).decay_rate();
    out.c_lower = out.zeta > 0.0 ? -1.0 / (2.0 * std::log(out.zeta)) : 0.0;
    out.c_upper = cfg.max_log_rate();
    out.c_admissible = cfg.c > out.c_lower && cfg.c < out.c_upper;
    out.decay_admissible = out.zeta < cfg.lambda_minus;

    try {
        const Eigen::Matrix2d sigma = big_sigma(spec, 1e-14, variant);
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(sigma);
        const Eigen::Matrix2d psd = eig.eigenvectors() *
                                    eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
                                    eig.eigenvectors().transpose();
        const double c1v = c1(spec);
        const Eigen::RowVector2d v(2.0 * c1v / std::abs(out.xi), -1.0 / std::abs(out.xi));
        out.sigma = std::max(0.0, (v * psd * v.transpose())(0, 0));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::SeriesDivergence) throw;
        out.sigma_error = e.what();
    }
    return out;
}

}  // namespace gwi
