#include "gwi/moments.hpp"

#include "gwi/error.hpp"

#include <cmath>
#include <fmt/format.h>

namespace gwi {

namespace {

void require_length(std::span<const Count> values, std::size_t needed, const char* what) {
    if (values.size() < needed)
        throw Error(ErrorKind::InsufficientLength,
                    fmt::format("{} needs {} observations, trajectory has {}", what, needed, values.size()));
}

}  // namespace

double sample_mean(std::span<const Count> values, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample size must be positive");
    require_length(values, n, "sample mean");
    Count total = 0;
    for (std::size_t j = 0; j < n; ++j) total += values[j];
    return static_cast<double>(total) / static_cast<double>(n);
}

double sample_lag_product(std::span<const Count> values, std::size_t k, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample size must be positive");
    require_length(values, n + k, "lagged product mean");
    Count total = 0;
    for (std::size_t j = 0; j < n; ++j) total += values[j] * values[j + k];
    return static_cast<double>(total) / static_cast<double>(n);
}

MomentTriple moment_triple(std::span<const Count> values, int k0, std::size_t n) {
    if (k0 < 1) throw Error(ErrorKind::InvalidArgument, "k0 must be >= 1");
    const auto k = static_cast<std::size_t>(k0);
    require_length(values, n + k, "moment triple");
    return MomentTriple{n, k0, sample_mean(values, n), sample_lag_product(values, k - 1, n),
                        sample_lag_product(values, k, n)};
}

Eigen::Vector2d phi(double a, double b, double c) {
    const double denom = a * a - b;
    if (denom == 0.0) throw Error(ErrorKind::DomainError, "phi undefined on a^2 == b");
    const double ratio = (a * a - c) / denom;
    return {ratio, a * (1.0 - ratio)};
}

Eigen::Matrix<double, 3, 2> grad_phi(double a, double b, double c) {
    const double denom = a * a - b;
    if (denom == 0.0) throw Error(ErrorKind::DomainError, "grad_phi undefined on a^2 == b");
    const double numer = a * a - c;
    const double ratio = numer / denom;
    const double d_a = 2.0 * a * (c - b) / (denom * denom);
    const double d_b = numer / (denom * denom);
    const double d_c = -1.0 / denom;

    Eigen::Matrix<double, 3, 2> g;
    g(0, 0) = d_a;
    g(1, 0) = d_b;
    g(2, 0) = d_c;
    g(0, 1) = 1.0 - ratio - a * d_a;
    g(1, 1) = -a * d_b;
    g(2, 1) = -a * d_c;
    return g;
}

MomentEstimates estimate(std::span<const Count> values, int k0, std::size_t n) {
    if (n < 2) throw Error(ErrorKind::InvalidArgument, "moment estimation needs n >= 2");
    const MomentTriple triple = moment_triple(values, k0, n);
    const double sq = triple.ybar * triple.ybar;
    if (std::abs(sq - triple.ybar_prev) < kDegenerateDenominator)
        throw Error(ErrorKind::DegenerateDenominator,
                    fmt::format("|Ybar^2 - Ybar_(k0-1,n)| = {:.3e} below {:.0e}: no identifiable correlation",
                                std::abs(sq - triple.ybar_prev), kDegenerateDenominator));
    const Eigen::Vector2d est = phi(triple.ybar, triple.ybar_prev, triple.ybar_lag);
    return MomentEstimates{est(0), est(1), k0, triple};
}

MomentEstimates estimate(const Trajectory& traj, int k0, std::size_t n) { return estimate(traj.view(), k0, n); }

Eigen::Matrix2d omega_standard(std::span<const Count> values, std::size_t n, double r_hat, double m_hat) {
    if (n < 3) throw Error(ErrorKind::InvalidArgument, "omega_standard needs n >= 3");
    require_length(values, n + 1, "omega_standard");

    Eigen::Matrix2d j_hat = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d w_hat = Eigen::Matrix2d::Zero();
    for (std::size_t t = 0; t < n; ++t) {
        const double prev = static_cast<double>(values[t]);
        const double e = static_cast<double>(values[t + 1]) - r_hat * prev - m_hat;
        const Eigen::Vector2d d(prev, 1.0);
        const Eigen::Matrix2d outer = d * d.transpose();
        j_hat += outer;
        w_hat += e * e * outer;
    }
    j_hat /= static_cast<double>(n);
    w_hat /= static_cast<double>(n);

    const double det = j_hat.determinant();
    if (!(std::abs(det) > 1e-12 * std::max(1.0, j_hat.cwiseAbs().maxCoeff())))
        throw Error(ErrorKind::SingularMatrix, "design matrix J is singular (constant trajectory)");
    const Eigen::Matrix2d j_inv = j_hat.inverse();
    Eigen::Matrix2d out = j_inv * w_hat * j_inv;
    return 0.5 * (out + out.transpose());
}

}  // namespace gwi
