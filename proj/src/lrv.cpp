#include "gwi/lrv.hpp"

#include "gwi/error.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace gwi {

ObservedVectorSeries build_observed_series(std::span<const Count> values, int k0, std::size_t n) {
    const MomentTriple moments = moment_triple(values, k0, n);
    const auto k = static_cast<std::size_t>(k0);
    ObservedVectorSeries out{VectorSeries(static_cast<Eigen::Index>(n), 3), k0, moments};
    for (std::size_t t = 0; t < n; ++t) {
        const double y = static_cast<double>(values[t]);
        const auto row = static_cast<Eigen::Index>(t);
        out.vectors(row, 0) = y - moments.ybar;
        out.vectors(row, 1) = static_cast<double>(values[t] * values[t + k - 1]) - moments.ybar_prev;
        out.vectors(row, 2) = static_cast<double>(values[t] * values[t + k]) - moments.ybar_lag;
    }
    return out;
}

ArFit fit_ar(const VectorSeries& series, int order) {
    if (order < 0) throw Error(ErrorKind::InvalidArgument, "AR order must be >= 0");
    const Eigen::Index n = series.rows();
    const Eigen::Index r = order;
    ArFit fit;
    fit.order = order;

    if (order == 0) {
        if (n < 1) throw Error(ErrorKind::InsufficientLength, "empty vector series");
        fit.residuals = series;
        fit.sigma = series.transpose() * series / static_cast<double>(n);
        return fit;
    }
    if (n - r < 3 * r + 3)
        throw Error(ErrorKind::InsufficientLength,
                    fmt::format("AR({}) fit needs n - r >= {}, have n = {}", order, 3 * r + 3, n));

    const Eigen::Index rows = n - r;
    Eigen::MatrixXd design(rows, 3 * r);
    for (Eigen::Index lag = 1; lag <= r; ++lag)
        design.middleCols(3 * (lag - 1), 3) = series.middleRows(r - lag, rows);
    const VectorSeries response = series.bottomRows(rows);

    Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::MatrixXd cross = design.transpose() * response;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) {
        const double ridge = 1e-8 * gram.trace() / static_cast<double>(gram.rows());
        gram.diagonal().array() += ridge;
        llt.compute(gram);
        fit.ridge_used = true;
        if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularMatrix, "AR normal equations are singular");
    }
    Eigen::MatrixXd beta = llt.solve(cross);
    fit.residuals = response - design * beta;
    if (!fit.ridge_used) {
        // One step of iterative refinement on the normal equations.
        beta += llt.solve(design.transpose() * fit.residuals);
        fit.residuals = response - design * beta;
    }

    fit.coefficients.resize(static_cast<std::size_t>(order));
    for (Eigen::Index lag = 0; lag < r; ++lag)
        fit.coefficients[static_cast<std::size_t>(lag)] = beta.middleRows(3 * lag, 3).transpose();

    const double scale = 1.0 / static_cast<double>(n);
    fit.sigma = fit.residuals.transpose() * fit.residuals * scale;
    fit.orthogonality = (fit.residuals.transpose() * design * scale).cwiseAbs().maxCoeff();
    return fit;
}

Eigen::Matrix3d spectral_lrv(const std::vector<Eigen::Matrix3d>& coefficients, const Eigen::Matrix3d& sigma) {
    Eigen::Matrix3d phi_one = Eigen::Matrix3d::Identity();
    for (const auto& c : coefficients) phi_one -= c;
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(phi_one);
    if (!lu.isInvertible())
        throw Error(ErrorKind::SingularMatrix, "I - sum Phi_k is singular (unit root in the AR fit)");
    const Eigen::Matrix3d inv = lu.inverse();
    const Eigen::Matrix3d s = inv * sigma * inv.transpose();
    return 0.5 * (s + s.transpose());
}

Eigen::Matrix2d omega_sp(const Eigen::Matrix3d& s_sp, const MomentTriple& moments) {
    const Eigen::Matrix<double, 3, 2> g = grad_phi(moments.ybar, moments.ybar_prev, moments.ybar_lag);
    const Eigen::Matrix2d out = g.transpose() * s_sp * g;
    return 0.5 * (out + out.transpose());
}

int select_order(std::size_t n) {
    // Largest r with r^3 < n, in exact integer arithmetic so perfect cubes
    // are not pushed over by cbrt rounding.
    auto r = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
    while (r > 0 && r * r * r >= n) --r;
    while ((r + 1) * (r + 1) * (r + 1) < n) ++r;
    return std::max(1, static_cast<int>(r));
}

int select_order_aic(const VectorSeries& series, int max_order) {
    if (max_order < 1) throw Error(ErrorKind::InvalidArgument, "max_order must be >= 1");
    int best = 1;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int r = 1; r <= max_order; ++r) {
        const ArFit fit = fit_ar(series, r);
        const double det = fit.sigma.determinant();
        if (!(det > 0.0)) continue;
        const double aic = std::log(det) + 2.0 * 9.0 * r / static_cast<double>(series.rows() - r);
        if (aic < best_aic) {
            best_aic = aic;
            best = r;
        }
    }
    return best;
}

LrvReport lrv_report(std::span<const Count> values, int k0, std::size_t n, OrderRule rule) {
    LrvReport report;
    report.estimates = estimate(values, k0, n);
    const ObservedVectorSeries series = build_observed_series(values, k0, n);
    const int cube_root = select_order(n);
    report.r = rule == OrderRule::CubeRoot ? cube_root : select_order_aic(series.vectors, cube_root);

    ArFit fit = fit_ar(series, report.r);
    report.phi_hat = std::move(fit.coefficients);
    report.sigma_eps_hat = fit.sigma;
    report.orthogonality = fit.orthogonality;
    report.ridge_used = fit.ridge_used;
    report.s_sp = spectral_lrv(report.phi_hat, report.sigma_eps_hat);
    report.omega_sp = omega_sp(report.s_sp, series.moments);
    report.omega_standard = omega_standard(values, n, report.estimates.r_hat, report.estimates.m_hat);
    return report;
}

}  // namespace gwi
