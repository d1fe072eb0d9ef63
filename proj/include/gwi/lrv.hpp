#pragma once

#include "gwi/moments.hpp"

#include <Eigen/Dense>
#include <vector>

namespace gwi {

using VectorSeries = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Centered vectors (Y_t - Ybar, Y_t Y_{t+k0-1} - Ybar_{k0-1,n}, Y_t Y_{t+k0} - Ybar_{k0,n}), t = 1..n.
struct ObservedVectorSeries {
    VectorSeries vectors;
    int k0 = 1;
    MomentTriple moments;
};

ObservedVectorSeries build_observed_series(std::span<const Count> values, int k0, std::size_t n);

struct ArFit {
    int order = 0;
    std::vector<Eigen::Matrix3d> coefficients;  // Phi_1..Phi_r
    VectorSeries residuals;                     // rows t = r+1..n
    Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
    /// max |(1/n) sum_t e_t x_t'| over all regressor columns.
    double orthogonality = 0.0;
    bool ridge_used = false;
};

/// Least squares VAR(r) without intercept, regression rows t = r+1..n.
/// The residual covariance divides by n (the full series length).
ArFit fit_ar(const VectorSeries& series, int order);
inline ArFit fit_ar(const ObservedVectorSeries& series, int order) { return fit_ar(series.vectors, order); }

/// Phi(1)^{-1} Sigma Phi(1)^{-1}' with Phi(1) = I - sum_k Phi_k, symmetrized.
Eigen::Matrix3d spectral_lrv(const std::vector<Eigen::Matrix3d>& coefficients, const Eigen::Matrix3d& sigma);

/// Delta-method covariance grad_phi' S grad_phi at the sample moment triple.
Eigen::Matrix2d omega_sp(const Eigen::Matrix3d& s_sp, const MomentTriple& moments);

/// max(1, ceil(n^{1/3}) - 1): the largest order strictly below n^{1/3}.
int select_order(std::size_t n);

/// Order in 1..max_order minimizing ln det Sigma_r + 2 * 9 r / (n - r).
int select_order_aic(const VectorSeries& series, int max_order);

enum class OrderRule { CubeRoot, Aic };

struct LrvReport {
    int r = 0;
    std::vector<Eigen::Matrix3d> phi_hat;
    Eigen::Matrix3d sigma_eps_hat = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d s_sp = Eigen::Matrix3d::Zero();
    Eigen::Matrix2d omega_sp = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d omega_standard = Eigen::Matrix2d::Zero();
    MomentEstimates estimates;
    double orthogonality = 0.0;
    bool ridge_used = false;
};

/// Moment estimates plus both variance estimators from one trajectory.
/// Needs n + k0 observations (and n + 1 for the standard estimator).
LrvReport lrv_report(std::span<const Count> values, int k0, std::size_t n, OrderRule rule = OrderRule::CubeRoot);

}  // namespace gwi
