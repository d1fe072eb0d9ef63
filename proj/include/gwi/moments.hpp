#pragma once

#include "gwi/simulate.hpp"

#include <Eigen/Dense>
#include <span>

namespace gwi {

/// Ybar_n = (1/n) sum_{j=1}^n Y_j. Requires n <= values.size().
double sample_mean(std::span<const Count> values, std::size_t n);

/// Ybar_{k,n} = (1/n) sum_{j=1}^n Y_j Y_{j+k}. Requires n + k <= values.size().
/// Accumulated in exact integer arithmetic, so the value does not depend on
/// summation order.
double sample_lag_product(std::span<const Count> values, std::size_t k, std::size_t n);

/// Sample moments (Ybar_n, Ybar_{k0-1,n}, Ybar_{k0,n}).
struct MomentTriple {
    std::size_t n = 0;
    int k0 = 1;
    double ybar = 0.0;
    double ybar_prev = 0.0;  // Ybar_{k0-1,n}
    double ybar_lag = 0.0;   // Ybar_{k0,n}

    Eigen::Vector3d vector() const { return {ybar, ybar_prev, ybar_lag}; }
};

MomentTriple moment_triple(std::span<const Count> values, int k0, std::size_t n);

struct MomentEstimates {
    double r_hat = 0.0;  // estimate of lambda0
    double m_hat = 0.0;  // estimate of m0, equal to ybar * (1 - r_hat)
    int k0 = 1;
    MomentTriple inputs;
};

/// Absolute threshold below which |Ybar^2 - Ybar_{k0-1,n}| is treated as zero.
inline constexpr double kDegenerateDenominator = 1e-12;

/// Moment estimators for (lambda0, m0) under (k0-1)-dependent immigration.
/// Throws DegenerateDenominator when the lag-(k0-1) covariance vanishes.
MomentEstimates estimate(std::span<const Count> values, int k0, std::size_t n);
MomentEstimates estimate(const Trajectory& traj, int k0, std::size_t n);

/// phi(a,b,c) = ((a^2-c)/(a^2-b), a (1 - (a^2-c)/(a^2-b))). Domain error when a^2 == b.
Eigen::Vector2d phi(double a, double b, double c);

/// 3x2 Jacobian: row i is the derivative with respect to (a,b,c)[i], column j
/// is the component phi_j.
Eigen::Matrix<double, 3, 2> grad_phi(double a, double b, double c);

/// Klimko-Nelson sandwich J^{-1} W J^{-1} of the conditional least squares
/// fit Y_t = r Y_{t-1} + m, evaluated at (r_hat, m_hat) over the n pairs
/// (Y_t, Y_{t+1}), t = 1..n. Throws SingularMatrix for a constant trajectory.
Eigen::Matrix2d omega_standard(std::span<const Count> values, std::size_t n, double r_hat, double m_hat);

}  // namespace gwi
