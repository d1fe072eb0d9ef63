#pragma once

#include "gwi/model.hpp"

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

namespace gwi {

/// Immigration autocovariance nu_h = Cov(eps_0, eps_h) together with its
/// generating function f(x) = sum_{j>=0} nu_{j+1} x^j (lags >= 1 only; nu_0
/// enters the moments through var_eps).
class NuSequence {
public:
    explicit NuSequence(const ImmigrationLaw& law);

    double operator()(long lag) const noexcept;

    /// Closed form (polynomial or rational). Throws SeriesDivergence at a pole.
    double generating_function(double x) const;

    /// Geometric decay rate zeta with |nu_h| = O(zeta^h); 0 when finitely supported.
    double decay_rate() const noexcept;

    /// Largest lag with nonzero covariance, when finite.
    std::optional<long> support() const noexcept;

private:
    ImmigrationLaw law_;
};

NuSequence nu_sequence(const ModelSpec& spec);

double c1(const ModelSpec& spec);
double c2(const ModelSpec& spec);

/// chi_k = -lambda0^{-k} sum_{j>=k} lambda0^j nu_{j+1}, by truncated series.
double chi(const ModelSpec& spec, long k);

/// Covariance table D_k = C1^2 - u_k for k = -1..max_lag, with u_{-1} = C2.
/// Built from the first-order recursion D_k = lambda0 D_{k-1} + chi_k.
class CovarianceTable {
public:
    CovarianceTable(const ModelSpec& spec, long max_lag);

    double c1() const noexcept { return c1_; }
    double c2() const noexcept { return c2_; }
    long max_lag() const noexcept { return static_cast<long>(gap_.size()) - 2; }

    /// C1^2 - u_k, k in [-1, max_lag].
    double gap(long k) const;
    /// u_k = E(Y_0 Y_{k+1}), k in [-1, max_lag].
    double u(long k) const { return c1_ * c1_ - gap(k); }
    double chi(long k) const { return chi_.at(static_cast<std::size_t>(k)); }

private:
    double c1_;
    double c2_;
    std::vector<double> gap_;  // gap_[k+1]
    std::vector<double> chi_;
};

/// u_k from the closed expansion C1^2 - lambda0^k (sum_{j<=k} lambda0^{-j} chi_j + lambda0 (C1^2 - C2)).
double u_k(const ModelSpec& spec, long k);

/// v_k = E(eps_1 Y_{-k}) = m0^2 / (1 - lambda0) - chi_k.
double v_k(const ModelSpec& spec, long k);

/// Limit constant of lambda0^{-k} (C1^2 - u_k), closed form in the generating function.
double xi(double lambda, double m, double var_xi, double var_eps, const std::function<double(double)>& f);
double xi(const ModelSpec& spec);

/// The closed form with (1 + lambda) in place of (1 - lambda) in the
/// reproduction-variance term. It disagrees with the defining series whenever
/// Vxi > 0; kept only to report how far off that version is.
double xi_plus_lambda_form(const ModelSpec& spec);

struct SeriesValue {
    double value = 0.0;
    long terms = 0;
    /// True when the plain partial sums did not settle and the value is the
    /// Wynn epsilon antilimit of the first partial sums.
    bool accelerated = false;
};

/// sum_j lambda0^{-j} chi_j + lambda0 (C1^2 - C2) from the defining series.
SeriesValue xi_series(const ModelSpec& spec);

enum class SigmaVariant {
    /// (2,2) entry uses sum_t lambda0^{-t} chi_{t-1}.
    Weighted,
    /// (2,2) entry uses sum_t chi_{t-1}.
    Unweighted,
};

/// Limiting covariance of S_n(k_n)/sqrt(n) in the two-term expansion. Throws
/// SeriesDivergence if one of the series does not converge.
Eigen::Matrix2d big_sigma(const ModelSpec& spec, double truncation_tolerance = 1e-14,
                          SigmaVariant variant = SigmaVariant::Weighted);

/// (C1, u_{k0-2}, u_{k0-1}): the population values of the moment triple.
Eigen::Vector3d population_triple(const ModelSpec& spec, int k0);

}  // namespace gwi
