#include "gwi/oracle.hpp"

#include "gwi/error.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace gwi {

namespace {

constexpr double kSeriesTolerance = 1e-14;
constexpr long kMaxSeriesIndex = 100000;

// Sums term(i) for i >= 0 until |term| < tol * |sum| holds on three
// consecutive terms. Throws SeriesDivergence when the terms stop
// shrinking or the index cap is hit.
template <class Term>
SeriesValue sum_series(Term term, double tol, const char* what) {
    SeriesValue out;
    double sum = 0.0;
    int quiet = 0;
    std::vector<double> magnitudes;
    for (long i = 0; i < kMaxSeriesIndex; ++i) {
        const double t = term(i);
        if (!std::isfinite(t))
            throw Error(ErrorKind::SeriesDivergence, fmt::format("{}: non-finite term at index {}", what, i));
        sum += t;
        magnitudes.push_back(std::abs(t));
        out.terms = i + 1;
        if (std::abs(t) <= tol * std::abs(sum) || std::abs(t) < std::numeric_limits<double>::min()) {
            if (++quiet >= 3) {
                out.value = sum;
                return out;
            }
        } else {
            quiet = 0;
        }
        constexpr long kWindow = 32;
        if (i >= 2 * kWindow && magnitudes[i] >= magnitudes[i - kWindow] && magnitudes[i] > 0.0)
            throw Error(ErrorKind::SeriesDivergence,
                        fmt::format("{}: terms not decreasing (|a_{}| = {:.3e} >= |a_{}| = {:.3e})", what, i,
                                    magnitudes[i], i - kWindow, magnitudes[i - kWindow]));
    }
    throw Error(ErrorKind::SeriesDivergence, fmt::format("{}: no convergence within {} terms", what, kMaxSeriesIndex));
}

// Wynn's epsilon algorithm on the partial sums. Among the even columns,
// returns the last entry of the one whose two last entries agree best.
double wynn_epsilon(const std::vector<double>& partial_sums) {
    const std::size_t m = partial_sums.size();
    std::vector<double> prev(m + 1, 0.0);  // column -1
    std::vector<double> curr = partial_sums;
    double best = partial_sums.back();
    double best_spread = m >= 2 ? std::abs(partial_sums[m - 1] - partial_sums[m - 2])
                                : std::numeric_limits<double>::infinity();
    for (std::size_t col = 1; col < m; ++col) {
        std::vector<double> next(m - col);
        bool ok = true;
        for (std::size_t i = 0; i + col < m; ++i) {
            const double diff = curr[i + 1] - curr[i];
            const double value = prev[i + 1] + 1.0 / diff;
            if (diff == 0.0 || !std::isfinite(value)) {
                ok = false;
                break;
            }
            next[i] = value;
        }
        if (!ok) break;
        prev = std::move(curr);
        curr = std::move(next);
        if (col % 2 == 0 && curr.size() >= 2) {
            const double spread = std::abs(curr.back() - curr[curr.size() - 2]);
            if (spread < best_spread) {
                best_spread = spread;
                best = curr.back();
            }
        }
    }
    return best;
}

}  // namespace

// ---------------------------------------------------------------------------

NuSequence::NuSequence(const ImmigrationLaw& law) : law_(law) {}

double NuSequence::operator()(long lag) const noexcept {
    const long h = lag < 0 ? -lag : lag;
    if (const auto* iid = std::get_if<IidPoisson>(&law_)) return h == 0 ? iid->rate : 0.0;
    if (const auto* product = std::get_if<ProductPoisson>(&law_)) {
        if (h >= product->window) return 0.0;
        const double mu = product->base_rate;
        const long overlap = product->window - h;
        return std::pow(mu + mu * mu, static_cast<double>(overlap)) * std::pow(mu, 2.0 * static_cast<double>(h)) -
               std::pow(mu, 2.0 * product->window);
    }
    const auto& chain = std::get<TwoStateMarkov>(law_);
    const double pi1 = chain.stationary_one();
    return pi1 * (1.0 - pi1) * std::pow(chain.second_eigenvalue(), static_cast<double>(h));
}

double NuSequence::generating_function(double x) const {
    if (std::holds_alternative<IidPoisson>(law_)) return 0.0;
    if (const auto* product = std::get_if<ProductPoisson>(&law_)) {
        double sum = 0.0;
        double power = 1.0;
        for (long j = 0; j + 1 < product->window; ++j) {
            sum += (*this)(j + 1) * power;
            power *= x;
        }
        return sum;
    }
    const auto& chain = std::get<TwoStateMarkov>(law_);
    const double rho = chain.second_eigenvalue();
    const double denom = 1.0 - rho * x;
    if (std::abs(denom) < 1e-300)
        throw Error(ErrorKind::SeriesDivergence, fmt::format("generating function has a pole at x = {}", x));
    const double pi1 = chain.stationary_one();
    return pi1 * (1.0 - pi1) * rho / denom;
}

double NuSequence::decay_rate() const noexcept {
    if (const auto* chain = std::get_if<TwoStateMarkov>(&law_)) return std::abs(chain->second_eigenvalue());
    return 0.0;
}

std::optional<long> NuSequence::support() const noexcept {
    if (std::holds_alternative<IidPoisson>(law_)) return 0;
    if (const auto* product = std::get_if<ProductPoisson>(&law_)) return product->window - 1;
    const auto& chain = std::get<TwoStateMarkov>(law_);
    if (chain.second_eigenvalue() == 0.0) return 0;
    return std::nullopt;
}

NuSequence nu_sequence(const ModelSpec& spec) { return NuSequence(spec.immigration()); }

// ---------------------------------------------------------------------------

double c1(const ModelSpec& spec) { return spec.m0() / (1.0 - spec.lambda0()); }

double c2(const ModelSpec& spec) {
    const double l = spec.lambda0();
    const double m = spec.m0();
    const double f = nu_sequence(spec).generating_function(l);
    const double second_eps = spec.var_eps() + m * m;
    return (spec.var_xi() * m / (1.0 - l) + 2.0 * l * (m * m / (1.0 - l) + f) + second_eps) / (1.0 - l * l);
}

double chi(const ModelSpec& spec, long k) {
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "chi_k requires k >= 0");
    const NuSequence nu = nu_sequence(spec);
    const double l = spec.lambda0();
    if (const auto last = nu.support()) {
        double sum = 0.0;
        double power = 1.0;
        for (long i = 0; k + i + 1 <= *last; ++i) {
            sum += power * nu(k + i + 1);
            power *= l;
        }
        return -sum;
    }
    double power = 1.0;
    const auto series = sum_series(
        [&](long i) {
            const double t = power * nu(k + i + 1);
            power *= l;
            return t;
        },
        kSeriesTolerance, "chi");
    return -series.value;
}

CovarianceTable::CovarianceTable(const ModelSpec& spec, long max_lag)
    : c1_(gwi::c1(spec)), c2_(gwi::c2(spec)) {
    if (max_lag < -1) throw Error(ErrorKind::InvalidArgument, "max_lag must be >= -1");
    const double l = spec.lambda0();
    gap_.reserve(static_cast<std::size_t>(max_lag + 2));
    gap_.push_back(c1_ * c1_ - c2_);
    for (long k = 0; k <= max_lag; ++k) {
        chi_.push_back(gwi::chi(spec, k));
        gap_.push_back(l * gap_.back() + chi_.back());
    }
}

double CovarianceTable::gap(long k) const {
    if (k < -1 || k > max_lag())
        throw Error(ErrorKind::InvalidArgument, fmt::format("lag {} outside covariance table [-1, {}]", k, max_lag()));
    return gap_[static_cast<std::size_t>(k + 1)];
}

double u_k(const ModelSpec& spec, long k) {
    if (k < -1) throw Error(ErrorKind::InvalidArgument, "u_k requires k >= -1");
    const double a = c1(spec);
    const double b = c2(spec);
    if (k == -1) return b;
    const double l = spec.lambda0();
    double inner = l * (a * a - b);
    double inv_power = 1.0;
    for (long j = 0; j <= k; ++j) {
        inner += inv_power * chi(spec, j);
        inv_power /= l;
    }
    return a * a - std::pow(l, static_cast<double>(k)) * inner;
}

double v_k(const ModelSpec& spec, long k) {
    const double m = spec.m0();
    return m * m / (1.0 - spec.lambda0()) - chi(spec, k);
}

double xi(double lambda, double m, double var_xi, double var_eps, const std::function<double(double)>& f) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw Error(ErrorKind::DomainError, fmt::format("xi requires lambda in (0,1), got {}", lambda));
    const double one_minus_sq = 1.0 - lambda * lambda;
    const double f_lambda = f(lambda);
    const double f_inverse = f(1.0 / lambda);
    if (!std::isfinite(f_lambda) || !std::isfinite(f_inverse))
        throw Error(ErrorKind::SeriesDivergence, "generating function not evaluable at lambda or 1/lambda");
    // The reproduction-variance term carries 1/(1 - lambda): it is -lambda
    // times the Vxi part of Var(Y_0) = (Vxi C1 + Veps) / (1 - lambda^2) + ...
    return -var_xi * m * lambda / (one_minus_sq * (1.0 - lambda)) - var_eps * lambda / one_minus_sq -
           lambda * lambda * f_lambda / one_minus_sq - f_inverse / one_minus_sq;
}

double xi_plus_lambda_form(const ModelSpec& spec) {
    const double l = spec.lambda0();
    const double one_minus_sq = 1.0 - l * l;
    return xi(spec) + spec.var_xi() * spec.m0() * l / one_minus_sq * (1.0 / (1.0 - l) - 1.0 / (1.0 + l));
}

double xi(const ModelSpec& spec) {
    const NuSequence nu = nu_sequence(spec);
    return xi(spec.lambda0(), spec.m0(), spec.var_xi(), spec.var_eps(),
              [&nu](double x) { return nu.generating_function(x); });
}

SeriesValue xi_series(const ModelSpec& spec) {
    const double l = spec.lambda0();
    const double a = c1(spec);
    const double offset = l * (a * a - c2(spec));
    auto term = [&](long j) { return std::pow(l, -static_cast<double>(j)) * chi(spec, j); };

    try {
        SeriesValue plain = sum_series(term, kSeriesTolerance, "xi series");
        plain.value += offset;
        return plain;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::SeriesDivergence) throw;
    }

    // Divergent geometric-type series: take the antilimit of the first
    // partial sums, which is the analytic continuation in lambda.
    constexpr long kPartialSums = 12;
    std::vector<double> partial;
    double sum = 0.0;
    for (long j = 0; j < kPartialSums; ++j) {
        sum += term(j);
        partial.push_back(sum);
    }
    SeriesValue out;
    out.value = wynn_epsilon(partial) + offset;
    out.terms = kPartialSums;
    out.accelerated = true;
    return out;
}

Eigen::Matrix2d big_sigma(const ModelSpec& spec, double truncation_tolerance, SigmaVariant variant) {
    const double l = spec.lambda0();
    const double m = spec.m0();
    const double a = c1(spec);
    const double b = c2(spec);
    const double a2 = a * a;
    const double a4 = a2 * a2;
    const double tol = truncation_tolerance;

    // Lazily extended covariance table.
    std::vector<double> gaps{a2 - b};  // gaps[k+1] = C1^2 - u_k
    std::vector<double> chis;
    auto ensure = [&](long k) {
        while (static_cast<long>(chis.size()) <= k) {
            chis.push_back(chi(spec, static_cast<long>(chis.size())));
            gaps.push_back(l * gaps.back() + chis.back());
        }
    };
    auto gap = [&](long k) {
        ensure(k);
        return gaps[static_cast<std::size_t>(k + 1)];
    };
    auto chi_at = [&](long k) {
        ensure(k);
        return chis[static_cast<std::size_t>(k)];
    };
    auto u = [&](long k) { return a2 - gap(k); };

    const double sum_gap = sum_series([&](long i) { return gap(i); }, tol, "sum (C1^2 - u_{h-1})").value;
    const double sum_chi = sum_series([&](long i) { return chi_at(i); }, tol, "sum chi_h").value;
    const double sum_u_sq =
        sum_series([&](long i) { return u(i) * u(i) - a4; }, tol, "sum (u_{h-1}^2 - C1^4)").value;
    const double sum_chi_tail =
        variant == SigmaVariant::Weighted
            ? sum_series([&](long i) { return std::pow(l, -static_cast<double>(i + 1)) * chi_at(i); }, tol,
                         "sum lambda^{-t} chi_{t-1}")
                  .value
            : sum_chi;

    const double factor = m / ((1.0 - l) * (1.0 - l));
    Eigen::Matrix2d out;
    out(0, 0) = 2.0 * sum_gap;
    out(0, 1) = -2.0 * factor * sum_chi + a / (1.0 - l) * (b - a2) - 3.0 * a * sum_gap;
    out(1, 0) = out(0, 1);
    // sum_{h>=0} (u_{h-1} - C1^2) = (C2 - C1^2) - sum_gap
    out(1, 1) = b * b - a4 + 2.0 * sum_u_sq + 2.0 * a2 * ((b - a2) - sum_gap) - 2.0 * a * factor * sum_chi_tail;
    return out;
}

Eigen::Vector3d population_triple(const ModelSpec& spec, int k0) {
    if (k0 < 1) throw Error(ErrorKind::InvalidArgument, "k0 must be >= 1");
    const CovarianceTable table(spec, k0 - 1);
    return {table.c1(), table.u(k0 - 2), table.u(k0 - 1)};
}

}  // namespace gwi
