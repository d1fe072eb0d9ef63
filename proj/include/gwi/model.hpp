#pragma once

#include <array>
#include <string>
#include <variant>

namespace gwi {

// ---------------------------------------------------------------------------
// Reproduction laws: the offspring distribution of a single individual.
// ---------------------------------------------------------------------------

struct PoissonReproduction {
    double rate;
};

struct BernoulliReproduction {
    double probability;
};

using ReproductionLaw = std::variant<PoissonReproduction, BernoulliReproduction>;

double mean(const ReproductionLaw& law) noexcept;
double variance(const ReproductionLaw& law) noexcept;
std::string describe(const ReproductionLaw& law);

// ---------------------------------------------------------------------------
// Immigration laws.
// ---------------------------------------------------------------------------

struct IidPoisson {
    double rate;
};

/// eps_n = Z_n * Z_{n-1} * ... * Z_{n-window+1} with Z i.i.d. Poisson(base_rate).
/// Autocovariances vanish from lag `window` on.
struct ProductPoisson {
    int window;
    double base_rate;
};

/// Stationary {0,1}-valued Markov chain; `p[i][j]` is P(eps_{n+1}=j | eps_n=i).
struct TwoStateMarkov {
    std::array<std::array<double, 2>, 2> p;

    /// Stationary probability of state 1.
    double stationary_one() const noexcept { return p[0][1] / (p[0][1] + p[1][0]); }
    /// Second eigenvalue of the transition matrix; nu_h is proportional to its powers.
    double second_eigenvalue() const noexcept { return 1.0 - p[0][1] - p[1][0]; }
};

using ImmigrationLaw = std::variant<IidPoisson, ProductPoisson, TwoStateMarkov>;

double mean(const ImmigrationLaw& law) noexcept;
double variance(const ImmigrationLaw& law) noexcept;
/// Number of base variables entering one immigrant count (k0 for products, 1 otherwise).
int dependence_window(const ImmigrationLaw& law) noexcept;
std::string describe(const ImmigrationLaw& law);

// ---------------------------------------------------------------------------

/// A validated pair of laws. Construction throws gwi::Error when the process
/// is not subcritical or a law is malformed.
class ModelSpec {
public:
    ModelSpec(ReproductionLaw reproduction, ImmigrationLaw immigration);

    const ReproductionLaw& reproduction() const noexcept { return reproduction_; }
    const ImmigrationLaw& immigration() const noexcept { return immigration_; }

    double lambda0() const noexcept { return lambda0_; }
    double m0() const noexcept { return m0_; }
    double var_xi() const noexcept { return var_xi_; }
    double var_eps() const noexcept { return var_eps_; }

    std::string describe() const;

private:
    ReproductionLaw reproduction_;
    ImmigrationLaw immigration_;
    double lambda0_;
    double m0_;
    double var_xi_;
    double var_eps_;
};

/// Row-sum tolerance for transition matrices.
inline constexpr double kTransitionTolerance = 1e-12;

}  // namespace gwi
