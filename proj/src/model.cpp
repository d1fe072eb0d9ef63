#include "gwi/model.hpp"

#include "gwi/error.hpp"

#include <cmath>
#include <fmt/format.h>

namespace gwi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const ReproductionLaw& law) {
    const double lambda = mean(law);
    if (!std::isfinite(lambda) || lambda <= 0.0) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("reproduction mean must be positive, got {}", lambda));
    }
    if (lambda >= 1.0) {
        throw Error(ErrorKind::NotSubcritical,
                    fmt::format("reproduction mean lambda0 = {} violates subcriticality lambda0 < 1",
                                lambda));
    }
}

void validate(const ImmigrationLaw& law) {
    std::visit(overloaded{
                   [](const IidPoisson& l) {
                       if (!(l.rate > 0.0) || !std::isfinite(l.rate))
                           throw Error(ErrorKind::InvalidArgument, "immigration rate must be positive");
                   },
                   [](const ProductPoisson& l) {
                       if (l.window < 1)
                           throw Error(ErrorKind::InvalidArgument, "product window k0 must be >= 1");
                       if (!(l.base_rate > 0.0) || !std::isfinite(l.base_rate))
                           throw Error(ErrorKind::InvalidArgument, "product base rate must be positive");
                   },
                   [](const TwoStateMarkov& l) {
                       for (const auto& row : l.p) {
                           for (double v : row) {
                               if (!(v >= 0.0 && v <= 1.0))
                                   throw Error(ErrorKind::InvalidTransitionMatrix,
                                               "transition probabilities must lie in [0,1]");
                           }
                           if (std::abs(row[0] + row[1] - 1.0) > kTransitionTolerance)
                               throw Error(ErrorKind::InvalidTransitionMatrix,
                                           fmt::format("transition matrix row sums to {}, expected 1",
                                                       row[0] + row[1]));
                       }
                       if (!(l.p[0][1] > 0.0))
                           throw Error(ErrorKind::InvalidTransitionMatrix,
                                       "state 1 is unreachable (p01 = 0): zero mean immigration");
                   },
               },
               law);
}

}  // namespace

double mean(const ReproductionLaw& law) noexcept {
    return std::visit(overloaded{
                          [](const PoissonReproduction& l) { return l.rate; },
                          [](const BernoulliReproduction& l) { return l.probability; },
                      },
                      law);
}

double variance(const ReproductionLaw& law) noexcept {
    return std::visit(overloaded{
                          [](const PoissonReproduction& l) { return l.rate; },
                          [](const BernoulliReproduction& l) { return l.probability * (1.0 - l.probability); },
                      },
                      law);
}

std::string describe(const ReproductionLaw& law) {
    return std::visit(overloaded{
                          [](const PoissonReproduction& l) { return fmt::format("poisson({})", l.rate); },
                          [](const BernoulliReproduction& l) {
                              return fmt::format("bernoulli({})", l.probability);
                          },
                      },
                      law);
}

double mean(const ImmigrationLaw& law) noexcept {
    return std::visit(overloaded{
                          [](const IidPoisson& l) { return l.rate; },
                          [](const ProductPoisson& l) { return std::pow(l.base_rate, l.window); },
                          [](const TwoStateMarkov& l) { return l.stationary_one(); },
                      },
                      law);
}

double variance(const ImmigrationLaw& law) noexcept {
    return std::visit(overloaded{
                          [](const IidPoisson& l) { return l.rate; },
                          [](const ProductPoisson& l) {
                              const double mu = l.base_rate;
                              return std::pow(mu + mu * mu, l.window) - std::pow(mu, 2 * l.window);
                          },
                          [](const TwoStateMarkov& l) {
                              const double pi1 = l.stationary_one();
                              return pi1 * (1.0 - pi1);
                          },
                      },
                      law);
}

int dependence_window(const ImmigrationLaw& law) noexcept {
    if (const auto* product = std::get_if<ProductPoisson>(&law)) return product->window;
    return 1;
}

std::string describe(const ImmigrationLaw& law) {
    return std::visit(overloaded{
                          [](const IidPoisson& l) { return fmt::format("iid-poisson({})", l.rate); },
                          [](const ProductPoisson& l) {
                              return fmt::format("product(k0={}, base=poisson({}))", l.window, l.base_rate);
                          },
                          [](const TwoStateMarkov& l) {
                              return fmt::format("markov(p00={}, p01={}, p10={}, p11={})", l.p[0][0],
                                                 l.p[0][1], l.p[1][0], l.p[1][1]);
                          },
                      },
                      law);
}

ModelSpec::ModelSpec(ReproductionLaw reproduction, ImmigrationLaw immigration)
    : reproduction_(reproduction), immigration_(immigration) {
    validate(reproduction_);
    validate(immigration_);
    lambda0_ = gwi::mean(reproduction_);
    m0_ = gwi::mean(immigration_);
    var_xi_ = gwi::variance(reproduction_);
    var_eps_ = gwi::variance(immigration_);
}

std::string ModelSpec::describe() const {
    return fmt::format("reproduction={} immigration={}", gwi::describe(reproduction_),
                       gwi::describe(immigration_));
}

}  // namespace gwi
