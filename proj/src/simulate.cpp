#include "gwi/simulate.hpp"

#include "gwi/error.hpp"

#include <cmath>
#include <fmt/format.h>

namespace gwi {

namespace {

Count draw_poisson(double mean, Engine& rng) {
    if (mean <= 0.0) return 0;
    using Dist = std::poisson_distribution<Count>;
    Dist dist;
    return dist(rng, Dist::param_type(mean));
}

Count draw_binomial(Count trials, double p, Engine& rng) {
    if (trials <= 0) return 0;
    using Dist = std::binomial_distribution<Count>;
    Dist dist;
    return dist(rng, Dist::param_type(trials, p));
}

}  // namespace

Count sample_reproduction_sum(const ReproductionLaw& law, Count count, Engine& rng, OffspringSampling mode) {
    if (count < 0) throw Error(ErrorKind::InvalidArgument, "offspring count must be nonnegative");
    if (count == 0) return 0;

    if (const auto* poisson = std::get_if<PoissonReproduction>(&law)) {
        if (mode == OffspringSampling::Aggregate) return draw_poisson(static_cast<double>(count) * poisson->rate, rng);
        Count total = 0;
        for (Count i = 0; i < count; ++i) total += draw_poisson(poisson->rate, rng);
        return total;
    }

    const double p = std::get<BernoulliReproduction>(law).probability;
    if (mode == OffspringSampling::Aggregate) return draw_binomial(count, p, rng);
    std::bernoulli_distribution coin(p);
    Count total = 0;
    for (Count i = 0; i < count; ++i) total += coin(rng) ? 1 : 0;
    return total;
}

ImmigrationSampler::ImmigrationSampler(const ImmigrationLaw& law, Engine& rng) : law_(law), rng_(&rng) {}

Count ImmigrationSampler::next() {
    Engine& rng = *rng_;
    if (const auto* iid = std::get_if<IidPoisson>(&law_)) return draw_poisson(iid->rate, rng);

    if (const auto* product = std::get_if<ProductPoisson>(&law_)) {
        if (!started_) {
            for (int i = 0; i + 1 < product->window; ++i) window_.push_back(draw_poisson(product->base_rate, rng));
            started_ = true;
        }
        const Count z = draw_poisson(product->base_rate, rng);
        Count eps = z;
        for (Count w : window_) eps *= w;
        if (!window_.empty()) {
            window_.pop_front();
            window_.push_back(z);
        }
        return eps;
    }

    const auto& chain = std::get<TwoStateMarkov>(law_);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (!started_) {
        state_ = unit(rng) < chain.stationary_one() ? 1 : 0;
        started_ = true;
    } else {
        state_ = unit(rng) < chain.p[state_][1] ? 1 : 0;
    }
    return state_;
}

std::vector<Count> sample_immigration(const ImmigrationLaw& law, std::size_t horizon, Engine& rng) {
    if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "immigration horizon must be >= 1");
    ImmigrationSampler sampler(law, rng);
    std::vector<Count> out(horizon);
    for (auto& v : out) v = sampler.next();
    return out;
}

std::size_t burn_in_length(const ModelSpec& spec) {
    const double steps = std::ceil(std::log(1e-12) / std::log(spec.lambda0()));
    return static_cast<std::size_t>(steps) + static_cast<std::size_t>(dependence_window(spec.immigration()));
}

Trajectory simulate(const ModelSpec& spec, std::size_t length, std::uint64_t seed, OffspringSampling mode) {
    if (length < 1) throw Error(ErrorKind::InvalidArgument, "trajectory length must be >= 1");
    if (!(spec.lambda0() < 1.0))
        throw Error(ErrorKind::NotSubcritical, fmt::format("lambda0 = {} is not subcritical", spec.lambda0()));

    Engine rng = make_engine(seed);
    ImmigrationSampler immigration(spec.immigration(), rng);
    const std::size_t burn_in = burn_in_length(spec);

    Trajectory out{std::vector<Count>(length), spec, seed, burn_in};
    Count y = 0;
    for (std::size_t step = 0; step < burn_in; ++step)
        y = sample_reproduction_sum(spec.reproduction(), y, rng, mode) + immigration.next();
    for (auto& v : out.values) {
        y = sample_reproduction_sum(spec.reproduction(), y, rng, mode) + immigration.next();
        v = y;
    }
    return out;
}

}  // namespace gwi
