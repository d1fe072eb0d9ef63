#pragma once

#include "gwi/model.hpp"
#include "gwi/random.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace gwi {

using Count = std::int64_t;

/// How the offspring total of a generation is drawn.
enum class OffspringSampling {
    /// One Poisson(count * lambda) or Binomial(count, p) draw per generation.
    Aggregate,
    /// One draw per individual; slow, kept to cross-validate Aggregate.
    PerIndividual,
};

/// A finite realization Y_1..Y_L of the stationary process.
struct Trajectory {
    std::vector<Count> values;
    ModelSpec spec;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;

    std::size_t size() const noexcept { return values.size(); }
    std::span<const Count> view() const noexcept { return values; }
};

/// Sum of `count` i.i.d. offspring counts.
Count sample_reproduction_sum(const ReproductionLaw& law, Count count, Engine& rng,
                              OffspringSampling mode = OffspringSampling::Aggregate);

/// Streaming sampler of eps_1, eps_2, ... started in its stationary law.
class ImmigrationSampler {
public:
    ImmigrationSampler(const ImmigrationLaw& law, Engine& rng);

    Count next();

private:
    ImmigrationLaw law_;
    Engine* rng_;
    std::deque<Count> window_;  // ProductPoisson: last k0-1 base variables
    int state_ = 0;             // TwoStateMarkov: current state
    bool started_ = false;
};

/// eps_1..eps_horizon from the stationary immigration law.
std::vector<Count> sample_immigration(const ImmigrationLaw& law, std::size_t horizon, Engine& rng);

/// ceil(ln(1e-12) / ln(lambda0)) + k0: steps discarded from Y = 0 before recording.
std::size_t burn_in_length(const ModelSpec& spec);

/// Stationary trajectory of exactly `length` values. Deterministic in (spec, length, seed).
Trajectory simulate(const ModelSpec& spec, std::size_t length, std::uint64_t seed,
                    OffspringSampling mode = OffspringSampling::Aggregate);

}  // namespace gwi
