#pragma once

#include "gwi/harness.hpp"

#include <string>
#include <vector>

namespace gwi {

/// Poisson or Bernoulli reproduction with mean lambda, eps_n the product of
/// k0 consecutive i.i.d. Poisson(1) variables (so m0 = 1).
ModelSpec product_model(double lambda, int k0, bool bernoulli = false);

/// Poisson(lambda) reproduction with the two-state Markov immigration
/// P = [[1/2, 1/2], [1, 0]] (m0 = 1/3).
ModelSpec markov_example(double lambda);

/// Regularizer inputs used for the Markov experiments: lambda_minus is
/// exp(-1/(2c)) rounded up to two decimals, K_m = |Xi| of the true model,
/// C_Y the moment bound for lambda_plus = 0.95.
RegularizerConfig markov_config(const ModelSpec& spec, double c);

/// (lambda0, c) pairs of the Markov log-estimator tables.
const std::vector<std::pair<double, double>>& markov_table_rows();

enum class Scale { Desk, Full };

struct TableCell {
    std::string table;
    std::string repro;
    std::string immigration;
    int k0 = 0;         // 0 when not applicable
    double c = 0.0;     // 0 when not applicable
    std::string lag_rule;
    double lambda0 = 0.0;
    ExperimentPlan plan;
};

/// Cells of table "1", "2", "3" or "fig-var". reps = 0 keeps the scale default.
/// Cell i runs with master seed derive_seed(seed, i).
std::vector<TableCell> table_cells(const std::string& table, Scale scale, std::size_t reps, std::uint64_t seed,
                                   unsigned threads);

}  // namespace gwi
