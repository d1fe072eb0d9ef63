#include "gwi/experiments.hpp"

#include "gwi/error.hpp"

#include <cmath>
#include <fmt/format.h>

namespace gwi {

ModelSpec product_model(double lambda, int k0, bool bernoulli) {
    ReproductionLaw repro = bernoulli ? ReproductionLaw{BernoulliReproduction{lambda}}
                                      : ReproductionLaw{PoissonReproduction{lambda}};
    ImmigrationLaw immigration =
        k0 == 1 ? ImmigrationLaw{IidPoisson{1.0}} : ImmigrationLaw{ProductPoisson{k0, 1.0}};
    return ModelSpec(repro, immigration);
}

ModelSpec markov_example(double lambda) {
    return ModelSpec(PoissonReproduction{lambda}, TwoStateMarkov{{{{0.5, 0.5}, {1.0, 0.0}}}});
}

RegularizerConfig markov_config(const ModelSpec& spec, double c) {
    RegularizerConfig cfg;
    cfg.c = c;
    cfg.lambda_plus = 0.95;
    cfg.lambda_minus = std::min(spec.lambda0(), std::ceil(100.0 * std::exp(-1.0 / (2.0 * c))) / 100.0);
    cfg.k_m = std::abs(xi(spec));
    cfg.c_y = default_moment_bound(spec, cfg.lambda_plus);
    return cfg;
}

const std::vector<std::pair<double, double>>& markov_table_rows() {
    static const std::vector<std::pair<double, double>> rows{{0.9, 4.7}, {0.7, 1.4}, {0.5, 0.7}, {0.2, 0.3}};
    return rows;
}

std::vector<TableCell> table_cells(const std::string& table, Scale scale, std::size_t reps, std::uint64_t seed,
                                   unsigned threads) {
    const bool full = scale == Scale::Full;
    std::vector<TableCell> cells;
    struct Labels {
        std::string repro, immigration;
        int k0 = 0;
        double c = 0.0;
        std::string lag_rule;
        double lambda0 = 0.0;
    };
    auto add = [&](const Labels& l, EstimatorChoice estimator, std::size_t n, std::size_t default_reps,
                   const ModelSpec& spec) {
        ExperimentPlan plan{spec, std::move(estimator), n, reps > 0 ? reps : default_reps,
                            derive_seed(seed, cells.size()), threads};
        cells.push_back(TableCell{table, l.repro, l.immigration, l.k0, l.c, l.lag_rule, l.lambda0, std::move(plan)});
    };

    if (table == "1") {
        const std::vector<std::size_t> sizes =
            full ? std::vector<std::size_t>{300, 2000, 5000} : std::vector<std::size_t>{300, 2000};
        for (int k0 : {2, 3})
            for (std::size_t n : sizes)
                for (bool bernoulli : {false, true})
                    for (double lambda : {0.2, 0.5, 0.7, 0.9})
                        add({bernoulli ? "bernoulli" : "poisson", "product", k0, 0.0, "", lambda}, LrvMethod{k0}, n,
                            full ? 1000 : 200, product_model(lambda, k0, bernoulli));
    } else if (table == "fig-var") {
        for (int k0 : {1, 2})
            add({"bernoulli", k0 == 1 ? "iid-poisson" : "product", k0, 0.0, "", 0.5}, LrvMethod{k0}, 2000,
                full ? 1000 : 200, product_model(0.5, k0, true));
    } else if (table == "2" || table == "3") {
        const bool sqrt_lag = table == "3";
        for (const auto& [lambda, c] : markov_table_rows()) {
            const ModelSpec spec = markov_example(lambda);
            LagRule rule = sqrt_lag ? LagRule{SqrtLag{}} : LagRule{LogRateLag{}};
            add({"poisson", "markov", 0, c, sqrt_lag ? "sqrt" : "log", lambda},
                GeneralMethod{markov_config(spec, c), rule}, 5'000'000, 20, spec);
        }
    } else {
        throw Error(ErrorKind::InvalidArgument, fmt::format("unknown table '{}' (expected 1, 2, 3 or fig-var)", table));
    }
    return cells;
}

}  // namespace gwi
