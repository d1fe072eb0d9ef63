#pragma once

#include "gwi/general.hpp"
#include "gwi/lrv.hpp"
#include "gwi/moments.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gwi {

struct MomentMethod {
    int k0 = 1;
};

struct GeneralMethod {
    RegularizerConfig cfg;
    LagRule rule = LogRateLag{};
};

struct LrvMethod {
    int k0 = 1;
    OrderRule order_rule = OrderRule::CubeRoot;
};

using EstimatorChoice = std::variant<MomentMethod, GeneralMethod, LrvMethod>;

struct ExperimentPlan {
    ModelSpec spec;
    EstimatorChoice estimator;
    std::size_t n = 0;
    std::size_t replications = 1;
    std::uint64_t master_seed = 0;
    unsigned threads = 0;  // 0: std::thread::hardware_concurrency()
    double max_failure_fraction = 0.10;

    /// Throws InvalidArgument for n = 0, replications = 0 or an invalid estimator configuration.
    void validate() const;

    /// Extra observations past n that the estimator reads (k0, or k_n for the general method).
    std::size_t lag() const;

    /// Simulated length per replication: n + lag + 1.
    std::size_t trajectory_length() const;
};

/// Sampling distribution of one estimated quantity across replications.
struct ParameterSummary {
    std::string name;
    double truth = 0.0;
    double mean = 0.0;
    double bias = 0.0;
    double variance = 0.0;   // divides by the number of successful replications
    double std_error = 0.0;  // sample standard deviation / sqrt(count)
    double rmse = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::vector<double> samples;  // in replication order
};

struct VarianceTracking {
    double median_omega_sp_11 = 0.0;
    double median_omega_s_11 = 0.0;
    double median_omega_sp_22 = 0.0;
    double median_omega_s_22 = 0.0;
    double n_mse_r = 0.0;  // n * mean((R - lambda0)^2)
    double n_mse_m = 0.0;  // n * mean((M - m0)^2)
};

struct McSummary {
    std::size_t replications = 0;
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;  // first few, for diagnostics
    std::vector<ParameterSummary> parameters;
    std::optional<VarianceTracking> variance_tracking;
    int lag = 0;

    const ParameterSummary& parameter(const std::string& name) const;
};

/// Type-7 (linear interpolation) quantile of an ascending-sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

ParameterSummary summarize(std::string name, double truth, std::vector<double> samples);

/// Runs the plan. Replication i simulates with seed derive_seed(master_seed, i);
/// the result does not depend on the number of worker threads.
/// Failed replications are excluded and counted; more than
/// max_failure_fraction of failures throws TooManyFailures.
McSummary run(const ExperimentPlan& plan);

/// run() for an LrvMethod plan, with variance tracking filled in.
McSummary variance_comparison(const ExperimentPlan& plan);

/// requested, or the hardware concurrency (at least 1) when requested is 0.
unsigned resolve_threads(unsigned requested);

}  // namespace gwi
