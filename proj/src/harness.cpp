#include "gwi/harness.hpp"

#include "gwi/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fmt/format.h>
#include <mutex>
#include <thread>

namespace gwi {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Replication {
    bool ok = false;
    std::string error;
    std::vector<double> values;  // one entry per parameter
    double omega_sp_11 = 0.0, omega_s_11 = 0.0, omega_sp_22 = 0.0, omega_s_22 = 0.0;
};

std::vector<std::pair<std::string, double>> parameter_names(const ExperimentPlan& plan) {
    const double lambda = plan.spec.lambda0();
    const double m = plan.spec.m0();
    if (std::holds_alternative<GeneralMethod>(plan.estimator))
        return {{"s_hat", std::log(lambda)}, {"exp_s_hat", lambda}, {"n_hat", m}};
    return {{"r_hat", lambda}, {"m_hat", m}};
}

Replication replicate(const ExperimentPlan& plan, std::size_t index) {
    Replication out;
    try {
        const Trajectory traj = simulate(plan.spec, plan.trajectory_length(), derive_seed(plan.master_seed, index));
        std::visit(overloaded{
                       [&](const MomentMethod& m) {
                           const MomentEstimates est = estimate(traj.view(), m.k0, plan.n);
                           out.values = {est.r_hat, est.m_hat};
                       },
                       [&](const GeneralMethod& g) {
                           const GeneralEstimate est = s_hat(traj.view(), plan.n, g.cfg, g.rule);
                           out.values = {est.s_hat, std::exp(est.s_hat), est.n_hat};
                       },
                       [&](const LrvMethod& l) {
                           const LrvReport rep = lrv_report(traj.view(), l.k0, plan.n, l.order_rule);
                           out.values = {rep.estimates.r_hat, rep.estimates.m_hat};
                           out.omega_sp_11 = rep.omega_sp(0, 0);
                           out.omega_sp_22 = rep.omega_sp(1, 1);
                           out.omega_s_11 = rep.omega_standard(0, 0);
                           out.omega_s_22 = rep.omega_standard(1, 1);
                       },
                   },
                   plan.estimator);
        for (double v : out.values)
            if (!std::isfinite(v)) throw Error(ErrorKind::DomainError, "non-finite estimate");
        out.ok = true;
    } catch (const Error& e) {
        out.ok = false;
        out.error = fmt::format("replication {}: {}: {}", index, to_string(e.kind()), e.what());
    }
    return out;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.5);
}

}  // namespace

void ExperimentPlan::validate() const {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "sample size n must be positive");
    if (replications == 0) throw Error(ErrorKind::InvalidArgument, "replication count must be positive");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "max_failure_fraction must lie in [0, 1]");
    std::visit(overloaded{
                   [](const MomentMethod& m) {
                       if (m.k0 < 1) throw Error(ErrorKind::InvalidArgument, "k0 must be >= 1");
                   },
                   [&](const GeneralMethod& g) {
                       g.cfg.validate();
                       if (lag_for(n, g.cfg, g.rule) < 1)
                           throw Error(ErrorKind::InvalidArgument, "k_n = 0: n is too small for the chosen lag rule");
                   },
                   [](const LrvMethod& l) {
                       if (l.k0 < 1) throw Error(ErrorKind::InvalidArgument, "k0 must be >= 1");
                   },
               },
               estimator);
}

std::size_t ExperimentPlan::lag() const {
    return std::visit(overloaded{
                          [](const MomentMethod& m) { return static_cast<std::size_t>(m.k0); },
                          [&](const GeneralMethod& g) { return static_cast<std::size_t>(lag_for(n, g.cfg, g.rule)); },
                          [](const LrvMethod& l) { return static_cast<std::size_t>(l.k0); },
                      },
                      estimator);
}

std::size_t ExperimentPlan::trajectory_length() const { return n + lag() + 1; }

const ParameterSummary& McSummary::parameter(const std::string& name) const {
    for (const auto& p : parameters)
        if (p.name == name) return p;
    throw Error(ErrorKind::InvalidArgument, fmt::format("no parameter named '{}'", name));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ParameterSummary summarize(std::string name, double truth, std::vector<double> samples) {
    if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "cannot summarize an empty sample");
    ParameterSummary s;
    s.name = std::move(name);
    s.truth = truth;
    const double count = static_cast<double>(samples.size());

    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean = sum / count;
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / count;
    s.std_error = samples.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
    s.bias = s.mean - truth;
    s.rmse = std::sqrt(s.variance + s.bias * s.bias);

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q3 = quantile_sorted(sorted, 0.75);
    s.samples = std::move(samples);
    return s;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

McSummary run(const ExperimentPlan& plan) {
    plan.validate();
    const std::size_t count = plan.replications;
    std::vector<Replication> results(count);

    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(plan.threads), count));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) results[i] = replicate(plan, i);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    McSummary summary;
    summary.replications = count;
    summary.lag = static_cast<int>(plan.lag());
    const auto names = parameter_names(plan);
    std::vector<std::vector<double>> columns(names.size());
    std::vector<double> sp11, s11, sp22, s22;
    for (const Replication& r : results) {
        if (!r.ok) {
            ++summary.failures;
            if (summary.failure_messages.size() < 5) summary.failure_messages.push_back(r.error);
            continue;
        }
        for (std::size_t j = 0; j < names.size(); ++j) columns[j].push_back(r.values[j]);
        sp11.push_back(r.omega_sp_11);
        s11.push_back(r.omega_s_11);
        sp22.push_back(r.omega_sp_22);
        s22.push_back(r.omega_s_22);
    }

    if (static_cast<double>(summary.failures) > plan.max_failure_fraction * static_cast<double>(count) ||
        summary.failures == count) {
        std::string detail = summary.failure_messages.empty() ? std::string{} : summary.failure_messages.front();
        throw Error(ErrorKind::TooManyFailures,
                    fmt::format("{} of {} replications failed (first: {})", summary.failures, count, detail));
    }

    for (std::size_t j = 0; j < names.size(); ++j)
        summary.parameters.push_back(summarize(names[j].first, names[j].second, std::move(columns[j])));

    if (std::holds_alternative<LrvMethod>(plan.estimator)) {
        VarianceTracking vt;
        vt.median_omega_sp_11 = median_of(sp11);
        vt.median_omega_s_11 = median_of(s11);
        vt.median_omega_sp_22 = median_of(sp22);
        vt.median_omega_s_22 = median_of(s22);
        const double n = static_cast<double>(plan.n);
        const ParameterSummary& r = summary.parameters[0];
        const ParameterSummary& m = summary.parameters[1];
        vt.n_mse_r = n * r.rmse * r.rmse;
        vt.n_mse_m = n * m.rmse * m.rmse;
        summary.variance_tracking = vt;
    }
    return summary;
}

McSummary variance_comparison(const ExperimentPlan& plan) {
    if (!std::holds_alternative<LrvMethod>(plan.estimator))
        throw Error(ErrorKind::InvalidArgument, "variance comparison needs the lrv estimator");
    return run(plan);
}

}  // namespace gwi
