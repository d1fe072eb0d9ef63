#include "cli.hpp"

#include "gwi/error.hpp"
#include "gwi/experiments.hpp"
#include "gwi/general.hpp"
#include "gwi/harness.hpp"
#include "gwi/lrv.hpp"
#include "gwi/moments.hpp"
#include "gwi/trajectory_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace gwi::cli {
namespace {

using nlohmann::json;

// Raised for flag combinations CLI11 cannot express; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(fmt::format("{}: '{}' is not a number", flag, item));
        }
    }
    if (out.size() != expected)
        throw UsageError(fmt::format("{} expects {} comma-separated values, got {}", flag, expected, out.size()));
    return out;
}

std::optional<unsigned> threads_from_env() {
    const char* raw = std::getenv("GW_ESTIM_THREADS");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    unsigned value = 0;
    const std::string_view text(raw);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw UsageError(fmt::format("GW_ESTIM_THREADS must be a non-negative integer, got '{}'", text));
    return value;
}

// Opens --output when given, otherwise hands back the default stream.
class OutputTarget {
public:
    OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty() || path == "-") return;
        file_.open(path, std::ios::binary);
        if (!file_) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write '{}'", path));
        stream_ = &file_;
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    double lambda = 0.0;
    std::string repro = "poisson";
    std::string immigration;
    double rate = 1.0;
    std::optional<int> k0;
    std::optional<std::string> markov_p;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> length;
    std::string output;
};

std::string fmt_num(double v) { return fmt::format("{}", v); }

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
    if (o.k0 && o.immigration != "product") throw UsageError("--k0 applies only to --immigration product");
    if (o.markov_p && o.immigration != "markov") throw UsageError("--markov-P applies only to --immigration markov");

    ReproductionLaw repro = o.repro == "bernoulli" ? ReproductionLaw{BernoulliReproduction{o.lambda}}
                                                   : ReproductionLaw{PoissonReproduction{o.lambda}};
    int k0 = 1;
    ImmigrationLaw immigration = IidPoisson{o.rate};
    std::string extra;
    if (o.immigration == "product") {
        k0 = o.k0.value_or(2);
        immigration = ProductPoisson{k0, o.rate};
    } else if (o.immigration == "markov") {
        const auto p = parse_list(o.markov_p.value_or("0.5,0.5,1,0"), 4, "--markov-P");
        immigration = TwoStateMarkov{{{{p[0], p[1]}, {p[2], p[3]}}}};
        extra = fmt::format(" markov_P={},{},{},{}", p[0], p[1], p[2], p[3]);
    }

    std::optional<ModelSpec> spec;
    try {
        spec.emplace(repro, immigration);
    } catch (const Error& e) {
        throw UsageError(fmt::format("{}: {}", to_string(e.kind()), e.what()));
    }

    const std::size_t length = o.length.value_or(o.n + static_cast<std::size_t>(k0) + 1);
    if (length == 0) throw UsageError("trajectory length must be positive");
    const Trajectory traj = simulate(*spec, length, o.seed);

    const std::string header = fmt::format(
        "gw-estim simulate lambda={} repro={} immigration={} rate={} k0={}{} n={} seed={} length={} burn_in={}",
        fmt_num(o.lambda), o.repro, o.immigration, fmt_num(o.rate), k0, extra, o.n, o.seed, length, traj.burn_in);
    OutputTarget target(o.output, out);
    write_trajectory(target.get(), header, traj.view());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateOptions {
    std::string input;
    std::string method;
    std::optional<int> k0;
    std::optional<std::size_t> n;
    std::optional<double> c;
    std::optional<double> km;
    std::optional<double> lminus;
    std::optional<double> lplus;
    std::optional<double> cy;
    std::optional<std::string> kn_override;
    std::string order_rule = "cube-root";
};

std::map<std::string, std::string> header_fields(const TrajectoryFile& file) {
    std::map<std::string, std::string> fields;
    for (const auto& line : file.comments) {
        std::stringstream ss(line);
        std::string token;
        while (ss >> token) {
            const auto eq = token.find('=');
            if (eq != std::string::npos) fields[token.substr(0, eq)] = token.substr(eq + 1);
        }
    }
    return fields;
}

// Rebuilds the model recorded by `simulate`, if the header carries one.
std::optional<ModelSpec> header_spec(const std::map<std::string, std::string>& f) {
    try {
        if (!f.count("lambda") || !f.count("immigration")) return std::nullopt;
        const double lambda = std::stod(f.at("lambda"));
        const double rate = f.count("rate") ? std::stod(f.at("rate")) : 1.0;
        const std::string repro = f.count("repro") ? f.at("repro") : "poisson";
        ReproductionLaw r = repro == "bernoulli" ? ReproductionLaw{BernoulliReproduction{lambda}}
                                                 : ReproductionLaw{PoissonReproduction{lambda}};
        const std::string& imm = f.at("immigration");
        if (imm == "product") return ModelSpec(r, ProductPoisson{std::stoi(f.at("k0")), rate});
        if (imm == "markov") {
            const auto p = parse_list(f.at("markov_P"), 4, "markov_P");
            return ModelSpec(r, TwoStateMarkov{{{{p[0], p[1]}, {p[2], p[3]}}}});
        }
        if (imm == "iid-poisson") return ModelSpec(r, IidPoisson{rate});
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json moments_json(const MomentTriple& t) {
    return {{"ybar", t.ybar}, {"ybar_lag_k0_minus_1", t.ybar_prev}, {"ybar_lag_k0", t.ybar_lag}};
}

int cmd_estimate(const EstimateOptions& o, std::ostream& out) {
    const bool general = o.method == "general";
    if (!general && (o.c || o.km || o.lminus || o.lplus || o.cy || o.kn_override))
        throw UsageError("--c, --km, --lminus, --lplus, --cy and --kn-override apply only to --method general");
    if (general && o.k0) throw UsageError("--k0 does not apply to --method general");

    TrajectoryFile file;
    if (o.input == "-") {
        file = read_trajectory(std::cin);
    } else {
        try {
            file = read_trajectory_file(o.input);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    const auto fields = header_fields(file);
    const std::size_t length = file.values.size();
    const std::span<const Count> values(file.values);

    json report{{"method", o.method}, {"input", o.input}, {"length", length}};

    if (!general) {
        int k0 = 1;
        if (o.k0) {
            k0 = *o.k0;
        } else if (fields.count("k0")) {
            k0 = std::stoi(fields.at("k0"));
        }
        if (k0 < 1) throw UsageError("--k0 must be >= 1");
        const std::size_t reserve = static_cast<std::size_t>(k0) + 1;
        if (length <= reserve) throw UsageError(fmt::format("trajectory of length {} is too short for k0 = {}", length, k0));
        const std::size_t n = o.n.value_or(length - reserve);
        if (n < 2 || n + reserve > length)
            throw UsageError(fmt::format("--n must lie in [2, {}] for this file", length - reserve));
        report["k0"] = k0;
        report["n"] = n;

        if (o.method == "moment") {
            const MomentEstimates est = estimate(values, k0, n);
            report["r_hat"] = est.r_hat;
            report["m_hat"] = est.m_hat;
            report["moments"] = moments_json(est.inputs);
        } else {
            const OrderRule rule = o.order_rule == "aic" ? OrderRule::Aic : OrderRule::CubeRoot;
            const LrvReport rep = lrv_report(values, k0, n, rule);
            report["r_hat"] = rep.estimates.r_hat;
            report["m_hat"] = rep.estimates.m_hat;
            report["moments"] = moments_json(rep.estimates.inputs);
            report["ar_order"] = rep.r;
            report["order_rule"] = o.order_rule;
            report["sigma_eps_hat"] = matrix_json(rep.sigma_eps_hat);
            report["s_sp"] = matrix_json(rep.s_sp);
            report["omega_sp"] = matrix_json(rep.omega_sp);
            report["omega_standard"] = matrix_json(rep.omega_standard);
            report["orthogonality"] = rep.orthogonality;
            report["ridge_used"] = rep.ridge_used;
        }
        out << report.dump(2) << '\n';
        return kExitOk;
    }

    if (!o.km) throw UsageError("--method general requires --km (lower bound K_m on |Xi|)");
    RegularizerConfig cfg;
    cfg.k_m = *o.km;
    cfg.lambda_minus = o.lminus.value_or(cfg.lambda_minus);
    cfg.lambda_plus = o.lplus.value_or(cfg.lambda_plus);
    const auto spec = header_spec(fields);
    if (o.cy) {
        cfg.c_y = *o.cy;
    } else if (spec) {
        cfg.c_y = default_moment_bound(*spec, cfg.lambda_plus);
    } else {
        throw UsageError("--cy is required when the trajectory header does not record the model");
    }
    if (!(cfg.lambda_minus > 0.0 && cfg.lambda_minus < 1.0))
        throw UsageError("--lminus must lie in (0, 1)");
    cfg.c = o.c.value_or(default_log_rate(cfg.lambda_minus));

    LagRule rule = LogRateLag{};
    std::string rule_name = "log";
    if (o.kn_override) {
        if (*o.kn_override == "sqrt") {
            rule = SqrtLag{};
            rule_name = "sqrt";
        } else {
            int k = 0;
            const std::string& t = *o.kn_override;
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), k);
            if (ec != std::errc{} || ptr != t.data() + t.size() || k < 1)
                throw UsageError("--kn-override expects 'sqrt' or a positive integer");
            rule = FixedLag{k};
            rule_name = "fixed";
        }
    }
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    // Largest n whose lag still fits: n + k_n + 1 <= length.
    std::size_t n = 0;
    if (o.n) {
        n = *o.n;
    } else if (length > 2) {
        n = length - 2;
        while (n > 1 && n + static_cast<std::size_t>(std::max(0, lag_for(n, cfg, rule))) + 1 > length) --n;
    }
    const int k_n = n >= 2 ? lag_for(n, cfg, rule) : 0;
    if (n < 2 || k_n < 1 || n + static_cast<std::size_t>(k_n) + 1 > length)
        throw UsageError(fmt::format("no admissible n for a trajectory of length {} (need n + k_n + 1 <= length, k_n >= 1)",
                                     length));

    const GeneralEstimate est = s_hat(values, n, cfg, rule);
    report["n"] = n;
    report["k_n"] = est.k_n;
    report["lag_rule"] = rule_name;
    report["s_hat"] = est.s_hat;
    report["exp_s_hat"] = std::exp(est.s_hat);
    report["n_hat"] = est.n_hat;
    report["raw_log"] = std::isfinite(est.raw_log) ? json(est.raw_log) : json(nullptr);
    report["ybar"] = est.ybar;
    report["ybar_lag"] = est.ybar_lag;
    report["gates"] = {{"g_ybar", est.gate_ybar}, {"g_ybar_lag", est.gate_ybar_lag}, {"varpi", est.gate_varpi}};
    report["config"] = {{"c", cfg.c},
                        {"k_m", cfg.k_m},
                        {"lambda_minus", cfg.lambda_minus},
                        {"lambda_plus", cfg.lambda_plus},
                        {"c_y", cfg.c_y}};
    report["c_within_bound"] = cfg.c < cfg.max_log_rate();
    out << report.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceOptions {
    std::string table;
    std::size_t reps = 0;
    std::string scale = "desk";
    std::uint64_t seed = 20240601;
    unsigned threads = 0;
    std::string output;
};

constexpr const char* kCsvHeader =
    "table,repro,immigration,k0,c,lag_rule,k_n,n,lambda0,parameter,reps,failures,truth,mean,bias,variance,rmse,"
    "min,q1,median,q3,max,mean_exp,omega_sp_median,omega_s_median,n_mse";

std::string opt_int(int v) { return v > 0 ? std::to_string(v) : std::string{}; }
std::string opt_num(double v, bool present) { return present ? fmt_num(v) : std::string{}; }

void write_row(std::ostream& os, const TableCell& cell, const McSummary& s, const ParameterSummary& p,
               std::optional<double> mean_exp, std::optional<double> omega_sp, std::optional<double> omega_s,
               std::optional<double> n_mse) {
    const bool general = std::holds_alternative<GeneralMethod>(cell.plan.estimator);
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", cell.table,
                      cell.repro, cell.immigration, opt_int(cell.k0), opt_num(cell.c, cell.c > 0.0), cell.lag_rule,
                      general ? std::to_string(s.lag) : std::string{}, cell.plan.n, fmt_num(cell.lambda0), p.name,
                      s.replications, s.failures, fmt_num(p.truth), fmt_num(p.mean), fmt_num(p.bias),
                      fmt_num(p.variance), fmt_num(p.rmse), fmt_num(p.min), fmt_num(p.q1), fmt_num(p.median),
                      fmt_num(p.q3), fmt_num(p.max), mean_exp ? fmt_num(*mean_exp) : "",
                      omega_sp ? fmt_num(*omega_sp) : "", omega_s ? fmt_num(*omega_s) : "",
                      n_mse ? fmt_num(*n_mse) : "");
}

int cmd_reproduce(const ReproduceOptions& o, std::ostream& out, std::ostream& err) {
    const unsigned threads = threads_from_env().value_or(o.threads);
    const Scale scale = o.scale == "paper" ? Scale::Full : Scale::Desk;
    std::vector<TableCell> cells;
    try {
        cells = table_cells(o.table, scale, o.reps, o.seed, threads);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    OutputTarget target(o.output, out);
    std::ostream& os = target.get();
    os << fmt::format("# gw-estim reproduce table={} scale={} seed={} cells={}\n", o.table, o.scale, o.seed,
                      cells.size());
    os << kCsvHeader << '\n';
    int status = kExitOk;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const TableCell& cell = cells[i];
        McSummary s;
        try {
            s = run(cell.plan);
        } catch (const Error& e) {
            os << fmt::format("# cell {} failed: {}\n", i, e.what());
            err << fmt::format("cell {} failed: {}\n", i, e.what());
            status = kExitRuntime;
            continue;
        }
        if (std::holds_alternative<GeneralMethod>(cell.plan.estimator)) {
            write_row(os, cell, s, s.parameter("s_hat"), s.parameter("exp_s_hat").mean, std::nullopt, std::nullopt,
                      std::nullopt);
        } else if (o.table == "fig-var") {
            const VarianceTracking& v = *s.variance_tracking;
            write_row(os, cell, s, s.parameter("r_hat"), std::nullopt, v.median_omega_sp_11, v.median_omega_s_11,
                      v.n_mse_r);
            write_row(os, cell, s, s.parameter("m_hat"), std::nullopt, v.median_omega_sp_22, v.median_omega_s_22,
                      v.n_mse_m);
        } else {
            const VarianceTracking& v = *s.variance_tracking;
            write_row(os, cell, s, s.parameter("r_hat"), std::nullopt, v.median_omega_sp_11, v.median_omega_s_11,
                      v.n_mse_r);
        }
        os.flush();
    }
    return status;
}

json error_json(const Error& e) {
    return {{"error", {{"kind", std::string(to_string(e.kind())) }, {"message", e.what()}}}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Estimation for subcritical branching processes with immigration", "gw-estim"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    SimulateOptions sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a stationary trajectory to a text file");
    simulate_cmd->add_option("--lambda", sim.lambda, "Mean offspring number lambda0 (must be < 1)")->required();
    simulate_cmd->add_option("--repro", sim.repro, "Reproduction law")
        ->check(CLI::IsMember({"poisson", "bernoulli"}))
        ->capture_default_str();
    simulate_cmd->add_option("--immigration", sim.immigration, "Immigration law")
        ->check(CLI::IsMember({"iid-poisson", "product", "markov"}))
        ->required();
    simulate_cmd->add_option("--rate", sim.rate, "Poisson rate of the immigration (base variables for product)")
        ->capture_default_str();
    auto* k0_flag = simulate_cmd->add_option("--k0", sim.k0, "Product window k0 (default 2)");
    auto* markov_flag = simulate_cmd->add_option("--markov-P", sim.markov_p, "Transition matrix p00,p01,p10,p11");
    k0_flag->excludes(markov_flag);
    simulate_cmd->add_option("--n", sim.n, "Sample size n; the file holds n + k0 + 1 values")->required();
    simulate_cmd->add_option("--seed", sim.seed, "Seed")->required();
    simulate_cmd->add_option("--length", sim.length, "Override the number of values written");
    simulate_cmd->add_option("--output,-o", sim.output, "Output path (default stdout)");

    EstimateOptions est;
    auto* estimate_cmd = app.add_subcommand("estimate", "Estimate (lambda0, m0) from a trajectory file");
    estimate_cmd->add_option("--input,-i", est.input, "Trajectory file, '-' for stdin")->required();
    estimate_cmd->add_option("--method", est.method, "Estimator")
        ->check(CLI::IsMember({"moment", "general", "lrv"}))
        ->required();
    estimate_cmd->add_option("--k0", est.k0, "Dependence window k0 (default from the file header, else 1)");
    estimate_cmd->add_option("--n", est.n, "Sample size (default: as large as the file allows)");
    estimate_cmd->add_option("--c", est.c, "Log-rate constant, k_n = floor(c ln n)");
    estimate_cmd->add_option("--km", est.km, "Lower bound K_m on |Xi| (general method, mandatory)");
    estimate_cmd->add_option("--lminus", est.lminus, "Lower bound on lambda0 (default 0.1)");
    estimate_cmd->add_option("--lplus", est.lplus, "Upper bound on lambda0 (default 0.95)");
    estimate_cmd->add_option("--cy", est.cy, "Moment bound C_Y (default from the model in the header)");
    estimate_cmd->add_option("--kn-override", est.kn_override, "'sqrt' for k_n = floor(sqrt n), or a fixed lag");
    estimate_cmd->add_option("--order-rule", est.order_rule, "AR order rule for the lrv method")
        ->check(CLI::IsMember({"cube-root", "aic"}))
        ->capture_default_str();

    ReproduceOptions rep;
    auto* reproduce_cmd = app.add_subcommand("reproduce", "Run a Monte Carlo table and print csv");
    reproduce_cmd->add_option("--table", rep.table, "Table id")
        ->check(CLI::IsMember({"1", "2", "3", "fig-var"}))
        ->required();
    reproduce_cmd->add_option("--reps", rep.reps, "Replications per cell (default from --scale)");
    reproduce_cmd->add_option("--scale", rep.scale, "desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    reproduce_cmd->add_option("--seed", rep.seed, "Master seed")->capture_default_str();
    reproduce_cmd->add_option("--threads", rep.threads, "Worker threads, 0 for all cores (GW_ESTIM_THREADS overrides)")
        ->capture_default_str();
    reproduce_cmd->add_option("--output,-o", rep.output, "Output path (default stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "gw-estim: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (simulate_cmd->parsed()) return cmd_simulate(sim, out);
        if (estimate_cmd->parsed()) return cmd_estimate(est, out);
        return cmd_reproduce(rep, out, err);
    } catch (const UsageError& e) {
        err << "gw-estim: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        out << error_json(e).dump(2) << '\n';
        err << "gw-estim: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "gw-estim: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace gwi::cli
