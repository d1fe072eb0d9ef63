#include "doctest.h"

#include "cli.hpp"
#include "gwi/experiments.hpp"
#include "gwi/moments.hpp"
#include "gwi/trajectory_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = gwi::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "gw_estim_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::size_t line_count(const std::string& text) {
    std::size_t lines = 0;
    for (char ch : text) lines += ch == '\n';
    return lines;
}

const std::vector<std::string> kSimulateExample{"simulate", "--lambda", "0.5", "--repro",    "poisson", "--immigration",
                                                "product",  "--k0",     "2",   "--n",        "2000",    "--seed",
                                                "42"};

}  // namespace

TEST_CASE("simulate writes n + k0 + 1 values and a header") {
    const Outcome a = call(kSimulateExample);
    REQUIRE(a.code == gwi::cli::kExitOk);
    CHECK(line_count(a.out) == 2004);
    CHECK(a.out.rfind("# gw-estim simulate", 0) == 0);
    std::istringstream in(a.out);
    const gwi::TrajectoryFile file = gwi::read_trajectory(in);
    CHECK(file.values.size() == 2003);

    const Outcome b = call(kSimulateExample);
    CHECK(a.out == b.out);

    std::vector<std::string> other = kSimulateExample;
    other.back() = "43";
    CHECK(call(other).out != a.out);

    const fs::path path = scratch("sim.txt");
    std::vector<std::string> to_file = kSimulateExample;
    to_file.insert(to_file.end(), {"--output", path.string()});
    const Outcome c = call(to_file);
    CHECK(c.code == 0);
    CHECK(c.out.empty());
    std::ifstream f(path);
    std::stringstream contents;
    contents << f.rdbuf();
    CHECK(contents.str() == a.out);
}

TEST_CASE("simulate usage errors") {
    std::vector<std::string> args = kSimulateExample;
    args[2] = "1.2";
    const Outcome super = call(args);
    CHECK(super.code == gwi::cli::kExitUsage);
    CHECK(super.err.find("not_subcritical") != std::string::npos);

    const Outcome conflict = call({"simulate", "--lambda", "0.5", "--immigration", "markov", "--k0", "2", "--markov-P",
                                   "0.5,0.5,1,0", "--n", "10", "--seed", "1"});
    CHECK(conflict.code == gwi::cli::kExitUsage);

    CHECK(call({"simulate", "--lambda", "0.5", "--n", "10", "--seed", "1"}).code == gwi::cli::kExitUsage);
    CHECK(call({"simulate", "--lambda", "0.5", "--immigration", "uniform", "--n", "10", "--seed", "1"}).code ==
          gwi::cli::kExitUsage);
    CHECK(call({"simulate", "--lambda", "0.5", "--immigration", "markov", "--markov-P", "0.5,0.5,1", "--n", "10",
                "--seed", "1"})
              .code == gwi::cli::kExitUsage);
    CHECK(call({"frobnicate"}).code == gwi::cli::kExitUsage);
    CHECK(call({"--help"}).code == gwi::cli::kExitOk);
}

TEST_CASE("estimate agrees with the library") {
    const fs::path path = scratch("est.txt");
    std::vector<std::string> args = kSimulateExample;
    args.insert(args.end(), {"-o", path.string()});
    REQUIRE(call(args).code == 0);
    const gwi::TrajectoryFile file = gwi::read_trajectory_file(path.string());

    SUBCASE("moment") {
        const Outcome o = call({"estimate", "--input", path.string(), "--method", "moment"});
        REQUIRE(o.code == 0);
        const json j = json::parse(o.out);
        const gwi::MomentEstimates lib = gwi::estimate(file.values, 2, 2000);
        CHECK(j.at("k0") == 2);
        CHECK(j.at("n") == 2000);
        CHECK(j.at("r_hat").get<double>() == lib.r_hat);
        CHECK(j.at("m_hat").get<double>() == lib.m_hat);
    }
    SUBCASE("lrv") {
        const Outcome o = call({"estimate", "--input", path.string(), "--method", "lrv"});
        REQUIRE(o.code == 0);
        const json j = json::parse(o.out);
        CHECK(j.at("ar_order") == 12);
        CHECK(j.at("orthogonality").get<double>() < 1e-8);
        CHECK(j.at("omega_sp").size() == 2);
    }
    SUBCASE("general") {
        const Outcome missing = call({"estimate", "--input", path.string(), "--method", "general"});
        CHECK(missing.code == gwi::cli::kExitUsage);
        CHECK(missing.err.find("--km") != std::string::npos);

        const Outcome o = call({"estimate", "--input", path.string(), "--method", "general", "--km", "0.1"});
        REQUIRE(o.code == 0);
        const json j = json::parse(o.out);
        CHECK(j.at("n").get<std::size_t>() + j.at("k_n").get<std::size_t>() + 1 <= 2003);
        CHECK(j.at("exp_s_hat").get<double>() == doctest::Approx(std::exp(j.at("s_hat").get<double>())));

        const Outcome wide = call({"estimate", "--input", path.string(), "--method", "general", "--km", "0.1",
                                   "--kn-override", "sqrt"});
        REQUIRE(wide.code == 0);
        const json w = json::parse(wide.out);
        CHECK(w.at("lag_rule") == "sqrt");
        CHECK(w.at("exp_s_hat").get<double>() > 0.8);
        CHECK(w.at("k_n").get<int>() > j.at("k_n").get<int>());
    }
    SUBCASE("flag conflicts") {
        CHECK(call({"estimate", "--input", path.string(), "--method", "moment", "--km", "0.1"}).code ==
              gwi::cli::kExitUsage);
        CHECK(call({"estimate", "--input", path.string(), "--method", "general", "--km", "0.1", "--k0", "2"}).code ==
              gwi::cli::kExitUsage);
        CHECK(call({"estimate", "--input", path.string(), "--n", "5000"}).code == gwi::cli::kExitUsage);
    }
}

TEST_CASE("estimator errors become a JSON error object") {
    const fs::path path = scratch("constant.txt");
    {
        std::ofstream f(path);
        f << "# constant trajectory\n";
        for (int i = 0; i < 50; ++i) f << "3\n";
    }
    const Outcome o = call({"estimate", "--input", path.string(), "--method", "moment"});
    CHECK(o.code == gwi::cli::kExitRuntime);
    const json j = json::parse(o.out);
    CHECK(j.at("error").at("kind") == "degenerate_denominator");
    CHECK_FALSE(j.at("error").at("message").get<std::string>().empty());

    const Outcome missing = call({"estimate", "--input", scratch("does-not-exist.txt").string(), "--method", "moment"});
    CHECK(missing.code == gwi::cli::kExitUsage);
    CHECK(missing.err.find("cannot open") != std::string::npos);
}

TEST_CASE("reproduce") {
    const std::vector<std::string> args{"reproduce", "--table", "fig-var", "--reps", "3", "--seed", "5", "--threads", "2"};
    const Outcome a = call(args);
    REQUIRE(a.code == 0);
    std::istringstream lines(a.out);
    std::string comment, header;
    std::getline(lines, comment);
    std::getline(lines, header);
    CHECK(comment.rfind("# gw-estim reproduce", 0) == 0);
    CHECK(header ==
          "table,repro,immigration,k0,c,lag_rule,k_n,n,lambda0,parameter,reps,failures,truth,mean,bias,variance,rmse,"
          "min,q1,median,q3,max,mean_exp,omega_sp_median,omega_s_median,n_mse");
    CHECK(line_count(a.out) == 2 + 4);  // two cells, r_hat and m_hat each

    std::vector<std::string> serial = args;
    serial.back() = "1";
    CHECK(call(serial).out == a.out);

    CHECK(call({"reproduce", "--table", "9"}).code == gwi::cli::kExitUsage);
}

TEST_CASE("GW_ESTIM_THREADS") {
    ::setenv("GW_ESTIM_THREADS", "many", 1);
    const Outcome bad = call({"reproduce", "--table", "fig-var", "--reps", "2"});
    CHECK(bad.code == gwi::cli::kExitUsage);
    ::setenv("GW_ESTIM_THREADS", "1", 1);
    CHECK(call({"reproduce", "--table", "fig-var", "--reps", "2"}).code == 0);
    ::unsetenv("GW_ESTIM_THREADS");
}

TEST_CASE("the installed binary reports exit codes") {
    const char* bin = std::getenv("GW_ESTIM_BIN");
    if (bin == nullptr) return;
    const std::string quiet = " >/dev/null 2>&1";
    auto status = [&](const std::string& tail) {
        const int raw = std::system((std::string(bin) + " " + tail + quiet).c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(status("simulate --lambda 0.5 --immigration iid-poisson --n 20 --seed 1") == 0);
    CHECK(status("simulate --lambda 1.5 --immigration iid-poisson --n 20 --seed 1") == 2);
    CHECK(status("estimate --method moment --input " + scratch("does-not-exist.txt").string()) == 2);
    const fs::path constant = scratch("constant.txt");
    CHECK(status("estimate --method moment --input " + constant.string()) == 1);
}
