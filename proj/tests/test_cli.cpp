#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliRun run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path();
    const fs::path out = dir / ("rmrce_cli_out_" + std::to_string(counter));
    const fs::path err = dir / ("rmrce_cli_err_" + std::to_string(counter));
    ++counter;
    const std::string cmd = std::string(RMRCE_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "rmrce_cli_tests";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST(Cli, VersionFlag) {
    const auto r = run_cli("--version");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("rmrce"), std::string::npos);
    EXPECT_NE(r.out.find("0.1.0"), std::string::npos);
}

TEST(Cli, SimulateFitRoundTrip) {
    const auto dir = work_dir();
    const auto csv = dir / "t.csv";
    const auto truth = dir / "beta.json";
    const auto fit_json = dir / "fit.json";
    auto r = run_cli("simulate --n 30 --d 3 --seed 1 --out " + csv.string() + " --truth-out " +
                     truth.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const json truth_doc = json::parse(slurp(truth));
    EXPECT_DOUBLE_EQ(truth_doc["beta_star"][0].get<double>(), 1.0);
    EXPECT_EQ(truth_doc["beta0"].size(), 3u);

    const std::string before = slurp(csv);
    r = run_cli("fit --input " + csv.string() + " --lambda 0.05 --trace --out " +
                fit_json.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(slurp(csv), before) << "fit must not mutate its input";

    const json result = json::parse(slurp(fit_json));
    EXPECT_TRUE(result.contains("coefficients"));
    EXPECT_TRUE(result.contains("converged"));
    EXPECT_TRUE(result.contains("selected"));
    EXPECT_DOUBLE_EQ(result["coefficients"]["x1"].get<double>(), 1.0);
    EXPECT_EQ(result["provenance"]["command"], "fit");
    ASSERT_TRUE(result.contains("trace"));
    ASSERT_GE(result["trace"].size(), 1u);
    EXPECT_TRUE(result["trace"][0].contains("gap_bound"));
    EXPECT_TRUE(result["trace"][0].contains("penalty"));
}

TEST(Cli, MissingInputIsExitOneNamingTheFlag) {
    const auto r = run_cli("fit --lambda 0.1");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("--input"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("error:"), std::string::npos) << r.err;
}

TEST(Cli, FoldsLargerThanNIsExitOne) {
    const auto dir = work_dir();
    const auto csv = dir / "tiny.csv";
    auto r = run_cli("simulate --n 6 --d 2 --seed 2 --out " + csv.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    r = run_cli("cv --input " + csv.string() + " --folds 9 --lambdas 0.05 --alphas 5");
    EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, MalformedCsvIsExitOneWithAddress) {
    const auto dir = work_dir();
    const auto csv = dir / "bad.csv";
    {
        std::ofstream out(csv);
        out << "y,x1,x2\n1,2,3\n4,,6\n7,8,9\n";
    }
    const auto r = run_cli("fit --input " + csv.string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("row 3"), std::string::npos) << r.err;
}

TEST(Cli, ConfigFileFlagsAndPrecedence) {
    const auto dir = work_dir();
    const auto csv = dir / "cfg_data.csv";
    auto r = run_cli("simulate --n 25 --d 3 --seed 3 --out " + csv.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;

    const auto cfg = dir / "cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"alpha": 3.0, "lambda": 0.07, "mystery_knob": 12})";
    }
    const auto fit_json = dir / "cfg_fit.json";
    r = run_cli("fit --input " + csv.string() + " --config " + cfg.string() + " --alpha 7 --out " +
                fit_json.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.err.find("mystery_knob"), std::string::npos) << "unknown key should warn";

    const json result = json::parse(slurp(fit_json));
    EXPECT_DOUBLE_EQ(result["provenance"]["config"]["alpha"].get<double>(), 7.0);   // flag wins
    EXPECT_DOUBLE_EQ(result["provenance"]["config"]["lambda"].get<double>(), 0.07); // from file

    // empty config object: all defaults, no error
    {
        std::ofstream out(cfg);
        out << "{}";
    }
    r = run_cli("fit --input " + csv.string() + " --config " + cfg.string());
    EXPECT_EQ(r.exit_code, 0) << r.err;
}

TEST(Cli, ConfigParseErrorIsExitOne) {
    const auto dir = work_dir();
    const auto cfg = dir / "broken.json";
    {
        std::ofstream out(cfg);
        out << "{\"alpha\": }";
    }
    const auto r = run_cli("fit --input nowhere.csv --config " + cfg.string());
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("parse error"), std::string::npos) << r.err;
}

TEST(Cli, CvWritesScoreTable) {
    const auto dir = work_dir();
    const auto csv = dir / "cv_data.csv";
    auto r = run_cli("simulate --n 30 --d 3 --seed 4 --out " + csv.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto cv_json = dir / "cv.json";
    r = run_cli("cv --input " + csv.string() +
                " --lambdas 0.05,0.1 --alphas 3,5 --folds 5 --seed 7 --threads 2 --out " +
                cv_json.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const json result = json::parse(slurp(cv_json));
    EXPECT_EQ(result["score_table"].size(), 4u);
    EXPECT_EQ(result["fold_assignments"].size(), 30u);
    EXPECT_GT(result["best_lambda"].get<double>(), 0.0);
}

TEST(Cli, BenchSmoke) {
    const auto dir = work_dir();
    const auto out_csv = dir / "bench.csv";
    const auto r = run_cli(
        "bench linear-d50 --reps 2 --seed 1 --n-list 40 --methods rmrce --lambdas 0.05 --out " +
        out_csv.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const std::string content = slurp(out_csv);
    EXPECT_NE(content.find("scenario,method,n,d,lambda,alpha,metric,value,stderr"),
              std::string::npos);
    EXPECT_NE(content.find("linear-d50,rmrce,40,50,"), std::string::npos);
    EXPECT_NE(content.find("est_error"), std::string::npos);
}

TEST(Cli, BenchRejectsUnknownScenario) {
    const auto r = run_cli("bench warp-drive --reps 1");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("warp-drive"), std::string::npos);
}

TEST(Cli, DiagnoseSmoke) {
    const auto dir = work_dir();
    const auto csv = dir / "diag_data.csv";
    auto r = run_cli("simulate --n 40 --d 4 --link cubic --seed 9 --out " + csv.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto diag_json = dir / "diag.json";
    r = run_cli("diagnose --input " + csv.string() + " --seed 3 --m-tests 1 --lambda 0.05 --out " +
                diag_json.string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const json result = json::parse(slurp(diag_json));
    EXPECT_TRUE(result["pass"].get<bool>());
    EXPECT_GT(result["rho"].get<double>(), 0.5);
}

TEST(Cli, UnknownCommand) {
    const auto r = run_cli("transmogrify");
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("unknown command"), std::string::npos);
}
