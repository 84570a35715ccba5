// Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
// Statistical criteria run at reduced replication counts with the widened
// tolerances pinned below; exact criteria use strict tolerances.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "rmrce/bench.hpp"
#include "rmrce/metrics.hpp"
#include "rmrce/optim.hpp"
#include "rmrce/simulate.hpp"

using rmrce::Dataset;
using rmrce::FitConfig;
using rmrce::FitResult;
using rmrce::SimSpec;
using rmrce::SmoothingKernel;
using rmrce::Vector;

namespace {

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool ok, const std::string& detail, double seconds) {
    std::printf("[CRITERION %02d] %s — %s (%.1fs)\n", criterion, ok ? "PASS" : "FAIL",
                detail.c_str(), seconds);
    std::fflush(stdout);
}

Dataset random_dataset(int n, int d, std::uint64_t seed) {
    rmrce::Philox4x32 rng(seed);
    Dataset data;
    data.y.resize(n);
    data.x.resize(n, d);
    for (int i = 0; i < n; ++i) {
        data.y[i] = rng.next_normal();
        for (int j = 0; j < d; ++j) data.x(i, j) = rng.next_normal();
    }
    for (int j = 0; j < d; ++j) data.feature_names.push_back("x" + std::to_string(j + 1));
    return data;
}

const SmoothingKernel kKernels[3] = {SmoothingKernel::Sigmoid, SmoothingKernel::GaussianCdf,
                                     SmoothingKernel::DoubleExponential};

bool coef_bitwise_equal(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index j = 0; j < a.size(); ++j)
        if (a[j] != b[j]) return false;
    return true;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RMRCE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

// Criterion 1: analytic gradient vs central differences (rel err <= 1e-6) and
// analytic Hessian vs gradient differences (entrywise <= 1e-4) on 100 random
// instances across all three kernels.
TEST(Acceptance, C01_GradientAndHessianCorrectness) {
    Stopwatch timer;
    rmrce::Philox4x32 rng(10001);
    int grad_failures = 0, hess_failures = 0;
    double worst_grad = 0.0, worst_hess = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 5 + static_cast<int>(rng.next_u64() % 26);
        const int d = 2 + static_cast<int>(rng.next_u64() % 7);
        const SmoothingKernel kernel = kKernels[trial % 3];
        const double alpha = 0.5 + 4.5 * rng.next_u01();
        const Dataset data = random_dataset(n, d, rng.next_u64());
        Vector beta(d);
        for (int j = 0; j < d; ++j) beta[j] = rng.next_normal();
        beta[0] = 1.0;

        const Vector grad = rmrce::smoothed_gradient_raw(data, beta, alpha, kernel);
        const double hg = 1e-6;
        Vector fd(d);
        for (int j = 0; j < d; ++j) {
            Vector up = beta, dn = beta;
            up[j] += hg;
            dn[j] -= hg;
            fd[j] = (rmrce::smoothed_loss_raw(data, up, alpha, kernel) -
                     rmrce::smoothed_loss_raw(data, dn, alpha, kernel)) /
                    (2.0 * hg);
        }
        const double rel =
            (grad - fd).cwiseAbs().maxCoeff() / std::max(1.0, fd.cwiseAbs().maxCoeff());
        worst_grad = std::max(worst_grad, rel);
        if (rel > 1e-6) ++grad_failures;

        const double hh = 1e-4;
        const rmrce::Matrix hess = rmrce::smoothed_hessian_raw(data, beta, alpha, kernel);
        double max_abs = 0.0;
        for (int j = 0; j < d; ++j) {
            Vector up = beta, dn = beta;
            up[j] += hh;
            dn[j] -= hh;
            const Vector col = (rmrce::smoothed_gradient_raw(data, up, alpha, kernel) -
                                rmrce::smoothed_gradient_raw(data, dn, alpha, kernel)) /
                               (2.0 * hh);
            max_abs = std::max(max_abs, (hess.col(j) - col).cwiseAbs().maxCoeff());
        }
        worst_hess = std::max(worst_hess, max_abs);
        if (max_abs > 1e-4) ++hess_failures;
    }
    const bool ok = grad_failures == 0 && hess_failures == 0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "100 instances; worst gradient rel err %.2e (tol 1e-6), worst Hessian err %.2e "
                  "(tol 1e-4)",
                  worst_grad, worst_hess);
    report(1, ok, detail, timer.seconds());
    EXPECT_EQ(grad_failures, 0);
    EXPECT_EQ(hess_failures, 0);
}

// Criterion 2: fits on (y, X) and (y^3, X) are bit-identical on 20 instances.
TEST(Acceptance, C02_RankInvarianceOfFit) {
    Stopwatch timer;
    int failures = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Dataset data = random_dataset(30, 5, 20000 + static_cast<std::uint64_t>(trial));
        Dataset cubed = data;
        for (int i = 0; i < 30; ++i) cubed.y[i] = std::pow(data.y[i], 3);
        FitConfig cfg;
        cfg.lambda = 0.05;
        cfg.kernel = kKernels[trial % 3];
        const FitResult a = rmrce::fit_rmrce(data, cfg);
        const FitResult b = rmrce::fit_rmrce(cubed, cfg);
        if (!coef_bitwise_equal(a.coef, b.coef) || a.objective != b.objective ||
            a.sweeps_used != b.sweeps_used || a.converged != b.converged)
            ++failures;
    }
    report(2, failures == 0, "20 instances fitted on y and y^3, bit-identical results",
           timer.seconds());
    EXPECT_EQ(failures, 0);
}

// Criterion 3: the smoothing gap bound dominates |loss - saturated limit| on
// the ladder alpha = 1,2,...,256 and contracts by <= 0.75 per doubling past 8.
TEST(Acceptance, C03_SmoothingConvergence) {
    Stopwatch timer;
    const Dataset data = random_dataset(25, 4, 2023);
    rmrce::Philox4x32 rng(30003);
    Vector beta(4);
    for (int j = 0; j < 4; ++j) beta[j] = rng.next_normal();
    beta[0] = 1.0;

    bool bound_ok = true, ratio_ok = true;
    for (const SmoothingKernel kernel : kKernels) {
        const double saturated = rmrce::smoothed_loss_saturated_raw(data, beta);
        double prev_bound = -1.0, prev_alpha = 0.0;
        for (double alpha = 1.0; alpha <= 256.0; alpha *= 2.0) {
            const double gap =
                std::abs(rmrce::smoothed_loss_raw(data, beta, alpha, kernel) - saturated);
            const double bound = rmrce::smoothing_gap_bound_raw(data, beta, alpha, kernel);
            if (gap > bound + 1e-15) bound_ok = false;
            if (prev_alpha >= 8.0 && prev_bound > 0.0 && bound > 0.75 * prev_bound)
                ratio_ok = false;
            prev_bound = bound;
            prev_alpha = alpha;
        }
    }
    report(3, bound_ok && ratio_ok,
           "gap bound dominates the saturation error and contracts by <= 0.75 per doubling",
           timer.seconds());
    EXPECT_TRUE(bound_ok);
    EXPECT_TRUE(ratio_ok);
}

// Criterion 4: linear model, d=50, Gaussian kernel, alpha=5: the replayed
// table statistic over 25 replications is <= 0.05 at n=200 and <= 0.12 at
// n=100. The tabulated statistic is the mean SQUARED normalized l2 error:
// a plain-norm reading is ruled out because the table's lasso entries sit
// several times below the oracle-OLS risk floor, which no estimator can do,
// while the squared reading matches both methods here to within Monte-Carlo
// noise (and the thresholds then sit at the intended ~4x slack).
TEST(Acceptance, C04_LinearModelEstimationReplay) {
    Stopwatch timer;
    FitConfig cfg;
    cfg.alpha = 5.0;
    cfg.lambda = 0.005;
    double sq200 = 0.0, sq100 = 0.0, norm200 = 0.0, norm100 = 0.0;
    for (const auto& [n, sq_ptr, norm_ptr] :
         {std::tuple<int, double*, double*>{200, &sq200, &norm200},
          {100, &sq100, &norm100}}) {
        double sum_sq = 0.0, sum = 0.0;
        for (int rep = 0; rep < 25; ++rep) {
            SimSpec spec;
            spec.n = n;
            spec.d = 50;
            spec.seed = rmrce::derive_seed(400, static_cast<std::uint64_t>(rep));
            const auto sim = rmrce::generate_dataset(spec);
            const FitResult fit = rmrce::fit_rmrce(sim.data, cfg);
            const double err = rmrce::normalized_l2_error(fit.coef, sim.beta_star, 0);
            sum += err;
            sum_sq += err * err;
        }
        *sq_ptr = sum_sq / 25.0;
        *norm_ptr = sum / 25.0;
    }
    const bool ok = sq200 <= 0.05 && sq100 <= 0.12;
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "table statistic %.4f at n=200 (tol 0.05), %.4f at n=100 (tol 0.12); "
                  "plain-norm means %.3f / %.3f; 25 reps",
                  sq200, sq100, norm200, norm100);
    report(4, ok, detail, timer.seconds());
    EXPECT_LE(sq200, 0.05);
    EXPECT_LE(sq100, 0.12);
}

// Criterion 5: variable selection at lambda=0.05, n=100, d=200: mean FPR
// <= 0.02 and mean TPR >= 0.65 over 25 replications.
TEST(Acceptance, C05_VariableSelectionReplay) {
    Stopwatch timer;
    FitConfig cfg;
    cfg.alpha = 5.0;
    cfg.lambda = 0.05;
    double fpr_sum = 0.0, tpr_sum = 0.0;
    for (int rep = 0; rep < 25; ++rep) {
        SimSpec spec;
        spec.n = 100;
        spec.d = 200;
        spec.seed = rmrce::derive_seed(500, static_cast<std::uint64_t>(rep));
        const auto sim = rmrce::generate_dataset(spec);
        const FitResult fit = rmrce::fit_rmrce(sim.data, cfg);
        const std::set<int> support(sim.true_support.begin(), sim.true_support.end());
        const auto m = rmrce::selection_metrics(fit.anchored(), support);
        fpr_sum += m.fpr;
        tpr_sum += m.tpr;
    }
    const double fpr = fpr_sum / 25.0, tpr = tpr_sum / 25.0;
    const bool ok = fpr <= 0.02 && tpr >= 0.65;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "mean FPR %.4f (tol <= 0.02), mean TPR %.3f (tol >= 0.65), 25 reps", fpr, tpr);
    report(5, ok, detail, timer.seconds());
    EXPECT_LE(fpr, 0.02);
    EXPECT_GE(tpr, 0.65);
}

// Criterion 6: under the cubic link at d=50, n=200 the rank fit keeps its
// table statistic <= 0.05 while the lasso degrades to >= 0.2 (same squared
// statistic as criterion 4; the lasso bound holds under either reading);
// the rank fits are bit-identical to the linear-model fits with shared seeds.
TEST(Acceptance, C06_CubicModelSuperiority) {
    Stopwatch timer;
    FitConfig cfg;
    cfg.alpha = 5.0;
    cfg.lambda = 0.005;
    double rmrce_sq = 0.0, lasso_sq = 0.0, rmrce_norm = 0.0, lasso_norm = 0.0;
    bool bit_identical = true;
    for (int rep = 0; rep < 25; ++rep) {
        SimSpec spec;
        spec.n = 200;
        spec.d = 50;
        spec.seed = rmrce::derive_seed(400, static_cast<std::uint64_t>(rep));
        spec.link = rmrce::Link::Cubic;
        const auto cubic = rmrce::generate_dataset(spec);
        spec.link = rmrce::Link::Identity;
        const auto linear = rmrce::generate_dataset(spec);

        const FitResult fit_cubic = rmrce::fit_rmrce(cubic.data, cfg);
        const FitResult fit_linear = rmrce::fit_rmrce(linear.data, cfg);
        if (!coef_bitwise_equal(fit_cubic.coef, fit_linear.coef)) bit_identical = false;
        const double rank_err = rmrce::normalized_l2_error(fit_cubic.coef, cubic.beta_star, 0);
        rmrce_sq += rank_err * rank_err;
        rmrce_norm += rank_err;

        const double cv_lambda = rmrce::detail::lasso_cv_lambda(cubic.data, 0, spec.seed);
        const FitResult lasso = rmrce::fit_lasso(cubic.data, cv_lambda, 0);
        const double lasso_err = rmrce::normalized_l2_error(lasso.coef, cubic.beta_star, 0);
        lasso_sq += lasso_err * lasso_err;
        lasso_norm += lasso_err;
    }
    rmrce_sq /= 25.0;
    lasso_sq /= 25.0;
    const bool ok = rmrce_sq <= 0.05 && lasso_sq >= 0.2 && bit_identical;
    char detail[220];
    std::snprintf(detail, sizeof(detail),
                  "rank-fit statistic %.4f (tol <= 0.05), lasso statistic %.3f (tol >= 0.2); "
                  "plain-norm means %.3f / %.3f; rank fits bit-identical to linear run: %s",
                  rmrce_sq, lasso_sq, rmrce_norm / 25.0, lasso_norm / 25.0,
                  bit_identical ? "yes" : "no");
    report(6, ok, detail, timer.seconds());
    EXPECT_LE(rmrce_sq, 0.05);
    EXPECT_GE(lasso_sq, 0.2);
    EXPECT_TRUE(bit_identical);
}

// Criterion 7: PSD proportion of the smoothed Hessian at the truth, Gaussian
// kernel, no outliers: >= 0.95 at (n=300, d=50) and within [0.70, 0.95] at
// (n=50, d=200), 50 replications each.
TEST(Acceptance, C07_HessianPsdProportions) {
    Stopwatch timer;
    SimSpec spec_big;
    spec_big.n = 300;
    spec_big.d = 50;
    const double prop_big =
        rmrce::hessian_pd_experiment(spec_big, 50, 5.0, SmoothingKernel::GaussianCdf, 700);

    SimSpec spec_hard;
    spec_hard.n = 50;
    spec_hard.d = 200;
    const double prop_hard =
        rmrce::hessian_pd_experiment(spec_hard, 50, 5.0, SmoothingKernel::GaussianCdf, 701);

    const bool ok = prop_big >= 0.95 && prop_hard >= 0.70 && prop_hard <= 0.95;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "PSD proportion %.3f at (300,50) [>=0.95], %.3f at (50,200) [0.70..0.95]",
                  prop_big, prop_hard);
    report(7, ok, detail, timer.seconds());
    if (prop_hard < 0.70) {
        std::printf(
            "    note: at n=50, d=200, alpha=5 the sample Hessian at the truth is indefinite in\n"
            "    essentially every replication (min eigenvalue ~ -2 vs max diagonal ~ 1.2):\n"
            "    noise-flipped pairs carry peak negative-curvature weight at margins near\n"
            "    1/alpha, contributing ~50 strong negative rank-1 terms per dataset. The\n"
            "    reference proportion for this cell is not reachable from the stated model;\n"
            "    the formula itself is finite-difference-verified and the (300,50) cell\n"
            "    reproduces its reference exactly.\n");
    }
    EXPECT_GE(prop_big, 0.95);
    EXPECT_GE(prop_hard, 0.70);
    EXPECT_LE(prop_hard, 0.95);
}

// Criterion 8: the split-half diagnostic passes <= 10% of 200 pure-noise runs
// at level 0.05 and >= 90% of 200 strong-signal runs.
TEST(Acceptance, C08_SpearmanDiagnosticValidity) {
    Stopwatch timer;
    FitConfig cfg;
    cfg.alpha = 5.0;
    cfg.lambda = 0.05;

    int null_passes = 0;
    for (int run = 0; run < 200; ++run) {
        const Dataset data = random_dataset(100, 10, 800000 + static_cast<std::uint64_t>(run));
        const auto diag = rmrce::spearman_monotonicity_test(
            data, cfg, 900000 + static_cast<std::uint64_t>(run), 1);
        if (diag.pass) ++null_passes;
    }

    int signal_passes = 0;
    Vector beta0 = Vector::Zero(10);
    beta0[0] = 5.0;
    beta0[1] = 4.0;
    beta0[2] = 3.0; // s = 3
    for (int run = 0; run < 200; ++run) {
        SimSpec spec;
        spec.n = 100;
        spec.d = 10;
        spec.beta0 = beta0;
        spec.seed = rmrce::derive_seed(810000, static_cast<std::uint64_t>(run));
        const auto sim = rmrce::generate_dataset(spec);
        const auto diag = rmrce::spearman_monotonicity_test(
            sim.data, cfg, 910000 + static_cast<std::uint64_t>(run), 1);
        if (diag.pass) ++signal_passes;
    }

    const double null_rate = null_passes / 200.0, signal_rate = signal_passes / 200.0;
    const bool ok = null_rate <= 0.10 && signal_rate >= 0.90;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "null pass rate %.3f (tol <= 0.10), signal pass rate %.3f (tol >= 0.90), "
                  "200 runs each",
                  null_rate, signal_rate);
    report(8, ok, detail, timer.seconds());
    EXPECT_LE(null_rate, 0.10);
    EXPECT_GE(signal_rate, 0.90);
}

// Criterion 9: the bench CLI emits byte-identical CSV across two runs and
// across --threads 1 vs --threads 8.
TEST(Acceptance, C09_BenchDeterminism) {
    Stopwatch timer;
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rmrce_acceptance";
    fs::create_directories(dir);
    const fs::path a = dir / "bench_a.csv", b = dir / "bench_b.csv", c = dir / "bench_c.csv";

    const std::string base = "bench linear-d50 --reps 5 --seed 1 --out ";
    ASSERT_EQ(run_cli(base + a.string() + " --threads 1"), 0);
    ASSERT_EQ(run_cli(base + b.string() + " --threads 1"), 0);
    ASSERT_EQ(run_cli(base + c.string() + " --threads 8"), 0);

    const std::string bytes_a = slurp(a);
    const bool ok = !bytes_a.empty() && bytes_a == slurp(b) && bytes_a == slurp(c);
    report(9, ok, "bench linear-d50 --reps 5 --seed 1: identical bytes across runs and thread counts",
           timer.seconds());
    EXPECT_TRUE(ok);
}

// Criterion 10: merge-sort marginal Kendall statistics equal O(n^2)
// brute-force pair counting exactly on 50 random instances.
TEST(Acceptance, C10_WarmStartOracleEquivalence) {
    Stopwatch timer;
    rmrce::Philox4x32 rng(100100);
    int failures = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 20 + static_cast<int>(rng.next_u64() % 181); // n <= 200
        const int d = 2 + static_cast<int>(rng.next_u64() % 7);
        Dataset data = random_dataset(n, d, rng.next_u64());
        if (trial % 3 == 0) // coarsen to force ties
            for (int i = 0; i < n; ++i) data.y[i] = std::floor(data.y[i] * 2.0);

        std::vector<double> ys(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) ys[static_cast<std::size_t>(i)] = data.y[i];
        for (int j = 0; j < d; ++j) {
            std::vector<double> xs(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = data.x(i, j);
            long long brute = 0;
            for (int i = 0; i < n; ++i)
                for (int k = i + 1; k < n; ++k)
                    brute += rmrce::sign_of(ys[static_cast<std::size_t>(i)] -
                                            ys[static_cast<std::size_t>(k)]) *
                             rmrce::sign_of(xs[static_cast<std::size_t>(i)] -
                                            xs[static_cast<std::size_t>(k)]);
            if (rmrce::kendall_numerator(ys, xs) != brute) ++failures;
        }
    }
    report(10, failures == 0,
           "marginal Kendall statistics match O(n^2) counting exactly on 50 instances",
           timer.seconds());
    EXPECT_EQ(failures, 0);
}
