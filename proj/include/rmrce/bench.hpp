#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "rmrce/metrics.hpp"

namespace rmrce {

struct BenchRow {
    std::string scenario;
    std::string method;
    Eigen::Index n = 0;
    Eigen::Index d = 0;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    std::string metric;
    double value = 0.0;
    double stderr_value = 0.0;
};

struct BenchOptions {
    std::string scenario;
    int reps = 25;
    std::uint64_t seed = 1;
    std::vector<std::string> methods{"rmrce", "lasso", "hinge"};
    std::vector<double> lambdas;     // empty -> scenario default
    double alpha = 5.0;
    SmoothingKernel kernel = SmoothingKernel::GaussianCdf;
    std::vector<Eigen::Index> n_list; // empty -> scenario default
    int threads = 1;
};

inline const std::vector<std::string>& bench_scenarios() {
    static const std::vector<std::string> names{"linear-d50", "linear-d200", "cubic-d50",
                                                "cubic-d200", "hessian-pd", "stacking"};
    return names;
}

namespace detail {

struct MeanStderr {
    double mean = 0.0;
    double se = 0.0;
    int used = 0;
};

inline MeanStderr summarize(const std::vector<double>& values) {
    MeanStderr s;
    double sum = 0.0, sum2 = 0.0;
    for (double v : values) {
        if (std::isnan(v)) continue;
        sum += v;
        sum2 += v * v;
        ++s.used;
    }
    if (s.used == 0) return s;
    s.mean = sum / s.used;
    if (s.used > 1)
        s.se = std::sqrt(std::max(0.0, (sum2 - sum * sum / s.used) / (s.used - 1)) /
                         static_cast<double>(s.used));
    return s;
}

// CV over a glmnet-style grid minimizing held-out MSE; the lasso's natural
// lambda scale depends on the response, so a fixed grid shared with the rank
// methods would be meaningless.
inline double lasso_cv_lambda(const Dataset& data, int anchor, std::uint64_t seed) {
    const Eigen::Index n = data.n();
    double lambda_max = 0.0;
    for (Eigen::Index j = 0; j < data.d(); ++j) {
        if (j == anchor) continue;
        lambda_max = std::max(lambda_max, std::abs(data.x.col(j).dot(data.y)) /
                                              static_cast<double>(n));
    }
    if (lambda_max <= 0.0) return 0.0;
    std::vector<double> grid(25);
    for (int i = 0; i < 25; ++i)
        grid[static_cast<std::size_t>(i)] = lambda_max * std::pow(10.0, -4.0 * i / 24.0);

    const int folds = 5;
    const auto assignment = fold_split(n, folds, seed);
    double best_mse = std::numeric_limits<double>::infinity();
    double best_lambda = grid.front();
    for (double lambda : grid) {
        double mse = 0.0;
        for (int k = 0; k < folds; ++k) {
            const Dataset train = subset_rows(data, assignment, k, true);
            const Dataset held = subset_rows(data, assignment, k, false);
            const FitResult fit = fit_lasso(train, lambda, anchor);
            mse += (held.y - held.x * fit.coef).squaredNorm() / held.n();
        }
        mse /= folds;
        if (mse < best_mse) {
            best_mse = mse;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

struct RepMetrics {
    double est_error = std::numeric_limits<double>::quiet_NaN();
    double tpr = std::numeric_limits<double>::quiet_NaN();
    double fpr = std::numeric_limits<double>::quiet_NaN();
    double lambda_used = std::numeric_limits<double>::quiet_NaN();
};

inline RepMetrics eval_method(const std::string& method, const SimulatedData& sim,
                              const FitConfig& cfg, double lambda, std::uint64_t rep_seed) {
    RepMetrics m;
    const std::set<int> support(sim.true_support.begin(), sim.true_support.end());
    Vector coef;
    if (method == "rmrce") {
        FitConfig c = cfg;
        c.lambda = lambda;
        coef = fit_rmrce(sim.data, c).coef;
        m.lambda_used = lambda;
    } else if (method == "lasso") {
        const double cv_lambda = lasso_cv_lambda(sim.data, cfg.anchor_index, rep_seed);
        coef = fit_lasso(sim.data, cv_lambda, cfg.anchor_index).coef;
        m.lambda_used = cv_lambda;
    } else if (method == "hinge") {
        FitConfig c = cfg;
        c.max_sweeps = std::min(c.max_sweeps, 200);
        coef = fit_hinge(sim.data, lambda, c).coef;
        m.lambda_used = lambda;
    } else {
        throw invalid_input("unknown method '" + method + "'");
    }

    if (coef[cfg.anchor_index] != 0.0)
        m.est_error = normalized_l2_error(coef, sim.beta_star, cfg.anchor_index);
    Vector normalized = coef;
    if (coef[cfg.anchor_index] != 0.0) normalized /= coef[cfg.anchor_index];
    normalized[cfg.anchor_index] = 1.0;
    const auto sel = selection_metrics(make_anchored(normalized, cfg.anchor_index), support);
    m.tpr = sel.tpr;
    m.fpr = sel.fpr;
    return m;
}

inline void estimation_scenario(const BenchOptions& opt, Link link, Eigen::Index d,
                                std::vector<BenchRow>& rows) {
    // Scenario defaults: the small-d presets replay the estimation tables
    // (small penalty), the d=200 presets replay the selection table.
    const std::vector<Eigen::Index> n_list =
        opt.n_list.empty() ? std::vector<Eigen::Index>{100, 200} : opt.n_list;
    const std::vector<double> lambdas =
        opt.lambdas.empty() ? std::vector<double>{d >= 200 ? 0.05 : 0.005} : opt.lambdas;

    FitConfig cfg;
    cfg.alpha = opt.alpha;
    cfg.kernel = opt.kernel;

    for (Eigen::Index n : n_list) {
        for (double lambda : lambdas) {
            for (const std::string& method : opt.methods) {
                std::vector<double> est(static_cast<std::size_t>(opt.reps)),
                    tpr(static_cast<std::size_t>(opt.reps)), fpr(static_cast<std::size_t>(opt.reps)),
                    lam(static_cast<std::size_t>(opt.reps));
                parallel_tasks(opt.reps, opt.threads, [&](int rep) {
                    SimSpec spec;
                    spec.n = n;
                    spec.d = d;
                    spec.link = link;
                    spec.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(rep));
                    const SimulatedData sim = generate_dataset(spec);
                    RepMetrics m;
                    try {
                        m = eval_method(method, sim, cfg, lambda, spec.seed);
                    } catch (const numeric_error&) {
                        // all-NaN row entries are dropped by summarize()
                    }
                    est[static_cast<std::size_t>(rep)] = m.est_error;
                    tpr[static_cast<std::size_t>(rep)] = m.tpr;
                    fpr[static_cast<std::size_t>(rep)] = m.fpr;
                    lam[static_cast<std::size_t>(rep)] = m.lambda_used;
                });
                const auto row_lambda = method == "lasso" ? summarize(lam).mean : lambda;
                for (const auto& [name, values] :
                     {std::pair<const char*, const std::vector<double>*>{"est_error", &est},
                      {"tpr", &tpr},
                      {"fpr", &fpr}}) {
                    const MeanStderr s = summarize(*values);
                    rows.push_back(BenchRow{opt.scenario, method, n, d, row_lambda, opt.alpha,
                                            name, s.mean, s.se});
                }
            }
        }
    }
}

inline void hessian_scenario(const BenchOptions& opt, std::vector<BenchRow>& rows) {
    const std::vector<std::pair<Eigen::Index, Eigen::Index>> grid{
        {50, 50}, {50, 200}, {100, 50}, {100, 200}, {300, 50}, {300, 200}};
    for (const auto& [n, d] : grid) {
        SimSpec spec;
        spec.n = n;
        spec.d = d;
        const double prop =
            hessian_pd_experiment(spec, opt.reps, opt.alpha, opt.kernel, opt.seed, opt.threads);
        rows.push_back(BenchRow{opt.scenario, "rmrce", n, d,
                                std::numeric_limits<double>::quiet_NaN(), opt.alpha,
                                "pd_proportion", prop, 0.0});
    }
}

inline void stacking_scenario(const BenchOptions& opt, std::vector<BenchRow>& rows) {
    const std::vector<std::pair<Eigen::Index, Eigen::Index>> grid{
        {50, 50}, {100, 50}, {150, 50}, {200, 50}, {50, 200}, {100, 200}, {150, 200}, {200, 200}};
    FitConfig cfg;
    cfg.alpha = opt.alpha;
    cfg.kernel = opt.kernel;
    cfg.lambda = opt.lambdas.empty() ? 0.03 : opt.lambdas.front();
    SimSpec base;
    const int s = 8; // nonzero entries of the default beta0
    const auto table = stacking_curves(base, grid, s, cfg, opt.reps, opt.seed, opt.threads);
    for (const auto& row : table) {
        rows.push_back(BenchRow{opt.scenario, "rmrce", row.n, row.d, cfg.lambda, opt.alpha,
                                "est_error", row.mean_error, row.stderr_error});
        rows.push_back(BenchRow{opt.scenario, "rmrce", row.n, row.d, cfg.lambda, opt.alpha,
                                "rescaled_n", row.rescaled_n, 0.0});
    }
}

} // namespace detail

inline std::vector<BenchRow> run_bench(const BenchOptions& opt) {
    std::vector<BenchRow> rows;
    if (opt.scenario == "linear-d50")
        detail::estimation_scenario(opt, Link::Identity, 50, rows);
    else if (opt.scenario == "linear-d200")
        detail::estimation_scenario(opt, Link::Identity, 200, rows);
    else if (opt.scenario == "cubic-d50")
        detail::estimation_scenario(opt, Link::Cubic, 50, rows);
    else if (opt.scenario == "cubic-d200")
        detail::estimation_scenario(opt, Link::Cubic, 200, rows);
    else if (opt.scenario == "hessian-pd")
        detail::hessian_scenario(opt, rows);
    else if (opt.scenario == "stacking")
        detail::stacking_scenario(opt, rows);
    else
        throw invalid_input("unknown scenario '" + opt.scenario + "'");
    return rows;
}

inline std::string format_bench_value(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Deterministic CSV: provenance comment lines (no timestamps), a header, one
// row per metric. Byte-identical across runs and thread counts.
inline void write_bench_csv(const std::string& path, const BenchOptions& opt,
                            const std::vector<BenchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write '" + path + "'");
    out << "# rmrce bench v" << kVersion << "\n";
    out << "# scenario=" << opt.scenario << " reps=" << opt.reps << " seed=" << opt.seed
        << " alpha=" << format_bench_value(opt.alpha) << " kernel=" << kernel_name(opt.kernel)
        << "\n";
    out << "# methods=";
    for (std::size_t i = 0; i < opt.methods.size(); ++i)
        out << (i ? "," : "") << opt.methods[i];
    out << "\n";
    out << "scenario,method,n,d,lambda,alpha,metric,value,stderr\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.method << ',' << r.n << ',' << r.d << ','
            << format_bench_value(r.lambda) << ',' << format_bench_value(r.alpha) << ','
            << r.metric << ',' << format_bench_value(r.value) << ','
            << format_bench_value(r.stderr_value) << "\n";
    }
}

} // namespace rmrce
