// rmrce command-line tool: simulate / fit / cv / bench / diagnose.
//
// Flags override values from an optional JSON --config file; every output
// embeds the effective configuration and seed so a run can be reproduced
// from its own artifact.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmrce/bench.hpp"
#include "rmrce/csv.hpp"
#include "rmrce/metrics.hpp"
#include "rmrce/optim.hpp"
#include "rmrce/simulate.hpp"
#include "rmrce/tuning.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw rmrce::invalid_input(std::string("bad value '") + tok + "' in " + what);
        }
    }
    rmrce::require(!out.empty(), std::string(what) + " must be a nonempty comma list");
    return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

// Loads a flat JSON config and turns it into synthetic argv tokens inserted
// BEFORE the user's flags; with TakeLast policy on every option the
// command-line value wins. Unknown keys warn and are skipped.
std::vector<std::string> config_to_args(const std::string& path, const CLI::App* sub) {
    std::ifstream in(path);
    if (!in) throw rmrce::invalid_input("cannot open config '" + path + "'");
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw rmrce::invalid_input(std::string("config parse error: ") + e.what());
    }
    rmrce::require(cfg.is_object(), "config file must hold a JSON object");

    std::vector<std::string> args;
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        const CLI::Option* opt = nullptr;
        for (const auto* o : sub->get_options())
            if (o->check_name(flag)) {
                opt = o;
                break;
            }
        if (opt == nullptr) {
            std::cerr << "warning: ignoring unknown config key '" << key << "'\n";
            continue;
        }
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value)
                joined += (joined.empty() ? "" : ",") +
                          (v.is_string() ? v.get<std::string>() : v.dump());
            args.push_back(flag);
            args.push_back(joined);
        } else if (value.is_string()) {
            args.push_back(flag);
            args.push_back(value.get<std::string>());
        } else {
            args.push_back(flag);
            args.push_back(value.dump());
        }
    }
    return args;
}

json provenance(const std::string& command, const json& effective_config) {
    return json{{"tool", "rmrce"},
                {"version", rmrce::kVersion},
                {"command", command},
                {"config", effective_config}};
}

void write_json(const std::string& path, const json& payload) {
    if (path == "-") {
        std::cout << payload.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw rmrce::invalid_input("cannot write '" + path + "'");
    out << payload.dump(2) << "\n";
}

int resolve_anchor(const rmrce::Dataset& data, const std::string& anchor) {
    if (anchor.empty()) return 0;
    for (std::size_t j = 0; j < data.feature_names.size(); ++j)
        if (data.feature_names[j] == anchor) return static_cast<int>(j);
    try {
        const int idx = std::stoi(anchor);
        rmrce::require(idx >= 0 && idx < data.d(), "anchor index out of range");
        return idx;
    } catch (const rmrce::invalid_input&) {
        throw;
    } catch (const std::exception&) {
        throw rmrce::invalid_input("anchor '" + anchor + "' is neither a feature name nor index");
    }
}

struct CommonFitFlags {
    std::string input;
    std::string response;
    std::string anchor;
    double alpha = 5.0;
    double lambda = 0.0;
    std::string kernel = "gaussian";
    int max_sweeps = 500;
    double coord_tol = 1e-4;
    double obj_tol = 1e-6;
    std::string log_level = "info";
    std::string config_path;
    std::string out = "-";
};

void add_common_fit_flags(CLI::App* sub, CommonFitFlags& f, bool input_required = true) {
    auto* input = sub->add_option("--input", f.input, "input CSV (header row required)");
    if (input_required) input->required();
    sub->add_option("--response", f.response, "response column name (default: first column)");
    sub->add_option("--anchor", f.anchor, "anchored feature name or index (default: 0)");
    sub->add_option("--alpha", f.alpha, "smoothing level");
    sub->add_option("--lambda", f.lambda, "L1 penalty");
    sub->add_option("--kernel", f.kernel, "sigmoid | gaussian | doubleexp");
    sub->add_option("--max-sweeps", f.max_sweeps, "coordinate-descent sweep cap");
    sub->add_option("--coord-tol", f.coord_tol, "max coefficient change tolerance");
    sub->add_option("--obj-tol", f.obj_tol, "relative objective change tolerance");
    sub->add_option("--log-level", f.log_level, "quiet | info | debug");
    sub->add_option("--config", f.config_path, "JSON config file (flags override)");
    sub->add_option("--out", f.out, "output path ('-' for stdout)");
}

json fit_config_json(const rmrce::FitConfig& cfg, const CommonFitFlags& f) {
    return json{{"input", f.input},
                {"response", f.response},
                {"anchor", f.anchor},
                {"alpha", cfg.alpha},
                {"lambda", cfg.lambda},
                {"kernel", rmrce::kernel_name(cfg.kernel)},
                {"max_sweeps", cfg.max_sweeps},
                {"coord_tol", cfg.coord_tol},
                {"obj_tol", cfg.obj_tol}};
}

void warn_dimension_rule(const rmrce::Dataset& data, const std::string& log_level) {
    if (log_level == "quiet") return;
    const auto rule =
        rmrce::dimension_rule_check(static_cast<double>(data.n()), static_cast<double>(data.d()));
    if (!rule.ok) std::cerr << "warning: " << rule.message << "\n";
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::vector<std::string>& args);
int cmd_fit(const std::vector<std::string>& args);
int cmd_cv(const std::vector<std::string>& args);
int cmd_bench(const std::vector<std::string>& args);
int cmd_diagnose(const std::vector<std::string>& args);

struct HelpShown {};

// Two-phase parse: peel off --config first, expand it into leading args, then
// parse the combined vector with TakeLast so explicit flags win.
void run_subcommand(CLI::App& app, const std::vector<std::string>& args) {
    for (auto* opt : app.get_options()) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string config_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") config_path = args[i + 1];

    std::vector<std::string> full;
    if (!config_path.empty()) {
        full = config_to_args(config_path, &app);
        full.push_back("--config");
        full.push_back(config_path);
    }
    full.insert(full.end(), args.begin(), args.end());

    // CLI11 consumes a reversed vector
    std::vector<std::string> reversed(full.rbegin(), full.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        throw HelpShown{};
    }
}

int cmd_simulate(const std::vector<std::string>& args) {
    CLI::App app{"generate a synthetic dataset"};
    long long n = 100, d = 50;
    std::string link = "identity", beta0_csv, out = "data.csv", truth_out, config_path;
    std::string log_level = "info";
    double rho = 0.5, sd = 1.0, delta = 0.0, cauchy_scale = 0.01;
    unsigned long long seed = 0;
    app.add_option("--n", n, "observations")->required();
    app.add_option("--d", d, "features")->required();
    app.add_option("--link", link, "identity | cubic | exp");
    app.add_option("--rho", rho, "AR(1) correlation of the design");
    app.add_option("--sd", sd, "Gaussian noise sd");
    app.add_option("--delta", delta, "outlier fraction (Cauchy contamination)");
    app.add_option("--cauchy-scale", cauchy_scale, "Cauchy scale for outliers");
    app.add_option("--beta0", beta0_csv, "true coefficients, comma list (default 5,4,3,2,1,-1,-3,-5,0,...)");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--out", out, "output CSV path");
    app.add_option("--truth-out", truth_out, "JSON path for the anchored truth");
    app.add_option("--config", config_path, "JSON config file (flags override)");
    app.add_option("--log-level", log_level, "quiet | info | debug");
    run_subcommand(app, args);

    rmrce::SimSpec spec;
    spec.n = n;
    spec.d = d;
    spec.link = rmrce::parse_link(link);
    spec.ar1_rho = rho;
    spec.noise = {sd, delta, cauchy_scale};
    spec.seed = seed;
    if (!beta0_csv.empty()) {
        const auto vals = parse_double_list(beta0_csv, "--beta0");
        spec.beta0 = Eigen::Map<const rmrce::Vector>(vals.data(),
                                                     static_cast<Eigen::Index>(vals.size()));
    }
    const rmrce::SimulatedData sim = rmrce::generate_dataset(spec);
    rmrce::save_csv(out, sim.data);

    if (!truth_out.empty()) {
        json truth;
        truth["provenance"] = provenance(
            "simulate", json{{"n", n},
                             {"d", d},
                             {"link", link},
                             {"rho", rho},
                             {"sd", sd},
                             {"delta", delta},
                             {"cauchy_scale", cauchy_scale},
                             {"seed", seed},
                             {"out", out}});
        truth["beta0"] = std::vector<double>(sim.beta0.data(), sim.beta0.data() + sim.beta0.size());
        truth["beta_star"] =
            std::vector<double>(sim.beta_star.data(), sim.beta_star.data() + sim.beta_star.size());
        json support = json::array();
        for (int j : sim.true_support) support.push_back(sim.data.feature_names[static_cast<std::size_t>(j)]);
        truth["true_support"] = support;
        write_json(truth_out, truth);
    }
    if (log_level != "quiet")
        std::cerr << "wrote " << sim.data.n() << "x" << sim.data.d() << " dataset to " << out
                  << "\n";
    return 0;
}

int cmd_fit(const std::vector<std::string>& args) {
    CLI::App app{"fit the penalized smoothed rank estimator"};
    CommonFitFlags f;
    std::string start = "kendall", start_values;
    bool trace = false;
    add_common_fit_flags(&app, f);
    app.add_option("--start", start, "kendall | anchor | supplied");
    app.add_option("--start-values", start_values, "comma list for --start supplied");
    app.add_flag("--trace", trace, "record objective/penalty/gap-bound per sweep");
    run_subcommand(app, args);

    const rmrce::Dataset data = rmrce::load_csv(f.input, f.response);
    warn_dimension_rule(data, f.log_level);

    rmrce::FitConfig cfg;
    cfg.alpha = f.alpha;
    cfg.lambda = f.lambda;
    cfg.kernel = rmrce::parse_kernel(f.kernel);
    cfg.anchor_index = resolve_anchor(data, f.anchor);
    cfg.max_sweeps = f.max_sweeps;
    cfg.coord_tol = f.coord_tol;
    cfg.obj_tol = f.obj_tol;
    cfg.extended_trace = trace;
    if (start == "kendall")
        cfg.start = rmrce::StartKind::MarginalKendall;
    else if (start == "anchor")
        cfg.start = rmrce::StartKind::AnchorOnly;
    else if (start == "supplied") {
        cfg.start = rmrce::StartKind::Supplied;
        const auto vals = parse_double_list(start_values, "--start-values");
        cfg.start_vector = Eigen::Map<const rmrce::Vector>(
            vals.data(), static_cast<Eigen::Index>(vals.size()));
    } else {
        throw rmrce::invalid_input("unknown start '" + start + "'");
    }

    const rmrce::FitResult fit = rmrce::fit_rmrce(data, cfg);

    json out;
    json cfg_json = fit_config_json(cfg, f);
    cfg_json["start"] = start;
    out["provenance"] = provenance("fit", cfg_json);
    json coefficients;
    json selected = json::array();
    for (Eigen::Index j = 0; j < data.d(); ++j) {
        const std::string& name = data.feature_names[static_cast<std::size_t>(j)];
        coefficients[name] = fit.coef[j];
        if (j != cfg.anchor_index && std::abs(fit.coef[j]) > rmrce::kZeroTol)
            selected.push_back(name);
    }
    out["coefficients"] = coefficients;
    out["anchor"] = data.feature_names[static_cast<std::size_t>(cfg.anchor_index)];
    out["objective"] = fit.objective;
    out["converged"] = fit.converged;
    out["sweeps"] = fit.sweeps_used;
    out["selected"] = selected;
    if (!fit.note.empty()) out["note"] = fit.note;
    if (trace) {
        json tr = json::array();
        for (std::size_t s = 0; s < fit.trace.size(); ++s) {
            const auto& st = fit.trace[s];
            tr.push_back(json{{"sweep", s + 1},
                              {"objective", st.objective},
                              {"max_change", st.max_change},
                              {"penalty", st.penalty},
                              {"gap_bound", st.gap_bound}});
        }
        out["trace"] = tr;
    }
    write_json(f.out, out);
    return 0;
}

int cmd_cv(const std::vector<std::string>& args) {
    CLI::App app{"five-fold cross-validated grid search over (lambda, alpha)"};
    CommonFitFlags f;
    std::string lambdas_csv, alphas_csv = "1,3,5,7,9";
    int folds = 5, threads = rmrce::default_thread_count();
    unsigned long long seed = 0;
    add_common_fit_flags(&app, f);
    app.add_option("--lambdas", lambdas_csv, "comma list (default: 20 log-spaced on [1e-3,1])");
    app.add_option("--alphas", alphas_csv, "comma list");
    app.add_option("--folds", folds, "number of folds");
    app.add_option("--seed", seed, "fold-split seed");
    app.add_option("--threads", threads, "worker threads over grid cells");
    run_subcommand(app, args);

    const rmrce::Dataset data = rmrce::load_csv(f.input, f.response);
    warn_dimension_rule(data, f.log_level);

    rmrce::FitConfig base;
    base.alpha = f.alpha;
    base.kernel = rmrce::parse_kernel(f.kernel);
    base.anchor_index = resolve_anchor(data, f.anchor);
    base.max_sweeps = f.max_sweeps;
    base.coord_tol = f.coord_tol;
    base.obj_tol = f.obj_tol;

    rmrce::CvGrid grid;
    grid.lambdas = lambdas_csv.empty() ? rmrce::default_lambda_grid()
                                       : parse_double_list(lambdas_csv, "--lambdas");
    grid.alphas = parse_double_list(alphas_csv, "--alphas");
    grid.folds = folds;
    grid.seed = seed;

    const rmrce::CvResult cv = rmrce::grid_search(data, grid, base, threads);

    json out;
    out["provenance"] = provenance(
        "cv", json{{"input", f.input},
                   {"response", f.response},
                   {"anchor", f.anchor},
                   {"kernel", f.kernel},
                   {"lambdas", grid.lambdas},
                   {"alphas", grid.alphas},
                   {"folds", folds},
                   {"seed", seed}});
    json table = json::array();
    for (const auto& cell : cv.score_table) {
        json row{{"lambda", cell.lambda}, {"alpha", cell.alpha}};
        if (std::isnan(cell.score))
            row["score"] = nullptr;
        else
            row["score"] = cell.score;
        table.push_back(row);
    }
    out["score_table"] = table;
    out["best_lambda"] = cv.best_lambda;
    out["best_alpha"] = cv.best_alpha;
    out["fold_assignments"] = cv.fold_assignments;
    write_json(f.out, out);
    return 0;
}

int cmd_bench(const std::vector<std::string>& args) {
    CLI::App app{"run a named benchmark scenario"};
    rmrce::BenchOptions opt;
    std::string scenario, methods_csv = "rmrce,lasso,hinge", lambdas_csv, n_list_csv;
    std::string kernel = "gaussian", out = "results.csv", config_path, log_level = "info";
    unsigned long long seed = 1;
    opt.threads = rmrce::default_thread_count();
    app.add_option("scenario", scenario,
                   "linear-d50 | linear-d200 | cubic-d50 | cubic-d200 | hessian-pd | stacking")
        ->required();
    app.add_option("--reps", opt.reps, "replications");
    app.add_option("--seed", seed, "base seed (replication k uses seed+k)");
    app.add_option("--methods", methods_csv, "subset of rmrce,lasso,hinge");
    app.add_option("--lambdas", lambdas_csv, "penalty levels (scenario default if omitted)");
    app.add_option("--alpha", opt.alpha, "smoothing level");
    app.add_option("--kernel", kernel, "sigmoid | gaussian | doubleexp");
    app.add_option("--n-list", n_list_csv, "sample sizes (scenario default if omitted)");
    app.add_option("--threads", opt.threads, "worker threads over replications");
    app.add_option("--out", out, "output CSV path");
    app.add_option("--config", config_path, "JSON config file (flags override)");
    app.add_option("--log-level", log_level, "quiet | info | debug");
    run_subcommand(app, args);

    opt.scenario = scenario;
    opt.seed = seed;
    opt.methods = parse_string_list(methods_csv);
    rmrce::require(!opt.methods.empty(), "--methods must name at least one method");
    opt.kernel = rmrce::parse_kernel(kernel);
    if (!lambdas_csv.empty()) opt.lambdas = parse_double_list(lambdas_csv, "--lambdas");
    if (!n_list_csv.empty())
        for (double v : parse_double_list(n_list_csv, "--n-list"))
            opt.n_list.push_back(static_cast<Eigen::Index>(v));

    const auto rows = rmrce::run_bench(opt);
    rmrce::write_bench_csv(out, opt, rows);
    if (log_level != "quiet")
        std::cerr << "wrote " << rows.size() << " rows to " << out << "\n";
    return 0;
}

int cmd_diagnose(const std::vector<std::string>& args) {
    CLI::App app{"split-half monotonicity diagnostic"};
    CommonFitFlags f;
    int m_tests = 1;
    unsigned long long seed = 0;
    add_common_fit_flags(&app, f);
    app.add_option("--seed", seed, "split seed");
    app.add_option("--m-tests", m_tests, "Bonferroni multiplicity");
    run_subcommand(app, args);

    const rmrce::Dataset data = rmrce::load_csv(f.input, f.response);

    rmrce::FitConfig cfg;
    cfg.alpha = f.alpha;
    cfg.lambda = f.lambda;
    cfg.kernel = rmrce::parse_kernel(f.kernel);
    cfg.anchor_index = resolve_anchor(data, f.anchor);
    cfg.max_sweeps = f.max_sweeps;

    const rmrce::DiagnosticResult diag =
        rmrce::spearman_monotonicity_test(data, cfg, seed, m_tests);

    json out;
    json cfg_json = fit_config_json(cfg, f);
    cfg_json["seed"] = seed;
    cfg_json["m_tests"] = m_tests;
    out["provenance"] = provenance("diagnose", cfg_json);
    if (std::isnan(diag.rho))
        out["rho"] = nullptr;
    else
        out["rho"] = diag.rho;
    out["p_value"] = diag.p_value;
    out["adjusted_p"] = diag.adjusted_p;
    out["pass"] = diag.pass;
    out["method"] = diag.method;
    if (!diag.code.empty()) out["code"] = diag.code;
    write_json(f.out, out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        std::cerr << "usage: rmrce <simulate|fit|cv|bench|diagnose> [flags]\n"
                  << "       rmrce --version\n";
        return 1;
    }
    if (args[0] == "--version" || args[0] == "-V") {
        std::cout << "rmrce " << rmrce::kVersion << "\n";
        return 0;
    }
    const std::string command = args[0];
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    try {
        if (command == "simulate") return cmd_simulate(rest);
        if (command == "fit") return cmd_fit(rest);
        if (command == "cv") return cmd_cv(rest);
        if (command == "bench") return cmd_bench(rest);
        if (command == "diagnose") return cmd_diagnose(rest);
        std::cerr << "error: cli: unknown command '" << command << "'\n";
        return 1;
    } catch (const HelpShown&) {
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: cli: " << e.what() << "\n";
        return 1;
    } catch (const rmrce::numeric_error& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return 2;
    } catch (const rmrce::invalid_input& e) {
        std::cerr << "error: input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}
