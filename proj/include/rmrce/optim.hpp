#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rmrce/dataset.hpp"
#include "rmrce/kendall.hpp"
#include "rmrce/kernels.hpp"
#include "rmrce/loss.hpp"

namespace rmrce {

inline double soft_threshold(double v, double t) {
    require(t >= 0.0, "soft-threshold level must be >= 0");
    const double m = std::abs(v) - t;
    return m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
}

enum class StartKind { MarginalKendall, Supplied, AnchorOnly };

struct FitConfig {
    double alpha = 5.0;
    double lambda = 0.0;
    SmoothingKernel kernel = SmoothingKernel::GaussianCdf;
    int anchor_index = 0;
    int max_sweeps = 500;
    double coord_tol = 1e-4;     // max abs coefficient change per sweep
    double obj_tol = 1e-6;       // relative objective change
    double init_step = 1.0;
    double backtrack_factor = 0.5;
    int max_backtracks = 50;
    StartKind start = StartKind::MarginalKendall;
    Vector start_vector;         // used when start == Supplied
    bool extended_trace = false; // also record penalty and gap bound per sweep
    // above this many multiplications per pairwise evaluation the solver
    // streams instead of caching per-pair margins
    std::int64_t streaming_budget = 200'000'000;
};

inline void validate_fit_config(const FitConfig& cfg, Eigen::Index d) {
    require(cfg.alpha > 0.0, "alpha must be > 0");
    require(cfg.lambda >= 0.0, "lambda must be >= 0");
    require(cfg.anchor_index >= 0 && cfg.anchor_index < d, "anchor index out of range");
    require(cfg.max_sweeps >= 1, "max_sweeps must be >= 1");
    require(cfg.coord_tol > 0.0 && cfg.obj_tol > 0.0, "tolerances must be > 0");
    require(cfg.init_step > 0.0, "init_step must be > 0");
    require(cfg.backtrack_factor > 0.0 && cfg.backtrack_factor < 1.0,
            "backtrack_factor must lie in (0,1)");
    require(cfg.max_backtracks >= 1, "max_backtracks must be >= 1");
    if (cfg.start == StartKind::Supplied)
        require(cfg.start_vector.size() == d, "supplied start has wrong length");
}

struct SweepStat {
    double objective = 0.0;
    double max_change = 0.0;
    double penalty = std::numeric_limits<double>::quiet_NaN();
    double gap_bound = std::numeric_limits<double>::quiet_NaN();
};

struct FitResult {
    Vector coef;
    int anchor_index = 0;
    double objective = 0.0;
    int sweeps_used = 0;
    bool converged = false;
    std::vector<SweepStat> trace;
    Vector warm_start_used;
    std::string note;

    AnchoredCoefficients anchored() const { return make_anchored(coef, anchor_index); }
};

// Warm start: 1 at the anchor plus sign(L_j*) at the free coordinate whose
// marginal Kendall statistic L_j has the largest magnitude (smallest index on
// ties). The arg-max is decided on integer pair counts, so it is exact.
inline AnchoredCoefficients marginal_kendall_start(const Dataset& data, int anchor_index) {
    validate_dataset(data);
    require(anchor_index >= 0 && anchor_index < data.d(), "anchor index out of range");
    const std::size_t n = static_cast<std::size_t>(data.n());
    std::vector<double> ys(n), xs(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = data.y[static_cast<Eigen::Index>(i)];

    std::int64_t best_abs = -1;
    int best_j = -1, best_sign = 0;
    for (Eigen::Index j = 0; j < data.d(); ++j) {
        if (j == anchor_index) continue;
        for (std::size_t i = 0; i < n; ++i) xs[i] = data.x(static_cast<Eigen::Index>(i), j);
        const std::int64_t num = kendall_numerator(ys, xs);
        const std::int64_t mag = num >= 0 ? num : -num;
        if (mag > best_abs) {
            best_abs = mag;
            best_j = static_cast<int>(j);
            best_sign = num > 0 ? 1 : (num < 0 ? -1 : 0);
        }
    }
    Vector start = Vector::Zero(data.d());
    start[anchor_index] = 1.0;
    if (best_j >= 0) start[best_j] = static_cast<double>(best_sign);
    return make_anchored(start, anchor_index);
}

namespace detail {

// Independent cap on the cached margin array itself.
inline constexpr std::int64_t kMaxCachedPairs = 20'000'000;

inline Vector resolve_start(const Dataset& data, const FitConfig& cfg) {
    switch (cfg.start) {
        case StartKind::MarginalKendall:
            return marginal_kendall_start(data, cfg.anchor_index).values;
        case StartKind::AnchorOnly: {
            Vector v = Vector::Zero(data.d());
            v[cfg.anchor_index] = 1.0;
            return v;
        }
        case StartKind::Supplied:
            return make_anchored(cfg.start_vector, cfg.anchor_index).values;
    }
    throw invalid_input("bad start tag");
}

// Pairwise state for the smoothed rank loss under coordinate moves. When the
// problem fits the budget, per-pair margins are cached and updated
// incrementally; otherwise every evaluation streams over the pairs.
class RankLossWork {
  public:
    RankLossWork(const Dataset& data, double alpha, SmoothingKernel kernel,
                 std::int64_t streaming_budget)
        : data_(data), alpha_(alpha), kernel_(kernel), pairs_(pair_count(data.n())) {
        cached_ = pairs_ * data.d() <= streaming_budget && pairs_ <= kMaxCachedPairs;
        if (cached_) signs_ = pair_signs(data.y);
        inv_pairs_ = 1.0 / static_cast<double>(pairs_);
    }

    void set_beta(const Vector& beta) {
        beta_ = beta;
        if (cached_) margins_ = pair_margins_raw(data_, beta_);
    }

    const Vector& beta() const { return beta_; }

    double smooth_loss() const { return loss_with_shift(-1, 0.0); }

    // Loss after the tentative move beta_j += delta, without committing it.
    double smooth_loss_shifted(Eigen::Index j, double delta) const {
        return loss_with_shift(j, delta);
    }

    double coord_gradient(Eigen::Index j) const {
        const Eigen::Index n = data_.n();
        double acc = 0.0;
        std::int64_t p = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index i2 = i + 1; i2 < n; ++i2, ++p) {
                const int s = cached_ ? signs_[static_cast<std::size_t>(p)]
                                      : sign_of(data_.y[i] - data_.y[i2]);
                if (s == 0) continue;
                const double z = cached_ ? margins_[p] : pair_margin(data_.x, i, i2, beta_);
                acc += s * alpha_ * kernel_pdf(kernel_, s * alpha_ * z) *
                       (data_.x(i, j) - data_.x(i2, j));
            }
        }
        return -acc * inv_pairs_; // inv_pairs_ = 2/(n(n-1))
    }

    void apply(Eigen::Index j, double delta) {
        beta_[j] += delta;
        if (!cached_) return;
        const Eigen::Index n = data_.n();
        std::int64_t p = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index i2 = i + 1; i2 < n; ++i2, ++p)
                margins_[p] += delta * (data_.x(i, j) - data_.x(i2, j));
    }

    double gap_bound() const { return smoothing_gap_bound_raw(data_, beta_, alpha_, kernel_); }

  private:
    double loss_with_shift(Eigen::Index j, double delta) const {
        const Eigen::Index n = data_.n();
        double acc = 0.0;
        std::int64_t p = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index i2 = i + 1; i2 < n; ++i2, ++p) {
                const int s = cached_ ? signs_[static_cast<std::size_t>(p)]
                                      : sign_of(data_.y[i] - data_.y[i2]);
                double z = cached_ ? margins_[p] : pair_margin(data_.x, i, i2, beta_);
                if (j >= 0) z += delta * (data_.x(i, j) - data_.x(i2, j));
                acc += kernel_cdf(kernel_, s * alpha_ * z);
            }
        }
        return -acc * inv_pairs_;
    }

    const Dataset& data_;
    double alpha_;
    SmoothingKernel kernel_;
    std::int64_t pairs_;
    bool cached_ = false;
    std::vector<std::int8_t> signs_;
    Vector margins_;
    Vector beta_;
    double inv_pairs_ = 0.0;
};

} // namespace detail

// Penalized smoothed-rank fit by cyclic proximal coordinate descent over the
// free coordinates. Each coordinate takes a soft-thresholded gradient step
// with step-halving until the composite objective does not increase, so the
// objective trace is nonincreasing across accepted sweeps.
inline FitResult fit_rmrce(const Dataset& data, const FitConfig& cfg) {
    validate_dataset(data);
    require(data.d() >= 2, "fit needs d >= 2");
    validate_fit_config(cfg, data.d());

    const Eigen::Index d = data.d();
    detail::RankLossWork work(data, cfg.alpha, cfg.kernel, cfg.streaming_budget);
    work.set_beta(detail::resolve_start(data, cfg));

    FitResult result;
    result.anchor_index = cfg.anchor_index;
    result.warm_start_used = work.beta();

    auto penalty = [&](const Vector& b) { return l1_penalty(b, cfg.anchor_index, cfg.lambda); };
    double smooth = work.smooth_loss();
    double total = smooth + penalty(work.beta());
    if (std::isnan(total)) throw numeric_error("objective is NaN at the start");

    bool converged = false;
    int sweeps = 0;
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        ++sweeps;
        double max_change = 0.0;
        int moves_failed = 0, free_coords = 0;
        const double total_before = total;

        for (Eigen::Index j = 0; j < d; ++j) {
            if (j == cfg.anchor_index) continue;
            ++free_coords;
            const double g = work.coord_gradient(j);
            const double bj = work.beta()[j];

            double step = cfg.init_step;
            bool accepted = false;
            for (int bt = 0; bt < cfg.max_backtracks; ++bt, step *= cfg.backtrack_factor) {
                const double proposal = soft_threshold(bj - step * g, step * cfg.lambda);
                if (proposal == bj) {
                    accepted = true; // prox fixed point, nothing to do
                    break;
                }
                const double delta = proposal - bj;
                const double cand_smooth = work.smooth_loss_shifted(j, delta);
                const double cand_pen =
                    penalty(work.beta()) + cfg.lambda * (std::abs(proposal) - std::abs(bj));
                const double cand_total = cand_smooth + cand_pen;
                if (std::isnan(cand_total)) throw numeric_error("objective is NaN");
                if (cand_total <= total) {
                    work.apply(j, delta);
                    smooth = cand_smooth;
                    total = cand_total;
                    max_change = std::max(max_change, std::abs(delta));
                    accepted = true;
                    break;
                }
            }
            if (!accepted) ++moves_failed;
        }

        SweepStat stat;
        stat.objective = total;
        stat.max_change = max_change;
        if (cfg.extended_trace) {
            stat.penalty = penalty(work.beta());
            stat.gap_bound = work.gap_bound();
        }
        result.trace.push_back(stat);

        if (moves_failed == free_coords && free_coords > 0) {
            result.note = "no non-increasing step found for any coordinate after " +
                          std::to_string(cfg.max_backtracks) + " backtracks";
            converged = false;
            break;
        }
        if (max_change < cfg.coord_tol) {
            converged = true;
            break;
        }
        if (total_before - total < cfg.obj_tol * (1.0 + std::abs(total_before))) {
            converged = true;
            break;
        }
    }

    result.coef = work.beta();
    result.sweeps_used = sweeps;
    result.converged = converged;
    result.objective = smoothed_loss_raw(data, result.coef, cfg.alpha, cfg.kernel) +
                       penalty(result.coef);
    if (std::isnan(result.objective)) throw numeric_error("final objective is NaN");
    return result;
}

// Lasso baseline: minimize (1/2n)||y - X b||^2 + lambda * sum_{j != anchor} |b_j|
// by cyclic coordinate descent with exact soft-threshold updates. The anchor
// coordinate is fitted without penalty and is NOT pinned to 1; metrics
// normalize by b[anchor] afterwards.
inline FitResult fit_lasso(const Dataset& data, double lambda, int anchor_unpenalized) {
    validate_dataset(data);
    require(lambda >= 0.0, "lambda must be >= 0");
    require(anchor_unpenalized >= 0 && anchor_unpenalized < data.d(),
            "anchor index out of range");

    const Eigen::Index n = data.n();
    const Eigen::Index d = data.d();
    const double inv_n = 1.0 / static_cast<double>(n);

    Vector col_sq(d);
    std::vector<bool> skip(static_cast<std::size_t>(d), false);
    std::string note;
    for (Eigen::Index j = 0; j < d; ++j) {
        col_sq[j] = data.x.col(j).squaredNorm() * inv_n;
        const double mean = data.x.col(j).mean();
        const double var = col_sq[j] - mean * mean;
        if (var <= 0.0 || col_sq[j] == 0.0) {
            skip[static_cast<std::size_t>(j)] = true;
            note += (note.empty() ? "" : "; ");
            note += "skipped zero-variance column " + std::to_string(j);
        }
    }

    Vector beta = Vector::Zero(d);
    Vector residual = data.y;

    FitResult result;
    result.anchor_index = anchor_unpenalized;
    result.warm_start_used = beta;
    result.note = note;

    const int max_sweeps = 10000;
    const double tol = 1e-10;
    bool converged = false;
    int sweeps = 0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        ++sweeps;
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (skip[static_cast<std::size_t>(j)]) continue;
            const double rho = data.x.col(j).dot(residual) * inv_n + col_sq[j] * beta[j];
            const double bj_new = (j == anchor_unpenalized)
                                      ? rho / col_sq[j]
                                      : soft_threshold(rho, lambda) / col_sq[j];
            const double delta = bj_new - beta[j];
            if (delta != 0.0) {
                residual.noalias() -= delta * data.x.col(j);
                beta[j] = bj_new;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change < tol) {
            converged = true;
            break;
        }
        if ((sweep & 63) == 63) residual = data.y - data.x * beta; // limit drift
    }

    residual = data.y - data.x * beta;
    result.coef = beta;
    result.sweeps_used = sweeps;
    result.converged = converged;
    result.objective =
        0.5 * inv_n * residual.squaredNorm() + l1_penalty(beta, anchor_unpenalized, lambda);
    if (std::isnan(result.objective)) throw numeric_error("lasso objective is NaN");
    return result;
}

namespace detail {

// Oriented pair store for the hinge objective: one row per untied pair,
// oriented so the higher-response observation comes first.
struct HingePairs {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> winners_losers;
    Vector margins;

    void build(const Dataset& data, const Vector& beta) {
        const Eigen::Index n = data.n();
        winners_losers.clear();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index i2 = i + 1; i2 < n; ++i2) {
                const int s = sign_of(data.y[i] - data.y[i2]);
                if (s > 0)
                    winners_losers.emplace_back(i, i2);
                else if (s < 0)
                    winners_losers.emplace_back(i2, i);
            }
        }
        margins.resize(static_cast<Eigen::Index>(winners_losers.size()));
        for (std::size_t p = 0; p < winners_losers.size(); ++p)
            margins[static_cast<Eigen::Index>(p)] =
                pair_margin(data.x, winners_losers[p].first, winners_losers[p].second, beta);
    }
};

} // namespace detail

// Objective maximized by fit_hinge:
// (1/(n(n-1))) * sum_{i != i'} 1(y_i > y_i') * max{0, (x_i - x_i')^T b + 1}
//   - lambda * sum_{j != anchor} |b_j|,  with b[anchor] = 1 pinned.
inline double hinge_objective(const Dataset& data, const Vector& beta, double lambda,
                              int anchor_index) {
    validate_dataset(data);
    require(beta.size() == data.d(), "coefficient length must equal d");
    const Eigen::Index n = data.n();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index i2 = i + 1; i2 < n; ++i2) {
            const int s = sign_of(data.y[i] - data.y[i2]);
            if (s == 0) continue;
            const double m = s > 0 ? pair_margin(data.x, i, i2, beta)
                                   : pair_margin(data.x, i2, i, beta);
            acc += std::max(0.0, m + 1.0);
        }
    }
    return acc / (static_cast<double>(n) * (n - 1)) - l1_penalty(beta, anchor_index, lambda);
}

// Hinge relaxation baseline, maximized with the same proximal coordinate
// scheme as fit_rmrce. The subgradient at the hinge kink is taken as 0. The
// objective can be unbounded; divergence aborts with a diagnostic.
inline FitResult fit_hinge(const Dataset& data, double lambda, const FitConfig& cfg_in) {
    validate_dataset(data);
    require(data.d() >= 2, "fit needs d >= 2");
    FitConfig cfg = cfg_in;
    cfg.lambda = lambda;
    validate_fit_config(cfg, data.d());

    const Eigen::Index n = data.n();
    const Eigen::Index d = data.d();
    const double inv_ordered = 1.0 / (static_cast<double>(n) * (n - 1));

    detail::HingePairs pairs;
    Vector beta = detail::resolve_start(data, cfg);
    pairs.build(data, beta);

    FitResult result;
    result.anchor_index = cfg.anchor_index;
    result.warm_start_used = beta;

    auto penalty = [&](const Vector& b) { return l1_penalty(b, cfg.anchor_index, cfg.lambda); };
    auto hinge_sum = [&](Eigen::Index j, double delta) {
        double acc = 0.0;
        for (std::size_t p = 0; p < pairs.winners_losers.size(); ++p) {
            double m = pairs.margins[static_cast<Eigen::Index>(p)];
            if (j >= 0)
                m += delta * (data.x(pairs.winners_losers[p].first, j) -
                              data.x(pairs.winners_losers[p].second, j));
            acc += std::max(0.0, m + 1.0);
        }
        return acc * inv_ordered;
    };

    double total = hinge_sum(-1, 0.0) - penalty(beta);
    if (std::isnan(total)) throw numeric_error("hinge objective is NaN at the start");

    bool converged = false;
    int sweeps = 0;
    int growing_big_sweeps = 0;
    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        ++sweeps;
        double max_change = 0.0;
        int moves_failed = 0, free_coords = 0;
        const double total_before = total;

        for (Eigen::Index j = 0; j < d; ++j) {
            if (j == cfg.anchor_index) continue;
            ++free_coords;
            double g = 0.0;
            for (std::size_t p = 0; p < pairs.winners_losers.size(); ++p) {
                if (pairs.margins[static_cast<Eigen::Index>(p)] + 1.0 > 0.0)
                    g += data.x(pairs.winners_losers[p].first, j) -
                         data.x(pairs.winners_losers[p].second, j);
            }
            g *= inv_ordered;

            const double bj = beta[j];
            double step = cfg.init_step;
            bool accepted = false;
            for (int bt = 0; bt < cfg.max_backtracks; ++bt, step *= cfg.backtrack_factor) {
                const double proposal = soft_threshold(bj + step * g, step * cfg.lambda);
                if (proposal == bj) {
                    accepted = true;
                    break;
                }
                const double delta = proposal - bj;
                const double cand_total =
                    hinge_sum(j, delta) -
                    (penalty(beta) + cfg.lambda * (std::abs(proposal) - std::abs(bj)));
                if (std::isnan(cand_total)) throw numeric_error("hinge objective is NaN");
                if (cand_total >= total) {
                    for (std::size_t p = 0; p < pairs.winners_losers.size(); ++p)
                        pairs.margins[static_cast<Eigen::Index>(p)] +=
                            delta * (data.x(pairs.winners_losers[p].first, j) -
                                     data.x(pairs.winners_losers[p].second, j));
                    beta[j] = proposal;
                    total = cand_total;
                    max_change = std::max(max_change, std::abs(delta));
                    accepted = true;
                    break;
                }
            }
            if (!accepted) ++moves_failed;
        }

        SweepStat stat;
        stat.objective = total;
        stat.max_change = max_change;
        result.trace.push_back(stat);

        if (total > total_before && beta.cwiseAbs().maxCoeff() > 1e6) {
            if (++growing_big_sweeps >= 3) {
                result.note = "hinge objective appears unbounded; aborted";
                converged = false;
                break;
            }
        } else {
            growing_big_sweeps = 0;
        }

        if (moves_failed == free_coords && free_coords > 0) {
            result.note = "no non-decreasing step found for any coordinate after " +
                          std::to_string(cfg.max_backtracks) + " backtracks";
            converged = false;
            break;
        }
        if (max_change < cfg.coord_tol) {
            converged = true;
            break;
        }
        if (total - total_before < cfg.obj_tol * (1.0 + std::abs(total_before))) {
            converged = true;
            break;
        }
    }

    result.coef = beta;
    result.sweeps_used = sweeps;
    result.converged = converged;
    result.objective = hinge_objective(data, beta, cfg.lambda, cfg.anchor_index);
    if (std::isnan(result.objective)) throw numeric_error("final hinge objective is NaN");
    return result;
}

} // namespace rmrce
