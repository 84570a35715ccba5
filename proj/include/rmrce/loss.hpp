#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rmrce/dataset.hpp"
#include "rmrce/kernels.hpp"

namespace rmrce {

namespace detail {

inline void check_loss_inputs(const Dataset& data, const Vector& beta, double alpha) {
    validate_dataset(data);
    require(beta.size() == data.d(), "coefficient length must equal d");
    require(alpha > 0.0, "alpha must be > 0");
}

// Streams over all pairs i < i' in lexicographic order calling
// f(sign, margin). Never materializes the O(n^2) pair arrays.
template <typename F>
inline void for_each_pair(const Dataset& data, const Vector& beta, F&& f) {
    const Eigen::Index n = data.n();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index i2 = i + 1; i2 < n; ++i2)
            f(sign_of(data.y[i] - data.y[i2]), pair_margin(data.x, i, i2, beta));
}

} // namespace detail

// Kendall-style pairwise concordance in [-1, 1]:
// (2 / n(n-1)) * sum_{i<i'} sign(y_i - y_i') * sign(z_ii'), sign(0) = 0.
inline double exact_mrc_objective_raw(const Dataset& data, const Vector& beta) {
    validate_dataset(data);
    require(beta.size() == data.d(), "coefficient length must equal d");
    std::int64_t acc = 0;
    detail::for_each_pair(data, beta,
                          [&](int s, double z) { acc += s * sign_of(z); });
    return static_cast<double>(acc) / static_cast<double>(pair_count(data.n()));
}

inline double exact_mrc_objective(const Dataset& data, const AnchoredCoefficients& coef) {
    return exact_mrc_objective_raw(data, coef.values);
}

// Smoothed loss in [-1, 0]:
// -(2 / n(n-1)) * sum_{i<i'} F(s_ii' * alpha * z_ii').
// Tied pairs (s = 0) contribute -F(0) = -1/2 times the pair weight.
inline double smoothed_loss_raw(const Dataset& data, const Vector& beta, double alpha,
                                SmoothingKernel kernel) {
    detail::check_loss_inputs(data, beta, alpha);
    double acc = 0.0;
    detail::for_each_pair(data, beta, [&](int s, double z) {
        acc += kernel_cdf(kernel, s * alpha * z);
    });
    return -acc / static_cast<double>(pair_count(data.n()));
}

inline double smoothed_loss(const Dataset& data, const AnchoredCoefficients& coef, double alpha,
                            SmoothingKernel kernel) {
    return smoothed_loss_raw(data, coef.values, alpha, kernel);
}

// Full gradient -(2 / n(n-1)) * sum s * alpha * (x_i - x_i') * F'(s*alpha*z),
// including the anchor coordinate (the optimizer masks it; tests want the
// raw vector).
inline Vector smoothed_gradient_raw(const Dataset& data, const Vector& beta, double alpha,
                                    SmoothingKernel kernel) {
    detail::check_loss_inputs(data, beta, alpha);
    const Eigen::Index n = data.n();
    const Eigen::Index d = data.d();
    Vector grad = Vector::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index i2 = i + 1; i2 < n; ++i2) {
            const int s = sign_of(data.y[i] - data.y[i2]);
            if (s == 0) continue;
            const double z = pair_margin(data.x, i, i2, beta);
            const double w = s * alpha * kernel_pdf(kernel, s * alpha * z);
            for (Eigen::Index j = 0; j < d; ++j) grad[j] += w * (data.x(i, j) - data.x(i2, j));
        }
    }
    return -2.0 * grad / static_cast<double>(static_cast<std::int64_t>(n) * (n - 1));
}

inline Vector smoothed_gradient(const Dataset& data, const AnchoredCoefficients& coef,
                                double alpha, SmoothingKernel kernel) {
    return smoothed_gradient_raw(data, coef.values, alpha, kernel);
}

// Hessian -(2 / n(n-1)) * sum alpha^2 * (x_i - x_i')(x_i - x_i')^T * F''(s*alpha*z).
// Accumulated as A^T A - B^T B over rows scaled by sqrt(|weight|), split by
// the sign of the weight, which keeps the result exactly symmetric.
inline Matrix smoothed_hessian_raw(const Dataset& data, const Vector& beta, double alpha,
                                   SmoothingKernel kernel) {
    detail::check_loss_inputs(data, beta, alpha);
    const Eigen::Index n = data.n();
    const Eigen::Index d = data.d();
    const double scale = 2.0 * alpha * alpha /
                         static_cast<double>(static_cast<std::int64_t>(n) * (n - 1));

    const std::int64_t pairs = pair_count(n);
    Matrix pos(pairs, d), neg(pairs, d);
    Eigen::Index npos = 0, nneg = 0;
    Vector dx(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index i2 = i + 1; i2 < n; ++i2) {
            const int s = sign_of(data.y[i] - data.y[i2]);
            const double z = pair_margin(data.x, i, i2, beta);
            // -scale * F'' is the pair weight on dx dx^T
            const double w = -scale * kernel_curvature(kernel, s * alpha * z);
            if (w == 0.0) continue;
            dx = data.x.row(i) - data.x.row(i2);
            if (w > 0.0)
                pos.row(npos++) = std::sqrt(w) * dx.transpose();
            else
                neg.row(nneg++) = std::sqrt(-w) * dx.transpose();
        }
    }
    Matrix h = Matrix::Zero(d, d);
    if (npos > 0) h.noalias() += pos.topRows(npos).transpose() * pos.topRows(npos);
    if (nneg > 0) h.noalias() -= neg.topRows(nneg).transpose() * neg.topRows(nneg);
    return h;
}

inline Matrix smoothed_hessian(const Dataset& data, const AnchoredCoefficients& coef, double alpha,
                               SmoothingKernel kernel) {
    return smoothed_hessian_raw(data, coef.values, alpha, kernel);
}

// L1 penalty over the free coordinates; the anchor is never penalized.
inline double l1_penalty(const Vector& beta, int anchor_index, double lambda) {
    require(lambda >= 0.0, "lambda must be >= 0");
    double acc = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (j != anchor_index) acc += std::abs(beta[j]);
    return lambda * acc;
}

inline double penalized_objective(const Dataset& data, const AnchoredCoefficients& coef,
                                  double alpha, double lambda, SmoothingKernel kernel) {
    return smoothed_loss(data, coef, alpha, kernel) +
           l1_penalty(coef.values, coef.anchor_index, lambda);
}

// Upper bound on |smoothed loss - its alpha -> infinity limit|:
// (2 / n(n-1)) * sum over untied pairs with nonzero margin of (1 - F(alpha*|z|)).
// Each such pair's F(s*alpha*z) differs from its saturated value {0,1} by at
// most 1 - F(alpha*|z|); pairs with s = 0 or z = 0 contribute exactly F(0)
// in both and drop out.
inline double smoothing_gap_bound_raw(const Dataset& data, const Vector& beta, double alpha,
                                      SmoothingKernel kernel) {
    detail::check_loss_inputs(data, beta, alpha);
    double acc = 0.0;
    detail::for_each_pair(data, beta, [&](int s, double z) {
        if (s == 0 || z == 0.0) return;
        acc += 1.0 - kernel_cdf(kernel, alpha * std::abs(z));
    });
    return acc / static_cast<double>(pair_count(data.n()));
}

inline double smoothing_gap_bound(const Dataset& data, const AnchoredCoefficients& coef,
                                  double alpha, SmoothingKernel kernel) {
    return smoothing_gap_bound_raw(data, coef.values, alpha, kernel);
}

// Large-alpha limit of the smoothed loss: concordant untied pairs saturate to
// -1, discordant to 0, ties and zero margins stay at -1/2.
inline double smoothed_loss_saturated_raw(const Dataset& data, const Vector& beta) {
    validate_dataset(data);
    require(beta.size() == data.d(), "coefficient length must equal d");
    double acc = 0.0;
    detail::for_each_pair(data, beta, [&](int s, double z) {
        const int sz = s * sign_of(z);
        acc += sz > 0 ? 1.0 : (sz < 0 ? 0.0 : 0.5);
    });
    return -acc / static_cast<double>(pair_count(data.n()));
}

// True iff the smallest eigenvalue is >= -tol (deterministic symmetric solve).
inline bool hessian_is_psd(const Matrix& h, double tol) {
    require(h.rows() == h.cols(), "matrix must be square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    require((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
            "matrix must be symmetric within 1e-10");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= -tol;
}

// Default PSD slack: eigensolvers on rank-deficient Gram-like matrices return
// tiny negative noise proportional to the diagonal scale.
inline double default_psd_tol(const Matrix& h) {
    return 1e-8 * (1.0 + h.diagonal().maxCoeff());
}

} // namespace rmrce
