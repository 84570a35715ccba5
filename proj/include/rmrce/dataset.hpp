#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmrce/errors.hpp"

namespace rmrce {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Response plus design matrix; row i of x holds the covariates of
// observation i. Immutable after construction in all library code paths.
struct Dataset {
    Vector y;
    Matrix x;
    std::vector<std::string> feature_names;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index d() const { return x.cols(); }
};

inline void validate_dataset(const Dataset& data) {
    require(data.y.size() >= 2, "dataset needs n >= 2 observations");
    require(data.x.cols() >= 1, "dataset needs d >= 1 features");
    require(data.x.rows() == data.y.size(), "row count of x must equal length of y");
    require(data.feature_names.size() == static_cast<size_t>(data.x.cols()),
            "feature_names length must equal d");
    require(data.y.allFinite() && data.x.allFinite(), "dataset contains non-finite entries");
}

// Coefficient vector with one coordinate pinned to exactly 1 for
// identifiability. Construct through make_anchored so the pin always holds.
struct AnchoredCoefficients {
    Vector values;
    int anchor_index = 0;
};

inline AnchoredCoefficients make_anchored(const Vector& raw, int anchor_index) {
    require(anchor_index >= 0 && anchor_index < raw.size(), "anchor index out of range");
    require(raw.allFinite(), "coefficients contain non-finite entries");
    AnchoredCoefficients coef{raw, anchor_index};
    coef.values[anchor_index] = 1.0;
    return coef;
}

// Number of unordered pairs i < i'.
inline std::int64_t pair_count(Eigen::Index n) {
    return static_cast<std::int64_t>(n) * (n - 1) / 2;
}

// Margin of one pair: sum_j (x_ij - x_i'j) * beta_j.
inline double pair_margin(const Matrix& x, Eigen::Index i, Eigen::Index i2, const Vector& beta) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) z += (x(i, j) - x(i2, j)) * beta[j];
    return z;
}

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Per-pair concordance signs and margins, ordered lexicographically by
// (i, i'), i < i'. Signs depend only on y; an exact floating-point tie in the
// response gives sign 0.
struct PairStats {
    std::vector<std::int8_t> concordance_sign;
    Vector margin;
};

// Signs alone (they never depend on beta).
inline std::vector<std::int8_t> pair_signs(const Vector& y) {
    const Eigen::Index n = y.size();
    std::vector<std::int8_t> signs;
    signs.reserve(static_cast<size_t>(pair_count(n)));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index i2 = i + 1; i2 < n; ++i2)
            signs.push_back(static_cast<std::int8_t>(sign_of(y[i] - y[i2])));
    return signs;
}

// Margins for a raw (not necessarily anchored) coefficient vector.
inline Vector pair_margins_raw(const Dataset& data, const Vector& beta) {
    require(beta.size() == data.d(), "coefficient length must equal d");
    const Eigen::Index n = data.n();
    Vector margins(pair_count(n));
    std::int64_t p = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index i2 = i + 1; i2 < n; ++i2)
            margins[p++] = pair_margin(data.x, i, i2, beta);
    return margins;
}

inline PairStats pair_stats(const Dataset& data, const AnchoredCoefficients& coef) {
    validate_dataset(data);
    return PairStats{pair_signs(data.y), pair_margins_raw(data, coef.values)};
}

} // namespace rmrce
