#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rmrce/dataset.hpp"
#include "rmrce/rng.hpp"

namespace rmrce {

enum class Link { Identity, Cubic, Exp };

inline const char* link_name(Link link) {
    switch (link) {
        case Link::Identity: return "identity";
        case Link::Cubic: return "cubic";
        case Link::Exp: return "exp";
    }
    return "?";
}

inline Link parse_link(std::string token) {
    for (auto& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (token == "identity" || token == "linear") return Link::Identity;
    if (token == "cubic" || token == "cube") return Link::Cubic;
    if (token == "exp") return Link::Exp;
    throw invalid_input("unknown link '" + token + "' (expected identity, cubic, or exp)");
}

inline double apply_link(Link link, double v) {
    switch (link) {
        case Link::Identity: return v;
        case Link::Cubic: return v * v * v;
        case Link::Exp: return std::exp(v);
    }
    throw invalid_input("bad link tag");
}

// Default true coefficients (5,4,3,2,1,-1,-3,-5,0,...,0), truncated or zero
// padded to length d.
inline Vector default_beta0(Eigen::Index d) {
    const double head[8] = {5, 4, 3, 2, 1, -1, -3, -5};
    Vector beta = Vector::Zero(d);
    for (Eigen::Index j = 0; j < d && j < 8; ++j) beta[j] = head[j];
    return beta;
}

struct NoiseSpec {
    double gaussian_sd = 1.0;
    double outlier_fraction = 0.0; // delta
    double cauchy_scale = 0.01;
};

struct SimSpec {
    Eigen::Index n = 100;
    Eigen::Index d = 50;
    Vector beta0;       // empty -> default_beta0(d)
    double ar1_rho = 0.5;
    Link link = Link::Identity;
    NoiseSpec noise;
    std::uint64_t seed = 0;
};

inline void validate_sim_spec(const SimSpec& spec) {
    require(spec.n >= 2, "simulation needs n >= 2");
    require(spec.d >= 1, "simulation needs d >= 1");
    require(std::abs(spec.ar1_rho) < 1.0, "ar1_rho must lie in (-1, 1)");
    require(spec.noise.gaussian_sd > 0.0, "gaussian_sd must be > 0");
    require(spec.noise.outlier_fraction >= 0.0 && spec.noise.outlier_fraction < 1.0,
            "outlier_fraction must lie in [0, 1)");
    require(spec.noise.cauchy_scale > 0.0, "cauchy_scale must be > 0");
    if (spec.beta0.size() > 0) {
        require(spec.beta0.size() == spec.d, "beta0 length must equal d");
        require(spec.beta0[0] != 0.0, "beta0[0] must be nonzero (anchored truth)");
    }
}

// i.i.d. rows from N_d(0, Sigma) with Sigma_jk = rho^|j-k|, via the exact
// AR(1) recursion x_1 = z_1, x_j = rho*x_{j-1} + sqrt(1-rho^2)*z_j.
inline Matrix ar1_gaussian_design(Eigen::Index n, Eigen::Index d, double rho,
                                  std::uint64_t seed) {
    require(n >= 1 && d >= 1, "design needs n, d >= 1");
    require(std::abs(rho) < 1.0, "|rho| must be < 1");
    Philox4x32 rng(seed);
    const double innovation = std::sqrt(1.0 - rho * rho);
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = rng.next_normal();
        for (Eigen::Index j = 1; j < d; ++j)
            x(i, j) = rho * x(i, j - 1) + innovation * rng.next_normal();
    }
    return x;
}

// One noise draw: Cauchy with probability delta, Gaussian otherwise.
inline std::pair<double, bool> draw_noise(Philox4x32& rng, const NoiseSpec& noise) {
    const bool outlier = rng.next_u01() < noise.outlier_fraction;
    if (outlier) return {rng.next_cauchy(noise.cauchy_scale), true};
    return {noise.gaussian_sd * rng.next_normal(), false};
}

struct SimulatedData {
    Dataset data;
    Vector beta_star;   // beta0 / beta0[0], anchored truth (first entry exactly 1)
    Vector beta0;
    std::vector<int> true_support; // nonzero free coordinates of beta_star (anchor excluded)
    Eigen::Index outlier_count = 0;
};

// y_i = G(x_i^T beta0 + eps_i). The design and the noise come from one seeded
// stream, so runs with the same seed and different links share every draw and
// differ only through G.
inline SimulatedData generate_dataset(const SimSpec& spec) {
    validate_sim_spec(spec);
    SimulatedData out;
    out.beta0 = spec.beta0.size() > 0 ? spec.beta0 : default_beta0(spec.d);
    require(out.beta0[0] != 0.0, "beta0[0] must be nonzero");

    out.data.x = ar1_gaussian_design(spec.n, spec.d, spec.ar1_rho, spec.seed);
    Philox4x32 noise_rng(derive_seed(spec.seed, 0x9E3779B97F4A7C15ULL));
    out.data.y.resize(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        const auto [eps, outlier] = draw_noise(noise_rng, spec.noise);
        if (outlier) ++out.outlier_count;
        out.data.y[i] = apply_link(spec.link, out.data.x.row(i).dot(out.beta0) + eps);
    }

    out.data.feature_names.resize(static_cast<std::size_t>(spec.d));
    for (Eigen::Index j = 0; j < spec.d; ++j)
        out.data.feature_names[static_cast<std::size_t>(j)] = "x" + std::to_string(j + 1);

    out.beta_star = out.beta0 / out.beta0[0];
    out.beta_star[0] = 1.0;
    for (Eigen::Index j = 1; j < spec.d; ++j)
        if (out.beta_star[j] != 0.0) out.true_support.push_back(static_cast<int>(j));
    return out;
}

} // namespace rmrce
