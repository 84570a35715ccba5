#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "rmrce/errors.hpp"

namespace rmrce {

// Smoothing CDF families used to approximate the pairwise indicator.
// All three satisfy F(-u) = 1 - F(u), F(0) = 1/2, and exponential tail decay.
enum class SmoothingKernel { Sigmoid, GaussianCdf, DoubleExponential };

inline const char* kernel_name(SmoothingKernel k) {
    switch (k) {
        case SmoothingKernel::Sigmoid: return "sigmoid";
        case SmoothingKernel::GaussianCdf: return "gaussian";
        case SmoothingKernel::DoubleExponential: return "doubleexp";
    }
    return "?";
}

inline SmoothingKernel parse_kernel(std::string token) {
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (token == "sigmoid") return SmoothingKernel::Sigmoid;
    if (token == "gaussian") return SmoothingKernel::GaussianCdf;
    if (token == "doubleexp") return SmoothingKernel::DoubleExponential;
    throw invalid_input("unknown kernel '" + token +
                        "' (expected sigmoid, gaussian, or doubleexp)");
}

namespace detail {
// Saturation cutoff: exp(-|u|) underflows near 745; beyond 700 we return the
// exact limit values so the tails are 0/1 rather than denormal dust.
inline constexpr double kKernelSaturation = 700.0;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;
inline constexpr double kInvSqrt2 = 0.7071067811865475244;

inline void check_finite_arg(double u) {
    if (!std::isfinite(u)) throw invalid_input("kernel argument must be finite");
}
} // namespace detail

// F(u) per family. Sigmoid and double-exponential are evaluated through
// s = exp(-|u|) so that F(u) + F(-u) == 1 to the last bit.
inline double kernel_cdf(SmoothingKernel k, double u) {
    detail::check_finite_arg(u);
    switch (k) {
        case SmoothingKernel::Sigmoid: {
            if (u > detail::kKernelSaturation) return 1.0;
            if (u < -detail::kKernelSaturation) return 0.0;
            const double s = std::exp(-std::abs(u));
            return u >= 0.0 ? 1.0 / (1.0 + s) : s / (1.0 + s);
        }
        case SmoothingKernel::GaussianCdf:
            return 0.5 * std::erfc(-u * detail::kInvSqrt2);
        case SmoothingKernel::DoubleExponential: {
            if (u > detail::kKernelSaturation) return 1.0;
            if (u < -detail::kKernelSaturation) return 0.0;
            if (u == 0.0) return 0.5;
            const double half_tail = 0.5 * (1.0 - std::exp(-std::abs(u)));
            return u > 0.0 ? 0.5 + half_tail : 0.5 - half_tail;
        }
    }
    throw invalid_input("bad kernel tag");
}

// F'(u) >= 0.
inline double kernel_pdf(SmoothingKernel k, double u) {
    detail::check_finite_arg(u);
    switch (k) {
        case SmoothingKernel::Sigmoid: {
            if (std::abs(u) > detail::kKernelSaturation) return 0.0;
            const double s = std::exp(-std::abs(u));
            return s / ((1.0 + s) * (1.0 + s));
        }
        case SmoothingKernel::GaussianCdf:
            return detail::kInvSqrt2Pi * std::exp(-0.5 * u * u);
        case SmoothingKernel::DoubleExponential:
            if (std::abs(u) > detail::kKernelSaturation) return 0.0;
            return 0.5 * std::exp(-std::abs(u));
    }
    throw invalid_input("bad kernel tag");
}

// F''(u). The double-exponential second derivative jumps at 0; we define
// F''(0) = 0 there, which is also the exact value for the other two families.
inline double kernel_curvature(SmoothingKernel k, double u) {
    detail::check_finite_arg(u);
    switch (k) {
        case SmoothingKernel::Sigmoid: {
            if (std::abs(u) > detail::kKernelSaturation) return 0.0;
            const double f = kernel_cdf(k, u);
            return kernel_pdf(k, u) * (1.0 - 2.0 * f);
        }
        case SmoothingKernel::GaussianCdf:
            return -u * detail::kInvSqrt2Pi * std::exp(-0.5 * u * u);
        case SmoothingKernel::DoubleExponential: {
            if (u == 0.0) return 0.0;
            if (std::abs(u) > detail::kKernelSaturation) return 0.0;
            const double d = 0.5 * std::exp(-std::abs(u));
            return u > 0.0 ? -d : d;
        }
    }
    throw invalid_input("bad kernel tag");
}

} // namespace rmrce
