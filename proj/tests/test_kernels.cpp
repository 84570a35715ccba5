#include <cmath>

#include <gtest/gtest.h>

#include "rmrce/kernels.hpp"

using rmrce::SmoothingKernel;
using rmrce::kernel_cdf;
using rmrce::kernel_curvature;
using rmrce::kernel_pdf;

namespace {

// Adaptive Simpson quadrature, used as the independent oracle for the
// Gaussian CDF.
double simpson(double (*f)(double), double a, double b, int depth, double fa, double fb,
               double fm, double whole) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 1e-13)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, depth - 1, fa, fm, flm, left) +
           simpson(f, m, b, depth - 1, fm, fb, frm, right);
}

double integrate(double (*f)(double), double a, double b) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, 40, fa, fb, fm, whole);
}

double std_normal_density(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

double central_diff(SmoothingKernel k, double u, double h) {
    return (kernel_cdf(k, u + h) - kernel_cdf(k, u - h)) / (2.0 * h);
}

const SmoothingKernel kAll[] = {SmoothingKernel::Sigmoid, SmoothingKernel::GaussianCdf,
                                SmoothingKernel::DoubleExponential};

} // namespace

TEST(Kernels, CdfPinnedValues) {
    EXPECT_DOUBLE_EQ(kernel_cdf(SmoothingKernel::Sigmoid, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(kernel_cdf(SmoothingKernel::DoubleExponential, std::log(2.0)), 0.75);

    // Oracle: Phi(1) = 1/2 + integral of the normal density over [0, 1].
    const double oracle = 0.5 + integrate(std_normal_density, 0.0, 1.0);
    EXPECT_NEAR(oracle, 0.8413447460685429, 1e-12);
    EXPECT_NEAR(kernel_cdf(SmoothingKernel::GaussianCdf, 1.0), oracle, 1e-9);
}

TEST(Kernels, PdfPinnedValues) {
    EXPECT_DOUBLE_EQ(kernel_pdf(SmoothingKernel::Sigmoid, 0.0), 0.25);
    EXPECT_NEAR(kernel_pdf(SmoothingKernel::GaussianCdf, 0.0), 0.3989422804014327, 1e-15);

    // Oracle: finite difference of the CDF at h = 1e-6.
    const double fd = central_diff(SmoothingKernel::Sigmoid, 2.0, 1e-6);
    EXPECT_NEAR(fd, 0.10499358540350652, 1e-9);
    EXPECT_NEAR(kernel_pdf(SmoothingKernel::Sigmoid, 2.0), fd, 1e-8);
}

TEST(Kernels, CurvaturePinnedValues) {
    EXPECT_DOUBLE_EQ(kernel_curvature(SmoothingKernel::GaussianCdf, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(kernel_curvature(SmoothingKernel::Sigmoid, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(kernel_curvature(SmoothingKernel::DoubleExponential, 0.0), 0.0);

    // Oracle: second central difference of the CDF at h = 1e-4.
    const double h = 1e-4;
    const double fd2 = (kernel_cdf(SmoothingKernel::GaussianCdf, 1.0 + h) -
                        2.0 * kernel_cdf(SmoothingKernel::GaussianCdf, 1.0) +
                        kernel_cdf(SmoothingKernel::GaussianCdf, 1.0 - h)) /
                       (h * h);
    EXPECT_NEAR(fd2, -0.24197072451914337, 1e-6);
    EXPECT_NEAR(kernel_curvature(SmoothingKernel::GaussianCdf, 1.0), fd2, 1e-6);
}

TEST(Kernels, SymmetryOnGrid) {
    for (SmoothingKernel k : kAll)
        for (double u = -40.0; u <= 40.0; u += 0.125)
            EXPECT_NEAR(kernel_cdf(k, -u), 1.0 - kernel_cdf(k, u), 1e-12)
                << rmrce::kernel_name(k) << " at u=" << u;
}

TEST(Kernels, HalfAtZeroAndMonotone) {
    for (SmoothingKernel k : kAll) {
        EXPECT_DOUBLE_EQ(kernel_cdf(k, 0.0), 0.5);
        double prev = -1.0;
        for (double u = -40.0; u <= 40.0; u += 0.25) {
            const double f = kernel_cdf(k, u);
            EXPECT_GE(f, prev);
            EXPECT_GE(f, 0.0);
            EXPECT_LE(f, 1.0);
            prev = f;
        }
    }
}

TEST(Kernels, PdfMatchesFiniteDifference) {
    const double h = 1e-5;
    for (SmoothingKernel k : kAll) {
        for (double u = -8.0; u <= 8.0; u += 0.37) {
            if (k == SmoothingKernel::DoubleExponential && std::abs(u) < h) continue;
            EXPECT_NEAR(kernel_pdf(k, u), central_diff(k, u, h), 1e-6)
                << rmrce::kernel_name(k) << " at u=" << u;
        }
    }
}

TEST(Kernels, UnimodalShape) {
    for (SmoothingKernel k : kAll) {
        for (double u = -20.0; u <= 20.0; u += 0.3) {
            EXPECT_GE(kernel_pdf(k, u), 0.0);
            if (u != 0.0)
                EXPECT_LE(kernel_curvature(k, u) * (u > 0 ? 1.0 : -1.0), 0.0)
                    << rmrce::kernel_name(k) << " at u=" << u;
        }
    }
}

TEST(Kernels, TailDecayBound) {
    // Family constants chosen empirically: C1=1, C2=1 for sigmoid and
    // double-exponential; C1=1, C2=1/2 for the Gaussian. The survivor
    // function 1-F(u) is evaluated as F(-u), which is exact under symmetry
    // and avoids cancellation in the far tail.
    for (double u = 0.0; u <= 40.0; u += 0.5) {
        EXPECT_LE(kernel_cdf(SmoothingKernel::Sigmoid, -u), std::exp(-u));
        EXPECT_LE(kernel_cdf(SmoothingKernel::DoubleExponential, -u), std::exp(-u));
        EXPECT_LE(kernel_cdf(SmoothingKernel::GaussianCdf, -u), std::exp(-0.5 * u));
    }
}

TEST(Kernels, LargeAlphaLimit) {
    for (SmoothingKernel k : kAll) {
        for (double z : {0.3, -0.3, 2.0, -2.0}) {
            double prev = kernel_cdf(k, 1.0 * z);
            for (double alpha : {4.0, 16.0, 64.0, 256.0, 4096.0}) {
                const double f = kernel_cdf(k, alpha * z);
                if (z > 0)
                    EXPECT_GE(f, prev - 1e-15);
                else
                    EXPECT_LE(f, prev + 1e-15);
                prev = f;
            }
            EXPECT_NEAR(prev, z > 0 ? 1.0 : 0.0, 1e-12);
        }
    }
}

TEST(Kernels, SaturationBranch) {
    for (SmoothingKernel k : {SmoothingKernel::Sigmoid, SmoothingKernel::DoubleExponential}) {
        EXPECT_EQ(kernel_cdf(k, 701.0), 1.0);
        EXPECT_EQ(kernel_cdf(k, -701.0), 0.0);
        EXPECT_EQ(kernel_pdf(k, 3000.0), 0.0);
        EXPECT_EQ(kernel_curvature(k, -3000.0), 0.0);
    }
    EXPECT_EQ(kernel_cdf(SmoothingKernel::GaussianCdf, 50.0), 1.0);
    EXPECT_EQ(kernel_cdf(SmoothingKernel::GaussianCdf, -50.0), 0.0);
}

TEST(Kernels, NonFiniteRejected) {
    for (SmoothingKernel k : kAll) {
        EXPECT_THROW(kernel_cdf(k, std::nan("")), rmrce::invalid_input);
        EXPECT_THROW(kernel_pdf(k, INFINITY), rmrce::invalid_input);
        EXPECT_THROW(kernel_curvature(k, -INFINITY), rmrce::invalid_input);
    }
}

TEST(Kernels, ParseTokens) {
    EXPECT_EQ(rmrce::parse_kernel("Sigmoid"), SmoothingKernel::Sigmoid);
    EXPECT_EQ(rmrce::parse_kernel("GAUSSIAN"), SmoothingKernel::GaussianCdf);
    EXPECT_EQ(rmrce::parse_kernel("doubleExp"), SmoothingKernel::DoubleExponential);
    EXPECT_THROW(rmrce::parse_kernel("cauchy"), rmrce::invalid_input);
}
