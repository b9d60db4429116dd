#include "dimer/kernels.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace dimer;
using dimer::test::random_vec;
using dimer::test::rel;

namespace {

// fourth-order central stencil
cplx laplacian_fd(const Vec3& x, const Vec3& y, double k, double h)
{
    cplx acc = -90.0 * helmholtz_kernel(x, y, k);
    for (int d = 0; d < 3; ++d) {
        Vec3 e = Vec3::Zero();
        e(d) = h;
        acc += 16.0 * (helmholtz_kernel(x + e, y, k) + helmholtz_kernel(x - e, y, k))
               - helmholtz_kernel(x + 2 * e, y, k) - helmholtz_kernel(x - 2 * e, y, k);
    }
    return acc / (12 * h * h);
}

} // namespace

TEST(Kernels, ScalarValueAtHalfUnit)
{
    const cplx v = helmholtz_kernel(Vec3(0.5, 0, 0), Vec3::Zero(), 1.0);
    EXPECT_NEAR(v.real(), 0.13967160269610198607, 1e-15);
    EXPECT_NEAR(v.imag(), 0.076302944313353198915, 1e-15);
}

TEST(Kernels, StaticLimitIsNewtonian)
{
    const Vec3 x(0.3, -0.2, 0.7);
    const cplx v = helmholtz_kernel(x, Vec3::Zero(), 1e-12);
    EXPECT_NEAR(v.real(), 1.0 / (4 * pi * x.norm()), 1e-12);
}

TEST(Kernels, SymmetricInArguments)
{
    for (int i = 0; i < 20; ++i) {
        const Vec3 x = random_vec(-1, 1), y = random_vec(-1, 1);
        EXPECT_LT(std::abs(helmholtz_kernel(x, y, 2.0) - helmholtz_kernel(y, x, 2.0)), 1e-14);
        EXPECT_LT(rel(dyadic_green(x, y, 2.0), dyadic_green(y, x, 2.0)), 1e-13);
    }
}

TEST(Kernels, TraceOfDyadicIsTwicePhi)
{
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = random_vec(-1, 1), y = random_vec(-1, 1);
        const double k = dimer::test::uniform(0.2, 3.0);
        const cplx phi = helmholtz_kernel(x, y, k);
        EXPECT_LT(std::abs(dyadic_green(x, y, k).trace() - 2.0 * phi), 1e-10 * std::max(1.0, std::abs(phi)));
    }
}

TEST(Kernels, HelmholtzEquationByFiniteDifferences)
{
    for (int i = 0; i < 100; ++i) {
        Vec3 x = random_vec(-1, 1), y = random_vec(-1, 1);
        if ((x - y).norm() < 0.3) y = x + 0.3 * dimer::test::random_unit();
        const double k = dimer::test::uniform(0.2, 3.0);
        const cplx phi = helmholtz_kernel(x, y, k);
        const cplx r = laplacian_fd(x, y, k, 2e-3) + k * k * phi;
        EXPECT_LT(std::abs(r), 1e-5 * std::max(1.0, std::abs(phi)));
    }
}

TEST(Kernels, GradientMatchesFiniteDifferences)
{
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const Vec3 x = random_vec(-1, 1);
        const Vec3 y = x + 0.5 * dimer::test::random_unit();
        const ComplexVec3 g = grad_helmholtz_kernel(x, y, 1.3);
        for (int d = 0; d < 3; ++d) {
            Vec3 e = Vec3::Zero();
            e(d) = h;
            const cplx fd = (helmholtz_kernel(x, y + e, 1.3) - helmholtz_kernel(x, y - e, 1.3)) / (2 * h);
            EXPECT_LT(std::abs(g(d) - fd), 1e-7);
        }
        // translation invariance: grad_x = -grad_y
        const cplx fdx = (helmholtz_kernel(x + Vec3(h, 0, 0), y, 1.3) - helmholtz_kernel(x - Vec3(h, 0, 0), y, 1.3)) / (2 * h);
        EXPECT_LT(std::abs(g(0) + fdx), 1e-7);
    }
}

TEST(Kernels, HessianMatchesFiniteDifferencesOfGradient)
{
    const double h = 1e-6;
    for (int i = 0; i < 20; ++i) {
        const Vec3 x = random_vec(-1, 1);
        const Vec3 y = x + 0.6 * dimer::test::random_unit();
        const Dyadic3 hs = hessian_helmholtz_kernel(x, y, 0.9);
        EXPECT_LT(rel(hs, hs.transpose()), 1e-14);
        for (int d = 0; d < 3; ++d) {
            Vec3 e = Vec3::Zero();
            e(d) = h;
            const ComplexVec3 fd = (grad_helmholtz_kernel(x, y + e, 0.9) - grad_helmholtz_kernel(x, y - e, 0.9)) / (2 * h);
            EXPECT_LT((hs.col(d) - fd).norm(), 1e-6);
        }
    }
}

TEST(Kernels, DyadicGreenDefinition)
{
    const Vec3 x(0.1, 0.4, -0.3), y(-0.5, 0.2, 0.6);
    const double k = 1.7;
    const Dyadic3 want = hessian_helmholtz_kernel(x, y, k) / (k * k) + helmholtz_kernel(x, y, k) * Dyadic3::Identity();
    EXPECT_LT(rel(dyadic_green(x, y, k), want), 1e-15);
}

TEST(Kernels, SingularSeparationThrows)
{
    const Vec3 x(1, 2, 3);
    EXPECT_THROW(helmholtz_kernel(x, x, 1.0), SingularEvaluation);
    EXPECT_THROW(grad_helmholtz_kernel(x, x, 1.0), SingularEvaluation);
    EXPECT_THROW(hessian_helmholtz_kernel(x, x + Vec3(1e-12, 0, 0), 1.0), SingularEvaluation);
    EXPECT_THROW(dyadic_green(x, x, 1.0), SingularEvaluation);
    EXPECT_NO_THROW(helmholtz_kernel(x, x + Vec3(1e-6, 0, 0), 1.0));
}

TEST(Kernels, SinglePrecisionInstantiation)
{
    const vec3_t<float> x(0.5f, 0, 0), y(0, 0, 0);
    const std::complex<float> v = helmholtz_kernel<float>(x, y, 1.0f);
    EXPECT_NEAR(v.real(), 0.1396716f, 1e-6f);
    const cmat3_t<float> g = dyadic_green<float>(x, y, 1.0f);
    EXPECT_NEAR(std::abs(g.trace() - 2.0f * v), 0.0f, 1e-5f);
}
