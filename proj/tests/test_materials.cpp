#include "dimer/materials.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace dimer;
using dimer::test::uniform;

namespace {

constexpr double lambda_n0 = 1.0 / (pi * pi);
constexpr double lambda_nstar = 1.0 / 3.0;

cplx dielectric_residual(double a, double h, cplx c0, int branch, const LorentzParams& p, double lam)
{
    const ResonanceResult r = dielectric_resonance_k(a, h, c0, branch, p, lam);
    LorentzParams q = p;
    q.xi = r.xi;
    const cplx eta1 = lorentz_permittivity(r.k, q) - 1.0;
    return 1.0 - r.k * r.k * eta1 * a * a * lam - double(branch) * c0 * std::pow(a, h);
}

cplx plasmonic_residual(double a, double h, cplx d0, int branch, const LorentzParams& p, double lam)
{
    const ResonanceResult r = plasmonic_resonance_k(a, h, d0, branch, p, lam);
    LorentzParams q = p;
    q.xi = r.xi;
    const cplx eta2 = lorentz_permittivity(r.k, q) - 1.0;
    return 1.0 + eta2 * lam - double(branch) * d0 * std::pow(a, h);
}

} // namespace

TEST(Lorentz, PlasmonicWindowValue)
{
    const cplx e = lorentz_permittivity(1.2, {1.0, 1.0, 0.001});
    EXPECT_NEAR(e.real(), -1.2727103682699880745, 1e-13);
    EXPECT_NEAR(e.imag(), 0.0061983010043726947486, 1e-15);
}

TEST(Lorentz, StaticLimit)
{
    const LorentzParams p{1.5, 2.0, 0.01};
    EXPECT_NEAR(std::abs(lorentz_permittivity(1e-9, p) - (1.0 + 2.25 / 4.0)), 0.0, 1e-10);
}

TEST(Lorentz, Passivity)
{
    for (double k = 0.05; k < 5; k += 0.05)
        for (double xi : {0.0, 1e-4, 0.01, 0.3}) {
            const cplx e = lorentz_permittivity(k, {1.3, 1.13, xi});
            EXPECT_GE(e.imag(), 0.0);
            if (xi > 0) {
                EXPECT_GT(e.imag(), 0.0);
            }
        }
}

TEST(Lorentz, PoleAndInvalidInputs)
{
    EXPECT_THROW(lorentz_permittivity(1.0, {1.0, 1.0, 0.0}), PoleEvaluation);
    EXPECT_THROW(lorentz_permittivity(0.0, {1.0, 1.0, 0.0}), InvalidParameter);
    EXPECT_THROW((LorentzParams{0.0, 1.0, 0.0}.validate()), InvalidParameter);
    EXPECT_THROW((LorentzParams{1.0, -1.0, 0.0}.validate()), InvalidParameter);
    EXPECT_THROW((LorentzParams{1.0, 1.0, -0.1}.validate()), InvalidParameter);
    EXPECT_EQ((LorentzParams{1.0, 1.0, 0.5}.validate().size()), 1u);
    EXPECT_TRUE((LorentzParams{1.0, 1.0, 0.01}.validate().empty()));
}

TEST(Contrasts, Scaling)
{
    MaterialContrast mc;
    mc.eta0 = 1.0;
    EXPECT_NEAR(std::abs(eta_contrasts(0.1, mc).first - 100.0), 0.0, 1e-12);
    mc.eta0 = cplx(2.0, 0.1);
    const cplx e1 = eta_contrasts(0.2, mc).first;
    EXPECT_NEAR(e1.real(), 50.0, 1e-12);
    EXPECT_NEAR(e1.imag(), 2.5, 1e-12);
    EXPECT_EQ(eta_contrasts(0.2, mc).second, mc.eta2);
}

TEST(Contrasts, Rejections)
{
    MaterialContrast mc;
    EXPECT_THROW(eta_contrasts(0.0, mc), InvalidScale);
    EXPECT_THROW(eta_contrasts(1.0, mc), InvalidScale);
    mc.eta2 = -0.5;
    EXPECT_THROW(eta_contrasts(0.1, mc), InvalidParameter);
    mc.eta2 = -3.0;
    mc.branch = 0;
    EXPECT_THROW(mc.validate(), InvalidParameter);
    mc.branch = -1;
    mc.c0 = -1.0;
    EXPECT_EQ(mc.validate().size(), 1u);
}

TEST(Resonance, DielectricSelfConsistency)
{
    const cplx r = dielectric_residual(0.05, 0.5, 1.0, 1, {1.0, 1.0, 0.0}, lambda_n0);
    EXPECT_LT(std::abs(r), 1e-10);
}

TEST(Resonance, DielectricApproachesUndampedFrequency)
{
    const LorentzParams p{1.0, 1.3, 0.0};
    double prev = 0;
    for (double a : {0.1, 0.01, 0.001, 1e-4}) {
        const double k = dielectric_resonance_k(a, 0.5, 1.0, 1, p, lambda_n0).k;
        EXPECT_LT(k, 1.3);
        EXPECT_GT(k, prev);
        prev = k;
    }
    EXPECT_NEAR(prev, 1.3, 1e-8);
}

TEST(Resonance, DielectricDecreasesWithScale)
{
    const LorentzParams p{1.0, 1.0, 0.0};
    double prev = 2;
    for (double a = 0.02; a < 0.6; a += 0.02) {
        const double k = dielectric_resonance_k(a, 0.4, 0.7, 1, p, lambda_n0).k;
        EXPECT_LT(k, prev);
        prev = k;
    }
}

TEST(Resonance, BranchEntersOnlyThroughSign)
{
    const LorentzParams p{1.0, 1.0, 0.0};
    const cplx c0(0.8, 0.2);
    const ResonanceResult minus = dielectric_resonance_k(0.1, 0.5, c0, -1, p, lambda_n0);
    const ResonanceResult flipped = dielectric_resonance_k(0.1, 0.5, -c0, 1, p, lambda_n0);
    EXPECT_DOUBLE_EQ(minus.k, flipped.k);
    EXPECT_DOUBLE_EQ(minus.xi, flipped.xi);
    EXPECT_LT(std::abs(dielectric_residual(0.1, 0.5, c0, -1, p, lambda_n0)), 1e-10);
    const LorentzParams p2{1.0, 0.8, 0.0};
    EXPECT_DOUBLE_EQ(plasmonic_resonance_k(0.1, 0.5, c0, -1, p2, lambda_nstar).k,
                     plasmonic_resonance_k(0.1, 0.5, -c0, 1, p2, lambda_nstar).k);
}

TEST(Resonance, PlasmonicSelfConsistency)
{
    const LorentzParams p{1.0, 0.8, 0.0};
    EXPECT_LT(std::abs(plasmonic_residual(0.05, 0.5, 1.0, 1, p, lambda_nstar)), 1e-10);
    const ResonanceResult r = plasmonic_resonance_k(0.05, 0.5, 1.0, 1, p, lambda_nstar);
    EXPECT_LT(lorentz_permittivity(r.k, {1.0, 0.8, r.xi}).real(), 0.0);
}

TEST(Resonance, PlasmonicLeadingTerm)
{
    const LorentzParams p{1.2, 0.7, 0.0};
    const double k = plasmonic_resonance_k(1e-9, 0.5, 1.0, 1, p, lambda_nstar).k;
    EXPECT_NEAR(k * k, 0.49 + 1.44 / 3.0, 1e-4);
}

TEST(Resonance, ResidualsOnRandomGrid)
{
    for (int i = 0; i < 200; ++i) {
        const double a = uniform(0.01, 0.5), h = uniform(0.05, 0.95);
        const int branch = i % 2 ? 1 : -1;
        const cplx c0(uniform(0.2, 1.5), uniform(-0.3, 0.3));
        const cplx d0(uniform(0.2, 1.5), uniform(-0.3, 0.3));
        const LorentzParams p1{uniform(0.5, 2.0), uniform(0.8, 1.5), 0.0};
        const LorentzParams p2{uniform(0.5, 2.0), uniform(0.3, 0.8), 0.0};
        try {
            EXPECT_LT(std::abs(dielectric_residual(a, h, c0, branch, p1, lambda_n0)), 1e-10);
        } catch (const NegativeKSquared&) {
        }
        try {
            EXPECT_LT(std::abs(plasmonic_residual(a, h, d0, branch, p2, lambda_nstar)), 1e-10);
        } catch (const NegativeKSquared&) {
        }
    }
}

TEST(Resonance, Errors)
{
    EXPECT_THROW(dielectric_resonance_k(0.25, 0.5, 2.2, 1, {2.0, 1.0, 0.0}, 1.0), NegativeKSquared);
    EXPECT_THROW(plasmonic_resonance_k(0.25, 0.5, 4.0, 1, {1.0, 0.0, 0.0}, lambda_nstar), NegativeKSquared);
    const LorentzParams p1{1.0, 1.0, 0.0};
    EXPECT_THROW(plasmonic_resonance_k(0.1, 0.5, 1.0, 1, {1.0, 1.2, 0.0}, lambda_nstar, &p1), OrderingViolated);
    EXPECT_THROW(plasmonic_resonance_k(0.1, 0.5, 1.0, 1, {0.5, 0.5, 0.0}, lambda_nstar, &p1), OrderingViolated);
    EXPECT_NO_THROW(plasmonic_resonance_k(0.1, 0.5, 1.0, 1, {1.0, 0.8, 0.0}, lambda_nstar, &p1));
    EXPECT_THROW(dielectric_resonance_k(0.1, 0.5, 1.0, 2, p1, lambda_n0), InvalidParameter);
    EXPECT_THROW(dielectric_resonance_k(0.1, 0.5, 1.0, 1, p1, 0.0), InvalidParameter);
    EXPECT_THROW(plasmonic_resonance_k(0.1, 0.5, 1.0, 1, p1, 1.0), InvalidParameter);
    EXPECT_THROW(dielectric_resonance_k(1.5, 0.5, 1.0, 1, p1, lambda_n0), InvalidScale);
}

TEST(Resonance, CommonResonanceResidual)
{
    const LorentzParams p1{1.0, 1.0, 0.0};
    const double k02 = std::sqrt(2.0 / 3.0);
    EXPECT_NEAR(common_resonance_residual(p1, {1.0, k02, 0.0}, lambda_nstar), 0.0, 1e-15);
    for (double d : {1e-3, -0.02, 0.1}) {
        EXPECT_NEAR(common_resonance_residual(p1, {1.0, k02 + d, 0.0}, lambda_nstar), std::abs(2 * k02 * d + d * d),
                    1e-14);
    }
}

TEST(Resonance, MatchedPairAgreesToLeadingOrder)
{
    const LorentzParams p1{1.0, 1.0, 0.0};
    const LorentzParams p2{1.0, std::sqrt(2.0 / 3.0), 0.0};
    const double h = 0.5;
    for (double a : {0.1, 0.05, 0.025}) {
        const double kd = dielectric_resonance_k(a, h, 1.0, 1, p1, lambda_n0).k;
        const double kp = plasmonic_resonance_k(a, h, 1.0, 1, p2, lambda_nstar).k;
        EXPECT_LT(std::abs(kd - kp) / kd, a * a + std::pow(a, h));
    }
}

TEST(Resonance, ImpliedConstantsInvertResiduals)
{
    const double k = 0.9, a = 0.07, h = 0.35;
    const cplx eta1(210.0, 3.0), eta2(-2.8, 0.05);
    const auto [c0, d0] = implied_c0_d0(k, a, h, eta1, eta2, -1, lambda_n0, lambda_nstar);
    const ResonanceResiduals r = resonance_residuals(k, a, h, eta1, eta2, c0, d0, -1, lambda_n0, lambda_nstar);
    EXPECT_LT(std::abs(r.dielectric), 1e-13);
    EXPECT_LT(std::abs(r.plasmonic), 1e-13);
}

TEST(Resonance, MatchedPlasmonicFrequency)
{
    const double k = 1.05, a = 0.05, h = 0.5;
    const cplx d0(1.0, 0.1);
    const double k0 = matched_plasmonic_k0(k, a, h, d0, 1, 1.5, lambda_nstar);
    EXPECT_NEAR(plasmonic_resonance_k(a, h, d0, 1, {1.5, k0, 0.0}, lambda_nstar).k, k, 1e-13);
}
