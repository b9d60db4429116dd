#pragma once

// Lorentz dispersion, contrasts and resonance-frequency selection.

#include "dimer/errors.hpp"
#include "dimer/types.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace dimer {

struct LorentzParams {
    double kp = 1.0; ///< plasma wavenumber
    double k0 = 1.0; ///< undamped resonance wavenumber
    double xi = 0.0; ///< damping wavenumber

    /// Throws on kp <= 0, k0 < 0, xi < 0; returns warnings otherwise.
    std::vector<std::string> validate() const
    {
        if (!(kp > 0)) throw InvalidParameter("Lorentz k_p must be positive");
        if (!(k0 >= 0)) throw InvalidParameter("Lorentz k_0 must be non-negative");
        if (!(xi >= 0)) throw InvalidParameter("Lorentz damping xi must be non-negative");
        std::vector<std::string> w;
        if (k0 > 0 && xi > 0.1 * k0) w.push_back("Lorentz damping xi is not small compared to k_0");
        return w;
    }
};

inline int checked_branch(int branch)
{
    if (branch != 1 && branch != -1) throw InvalidParameter("sign branch must be +1 or -1");
    return branch;
}

struct MaterialContrast {
    cplx eta0{1.0, 0.0}; ///< eta_1 = eta0 / a^2
    cplx eta2{-3.0, 0.0};
    cplx c0{1.0, 0.0};
    cplx d0{1.0, 0.0};
    int branch = 1;

    std::vector<std::string> validate() const
    {
        checked_branch(branch);
        std::vector<std::string> w;
        if (!(eta0.real() > 0)) w.push_back("Re(eta0) is not positive");
        if (!(c0.real() > 0)) w.push_back("Re(c0) is not positive");
        if (!(d0.real() > 0)) w.push_back("Re(d0) is not positive");
        if (!((1.0 + eta2).real() < 0)) w.push_back("Re(1 + eta2) is not negative");
        return w;
    }
};

/// 1 + kp^2 / (k0^2 - k^2 - i k xi)
inline cplx lorentz_permittivity(double k, const LorentzParams& p)
{
    if (!(k > 0)) throw InvalidParameter("lorentz_permittivity requires k > 0");
    const cplx den(p.k0 * p.k0 - k * k, -k * p.xi);
    if (std::abs(den) < 1e-14) throw PoleEvaluation("Lorentz permittivity evaluated at its pole");
    return 1.0 + p.kp * p.kp / den;
}

/// (eta1, eta2) with eta1 = eta0 / a^2.
inline std::pair<cplx, cplx> eta_contrasts(double a, const MaterialContrast& mc)
{
    if (!(a > 0 && a < 1)) throw InvalidScale("scale a must lie in (0, 1)");
    if (!((1.0 + mc.eta2).real() < 0))
        throw InvalidParameter("plasmonic contrast requires Re(1 + eta2) < 0");
    return {mc.eta0 / (a * a), mc.eta2};
}

struct ResonanceResult {
    double k = 0; ///< wavenumber
    double xi = 0; ///< damping wavenumber making the complex identity exact
};

/// Wavenumber and damping solving 1 - k^2 eta1 a^2 lambda = (+/-) c0 a^h with eta1 from the Lorentz model.
inline ResonanceResult dielectric_resonance_k(double a, double h, cplx c0, int branch, const LorentzParams& lorentz1,
                                              double lambda_n0)
{
    const double s = checked_branch(branch);
    if (!(lambda_n0 > 0)) throw InvalidParameter("lambda_n0 must be positive");
    if (!(a > 0 && a < 1)) throw InvalidScale("scale a must lie in (0, 1)");
    if (!(h > 0 && h < 1)) throw InvalidParameter("exponent h must lie in (0, 1)");
    const double ah = std::pow(a, h);
    const double cr = s * c0.real() * ah;
    const double ci = s * c0.imag() * ah;
    const double one_m = 1.0 - cr;
    const double mod2 = one_m * one_m + ci * ci;
    const double kp2 = lorentz1.kp * lorentz1.kp;
    const double k01sq = lorentz1.k0 * lorentz1.k0;
    const double g = kp2 * a * a * lambda_n0;
    const double den = mod2 / one_m + g;
    const double ksq = k01sq - g * k01sq / den;
    if (!(ksq > 0) || !(one_m != 0)) throw NegativeKSquared("dielectric resonance formula gives k^2 <= 0");
    ResonanceResult r;
    r.k = std::sqrt(ksq);
    r.xi = -kp2 * r.k * a * a * lambda_n0 * ci / mod2;
    return r;
}

/// Wavenumber and damping solving 1 + eta2 lambda = (+/-) d0 a^h with eta2 from the Lorentz model.
/// When lorentz1 is supplied the ordering k02^2 < k01^2 < k02^2 + kp2^2 is enforced.
inline ResonanceResult plasmonic_resonance_k(double a, double h, cplx d0, int branch, const LorentzParams& lorentz2,
                                             double lambda_nstar, const LorentzParams* lorentz1 = nullptr)
{
    const double s = checked_branch(branch);
    if (!(lambda_nstar > 0 && lambda_nstar < 1)) throw InvalidParameter("lambda_nstar must lie in (0, 1)");
    if (!(a > 0 && a < 1)) throw InvalidScale("scale a must lie in (0, 1)");
    if (!(h > 0 && h < 1)) throw InvalidParameter("exponent h must lie in (0, 1)");
    const double k02sq = lorentz2.k0 * lorentz2.k0;
    const double kp2 = lorentz2.kp * lorentz2.kp;
    if (lorentz1) {
        const double k01sq = lorentz1->k0 * lorentz1->k0;
        if (!(k02sq < k01sq && k01sq < k02sq + kp2))
            throw OrderingViolated("Lorentz parameters violate k02^2 < k01^2 < k02^2 + kp2^2");
    }
    const double ah = std::pow(a, h);
    const double dr = s * d0.real() * ah;
    const double di = s * d0.imag() * ah;
    const double mod2 = (1.0 - dr) * (1.0 - dr) + di * di;
    const double ksq = k02sq + lambda_nstar * kp2 * (1.0 - dr) / mod2;
    if (!(ksq > 0)) throw NegativeKSquared("plasmonic resonance formula gives k^2 <= 0");
    ResonanceResult r;
    r.k = std::sqrt(ksq);
    r.xi = kp2 * lambda_nstar * di / (r.k * mod2);
    return r;
}

/// |k01^2 - k02^2 - lambda kp2^2|
inline double common_resonance_residual(const LorentzParams& p1, const LorentzParams& p2, double lambda_nstar)
{
    return std::abs(p1.k0 * p1.k0 - p2.k0 * p2.k0 - lambda_nstar * p2.kp * p2.kp);
}

/// Left sides minus right sides of the two resonance identities.
struct ResonanceResiduals {
    cplx dielectric;
    cplx plasmonic;
};

inline ResonanceResiduals resonance_residuals(double k, double a, double h, cplx eta1, cplx eta2, cplx c0, cplx d0,
                                              int branch, double lambda_n0, double lambda_nstar)
{
    const double s = checked_branch(branch);
    const double ah = std::pow(a, h);
    return {1.0 - k * k * eta1 * a * a * lambda_n0 - s * c0 * ah, 1.0 + eta2 * lambda_nstar - s * d0 * ah};
}

/// c0 and d0 implied by given contrasts through the resonance identities.
inline std::pair<cplx, cplx> implied_c0_d0(double k, double a, double h, cplx eta1, cplx eta2, int branch,
                                           double lambda_n0, double lambda_nstar)
{
    const double s = checked_branch(branch);
    const double ah = std::pow(a, h);
    return {(1.0 - k * k * eta1 * a * a * lambda_n0) / (s * ah), (1.0 + eta2 * lambda_nstar) / (s * ah)};
}

/// k02 that places the plasmonic resonance exactly at wavenumber k.
inline double matched_plasmonic_k0(double k, double a, double h, cplx d0, int branch, double kp2, double lambda_nstar)
{
    const double s = checked_branch(branch);
    const double ah = std::pow(a, h);
    const double dr = s * d0.real() * ah;
    const double di = s * d0.imag() * ah;
    const double mod2 = (1.0 - dr) * (1.0 - dr) + di * di;
    const double k02sq = k * k - lambda_nstar * kp2 * kp2 * (1.0 - dr) / mod2;
    if (!(k02sq > 0)) throw NegativeKSquared("no real k02 matches the requested plasmonic resonance");
    return std::sqrt(k02sq);
}

} // namespace dimer
