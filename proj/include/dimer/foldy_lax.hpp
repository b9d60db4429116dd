#pragma once

// The 12x12 algebraic system for the dimer poles (Q1, R1, Q2, R2).

#include "dimer/errors.hpp"
#include "dimer/incident.hpp"
#include "dimer/kernels.hpp"
#include "dimer/materials.hpp"
#include "dimer/shape.hpp"
#include "dimer/tensors.hpp"
#include "dimer/types.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace dimer {

struct DimerConfig {
    Vec3 z1 = Vec3::Zero();
    Vec3 z2 = Vec3::UnitZ();
    double a = 0.1;
    double t = 0.5;
    double h = 0.5;
    double alpha0 = 1.0;
    Shape shape1 = Shape::ball();
    Shape shape2 = Shape::ball();
    int branch = 1;
    /// Skip the d = alpha0 a^t check (used to study decoupled limits).
    bool free_distance = false;

    double distance() const { return (z2 - z1).norm(); }
    Vec3 midpoint() const { return 0.5 * (z1 + z2); }

    /// Centers placed symmetrically about `center` along `axis` at distance alpha0 a^t.
    static DimerConfig symmetric(double a, double t, double h, double alpha0, const Vec3& axis = Vec3::UnitZ(),
                                 const Vec3& center = Vec3::Zero())
    {
        DimerConfig c;
        c.a = a;
        c.t = t;
        c.h = h;
        c.alpha0 = alpha0;
        const double d = alpha0 * std::pow(a, t);
        const Vec3 u = axis.normalized();
        c.z1 = center - 0.5 * d * u;
        c.z2 = center + 0.5 * d * u;
        return c;
    }

    void validate() const
    {
        if (!(a > 0 && a < 1)) throw InvalidScale("scale a must lie in (0, 1)");
        if (!(t > 0 && t < 1)) throw InvalidParameter("exponent t must lie in (0, 1)");
        if (!(h > 0 && h < 1)) throw InvalidParameter("exponent h must lie in (0, 1)");
        if (!(alpha0 > 0)) throw InvalidParameter("alpha0 must be positive");
        checked_branch(branch);
        const double d = distance();
        if (!free_distance) {
            const double want = alpha0 * std::pow(a, t);
            if (std::abs(d - want) > 1e-12 * want)
                throw InvalidParameter("|z1 - z2| must equal alpha0 a^t");
        }
        if (d <= a * (shape1.bounding_radius() + shape2.bounding_radius()))
            throw DegenerateGeometry("particles overlap: d <= a (r1 + r2)");
    }
};

struct RegimeReport {
    double margin = 0;             ///< 4 - h - 4t
    bool ok = false;
    double theorem_exponent = 0;   ///< min(3, 7-2h-3t, 10-2h-7t)
    double corollary_exponent = 0; ///< min(3-h+t, 3, 10-2h-7t, 9-3h-5t)
    double dominant_order = 0;     ///< 3 - h, order of the leading poles
    /// Predicted log-log slope of the relative gap between the dominant and the full far field.
    double dominant_gap_exponent() const { return corollary_exponent - dominant_order; }
};

inline RegimeReport check_regime(double t, double h)
{
    RegimeReport r;
    r.margin = 4 - h - 4 * t;
    r.ok = r.margin > 0;
    r.theorem_exponent = std::min({3.0, 7 - 2 * h - 3 * t, 10 - 2 * h - 7 * t});
    r.corollary_exponent = std::min({3 - h + t, 3.0, 10 - 2 * h - 7 * t, 9 - 3 * h - 5 * t});
    r.dominant_order = 3 - h;
    return r;
}

inline RegimeReport check_regime(const DimerConfig& cfg) { return check_regime(cfg.t, cfg.h); }

using Matrix12 = Eigen::Matrix<cplx, 12, 12>;
using Vector12 = Eigen::Matrix<cplx, 12, 1>;

struct FoldySolution {
    ComplexVec3 q1 = ComplexVec3::Zero();
    ComplexVec3 r1 = ComplexVec3::Zero();
    ComplexVec3 q2 = ComplexVec3::Zero();
    ComplexVec3 r2 = ComplexVec3::Zero();

    Vector12 stacked() const
    {
        Vector12 v;
        v << q1, r1, q2, r2;
        return v;
    }
    static FoldySolution from_stacked(const Vector12& v)
    {
        return {v.segment<3>(0), v.segment<3>(3), v.segment<3>(6), v.segment<3>(9)};
    }
};

struct FoldySystem {
    Dyadic3 b13 = Dyadic3::Zero(), b14 = Dyadic3::Zero(), b23 = Dyadic3::Zero(), b24 = Dyadic3::Zero();
    Dyadic3 b31 = Dyadic3::Zero(), b32 = Dyadic3::Zero(), b41 = Dyadic3::Zero(), b42 = Dyadic3::Zero();
    std::array<ComplexVec3, 4> rhs{ComplexVec3::Zero(), ComplexVec3::Zero(), ComplexVec3::Zero(), ComplexVec3::Zero()};

    /// Coupling matrix C with the system written as (I - C) x = rhs.
    Matrix12 coupling() const
    {
        Matrix12 c = Matrix12::Zero();
        c.block<3, 3>(0, 6) = b13;
        c.block<3, 3>(0, 9) = b14;
        c.block<3, 3>(3, 6) = b23;
        c.block<3, 3>(3, 9) = b24;
        c.block<3, 3>(6, 0) = b31;
        c.block<3, 3>(6, 3) = b32;
        c.block<3, 3>(9, 0) = b41;
        c.block<3, 3>(9, 3) = b42;
        return c;
    }
    Matrix12 matrix() const { return Matrix12::Identity() - coupling(); }
    Vector12 rhs_vector() const
    {
        Vector12 v;
        v << rhs[0], rhs[1], rhs[2], rhs[3];
        return v;
    }
};

struct AssemblyOptions {
    /// Differentiate Phi_k(z_i, z_j) in its first argument instead of the second.
    bool grad_first_argument = false;
};

namespace detail {

inline ComplexVec3 block_gradient(const Vec3& zi, const Vec3& zj, double k, const AssemblyOptions& opt)
{
    const ComplexVec3 g = grad_helmholtz_kernel(zi, zj, k);
    return opt.grad_first_argument ? ComplexVec3(-g) : g;
}

} // namespace detail

inline FoldySystem assemble_system(const DimerConfig& cfg, const PolarizationTensors& pt, double k,
                                   const MaterialContrast& mc, const IncidentWave& wave,
                                   const AssemblyOptions& opt = {})
{
    cfg.validate();
    if (!(k > 0)) throw InvalidParameter("wavenumber must be positive");
    checked_branch(mc.branch);
    const double s = mc.branch;
    const double a = cfg.a;
    const double a3h = std::pow(a, 3 - cfg.h);
    const double a3 = a * a * a;
    const double a5 = a3 * a * a;
    const double k2 = k * k;
    const double k4 = k2 * k2;
    const cplx diel = mc.eta0 / (s * mc.c0) * a3h;
    const cplx plas = mc.eta2 / (s * mc.d0) * a3h;

    const Dyadic3 g12 = dyadic_green(cfg.z1, cfg.z2, k);
    const Dyadic3 g21 = dyadic_green(cfg.z2, cfg.z1, k);
    const Dyadic3 x12 = skew(detail::block_gradient(cfg.z1, cfg.z2, k, opt));
    const Dyadic3 x21 = skew(detail::block_gradient(cfg.z2, cfg.z1, k, opt));

    FoldySystem sys;
    sys.b13 = k4 * diel * pt.p011 * g12;
    sys.b14 = k2 * diel * pt.p011 * x12;
    sys.b23 = k2 * a3 * pt.p012 * x12;
    sys.b24 = k2 * a3 * pt.p012 * g12;
    sys.b31 = k4 * mc.eta2 * a5 * pt.p021 * g21;
    sys.b32 = k2 * mc.eta2 * a5 * pt.p021 * x21;
    sys.b41 = k2 * plas * pt.p022 * x21;
    sys.b42 = k2 * plas * pt.p022 * g21;

    IncidentWave w = wave;
    w.k = k;
    const auto [e1, h1] = incident_fields(cfg.z1, w);
    const auto [e2, h2] = incident_fields(cfg.z2, w);
    const cplx ik(0, k);
    sys.rhs[0] = ik * diel * (pt.p011 * h1);
    sys.rhs[1] = a3 * (pt.p012 * e1);
    sys.rhs[2] = ik * mc.eta2 * a5 * (pt.p021 * h2);
    sys.rhs[3] = plas * (pt.p022 * e2);
    return sys;
}

inline double spectral_norm(const Matrix12& m)
{
    Eigen::JacobiSVD<Matrix12> svd(m);
    return svd.singularValues()(0);
}

inline FoldySolution solve_system(const FoldySystem& sys)
{
    const Matrix12 a = sys.matrix();
    const Vector12 b = sys.rhs_vector();
    Eigen::PartialPivLU<Matrix12> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) throw SingularSystem("Foldy-Lax matrix is numerically singular", rc > 0 ? 1.0 / rc : INFINITY);
    Vector12 x = lu.solve(b);
    const double res = (a * x - b).norm();
    if (!(res <= 1e-10 * std::max(b.norm(), 1e-300))) {
        x += lu.solve(b - a * x);
        const double res2 = (a * x - b).norm();
        if (!(res2 <= 1e-10 * std::max(b.norm(), 1e-300)) && b.norm() > 0)
            throw SingularSystem("Foldy-Lax residual check failed", 1.0 / rc);
    }
    return FoldySolution::from_stacked(x);
}

/// Partial sum of the Neumann series sum_{m=0..n} C^m rhs.
inline FoldySolution born_series(const FoldySystem& sys, int n, double* coupling_norm = nullptr)
{
    if (n < 0) throw InvalidParameter("Born order must be non-negative");
    const Matrix12 c = sys.coupling();
    if (coupling_norm) *coupling_norm = spectral_norm(c);
    Vector12 term = sys.rhs_vector();
    Vector12 acc = term;
    for (int m = 1; m <= n; ++m) {
        term = c * term;
        acc += term;
    }
    return FoldySolution::from_stacked(acc);
}

/// Leading terms of the poles including the first cross-coupling corrections of R1 and Q2.
inline FoldySolution dominant_solution(const DimerConfig& cfg, const PolarizationTensors& pt, double k,
                                       const MaterialContrast& mc, const IncidentWave& wave)
{
    cfg.validate();
    const RegimeReport reg = check_regime(cfg);
    if (!reg.ok) throw RegimeViolation("regime condition 4 - h - 4t > 0 violated");
    const double s = checked_branch(mc.branch);
    const double a = cfg.a;
    const double h = cfg.h;
    IncidentWave w = wave;
    w.k = k;
    const auto [e1, h1] = incident_fields(cfg.z1, w);
    const auto [e2, h2] = incident_fields(cfg.z2, w);
    const cplx ik(0, k);
    const Dyadic3 g12 = dyadic_green(cfg.z1, cfg.z2, k);
    const Dyadic3 g21 = dyadic_green(cfg.z2, cfg.z1, k);

    FoldySolution sol;
    sol.q1 = ik * mc.eta0 / (s * mc.c0) * std::pow(a, 3 - h) * (pt.p011 * h1);
    sol.r1 = std::pow(a, 3) * (pt.p012 * e1)
             + k * k * mc.eta2 / (s * mc.d0) * std::pow(a, 6 - h) * (pt.p012 * g12 * pt.p022 * e2);
    sol.q2 = ik * mc.eta2 * std::pow(a, 5) * (pt.p021 * h2)
             + cplx(0, std::pow(k, 5)) * mc.eta0 * mc.eta2 / (s * mc.c0) * std::pow(a, 8 - h)
                   * (pt.p021 * g21 * pt.p011 * h1);
    sol.r2 = mc.eta2 / (s * mc.d0) * std::pow(a, 3 - h) * (pt.p022 * e2);
    return sol;
}

} // namespace dimer
