#pragma once

// Scattered and far fields generated by the poles of the dimer.

#include "dimer/errors.hpp"
#include "dimer/foldy_lax.hpp"
#include "dimer/incident.hpp"
#include "dimer/kernels.hpp"
#include "dimer/materials.hpp"
#include "dimer/tensors.hpp"
#include "dimer/types.hpp"

#include <cmath>

namespace dimer {

struct FarFieldSample {
    Vec3 xhat = Vec3::UnitZ();
    ComplexVec3 value = ComplexVec3::Zero();
};

namespace detail {

inline void check_observation_point(const Vec3& x, const DimerConfig& cfg)
{
    const double margin = 0.5 * cfg.distance();
    if ((x - cfg.z1).norm() < cfg.a * cfg.shape1.bounding_radius() + margin
        || (x - cfg.z2).norm() < cfg.a * cfg.shape2.bounding_radius() + margin)
        throw TooCloseToScatterer("observation point closer than d/2 to a particle");
}

inline Vec3 checked_direction(const Vec3& xhat)
{
    const double n = xhat.norm();
    if (!(n > 0)) throw InvalidParameter("observation direction must be non-zero");
    return xhat / n;
}

inline Mat3 transverse_projector(const Vec3& xhat) { return Mat3::Identity() - xhat * xhat.transpose(); }

} // namespace detail

/// k^2 sum_m [Upsilon_k(x, z_m) R_m - grad_y Phi_k(x, z_m) x Q_m]
inline ComplexVec3 scattered_field(const Vec3& x, const FoldySolution& sol, const DimerConfig& cfg, double k)
{
    detail::check_observation_point(x, cfg);
    const double k2 = k * k;
    ComplexVec3 e = dyadic_green(x, cfg.z1, k) * sol.r1 - cross(grad_helmholtz_kernel(x, cfg.z1, k), sol.q1);
    e += dyadic_green(x, cfg.z2, k) * sol.r2 - cross(grad_helmholtz_kernel(x, cfg.z2, k), sol.q2);
    return k2 * e;
}

/// Normalized so that E^s(x) ~ e^{ik|x|} / |x| E^inf(x/|x|).
inline FarFieldSample far_field(const Vec3& xhat_in, const FoldySolution& sol, const DimerConfig& cfg, double k)
{
    const Vec3 xhat = detail::checked_direction(xhat_in);
    const Mat3 proj = detail::transverse_projector(xhat);
    const cplx ik(0, k);
    const ComplexVec3 xh = xhat.cast<cplx>();
    auto term = [&](const Vec3& z, const ComplexVec3& r, const ComplexVec3& q) -> ComplexVec3 {
        const cplx phase = std::exp(cplx(0, -k * xhat.dot(z)));
        return phase * (proj.cast<cplx>() * r + ik * cross(xh, q));
    };
    FarFieldSample s;
    s.xhat = xhat;
    s.value = (k * k / (4 * pi)) * (term(cfg.z1, sol.r1, sol.q1) + term(cfg.z2, sol.r2, sol.q2));
    return s;
}

inline FarFieldSample dominant_far_field(const Vec3& xhat_in, const DimerConfig& cfg, const PolarizationTensors& pt,
                                         double k, const MaterialContrast& mc, const IncidentWave& wave)
{
    if (!check_regime(cfg).ok) throw RegimeViolation("regime condition 4 - h - 4t > 0 violated");
    const Vec3 xhat = detail::checked_direction(xhat_in);
    const double s = checked_branch(mc.branch);
    const Vec3 z0 = cfg.midpoint();
    IncidentWave w = wave;
    w.k = k;
    const auto [e0, h0] = incident_fields(z0, w);
    const ComplexVec3 elec = mc.eta2 / mc.d0 * (detail::transverse_projector(xhat).cast<cplx>() * (pt.p022 * e0));
    const ComplexVec3 mag = mc.eta0 * k * k / mc.c0 * cross(xhat.cast<cplx>(), (pt.p011 * h0).eval());
    FarFieldSample out;
    out.xhat = xhat;
    out.value = (k * k / (s * 4 * pi)) * std::exp(cplx(0, -k * xhat.dot(z0))) * std::pow(cfg.a, 3 - cfg.h)
                * (elec - mag);
    return out;
}

inline ComplexVec3 dominant_scattered_field(const Vec3& x, const DimerConfig& cfg, const PolarizationTensors& pt,
                                            double k, const MaterialContrast& mc, const IncidentWave& wave)
{
    if (!check_regime(cfg).ok) throw RegimeViolation("regime condition 4 - h - 4t > 0 violated");
    detail::check_observation_point(x, cfg);
    const double s = checked_branch(mc.branch);
    const Vec3 z0 = cfg.midpoint();
    IncidentWave w = wave;
    w.k = k;
    const auto [e0, h0] = incident_fields(z0, w);
    const ComplexVec3 elec = mc.eta2 / mc.d0 * (dyadic_green(x, z0, k) * (pt.p022 * e0));
    const ComplexVec3 mag = cplx(0, k) * mc.eta0 / mc.c0 * cross(grad_helmholtz_kernel(x, z0, k), (pt.p011 * h0).eval());
    return s * k * k * std::pow(cfg.a, 3 - cfg.h) * (elec - mag);
}

} // namespace dimer
