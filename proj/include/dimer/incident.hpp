#pragma once

#include "dimer/errors.hpp"
#include "dimer/types.hpp"

#include <cmath>
#include <utility>

namespace dimer {

/// Plane wave E = p e^{ik theta.x}, H = (theta x p) e^{ik theta.x}.
struct IncidentWave {
    Vec3 theta = Vec3::UnitZ();
    Vec3 p = Vec3::UnitX();
    double k = 1.0;

    void validate() const
    {
        if (std::abs(theta.norm() - 1.0) > 1e-12) throw InvalidWave("incidence direction must be a unit vector");
        if (std::abs(p.norm() - 1.0) > 1e-12) throw InvalidWave("polarization must be a unit vector");
        if (std::abs(theta.dot(p)) > 1e-12) throw InvalidWave("polarization must be orthogonal to the direction");
        if (!(k > 0)) throw InvalidWave("wavenumber must be positive");
    }
};

inline std::pair<ComplexVec3, ComplexVec3> incident_fields(const Vec3& x, const IncidentWave& w)
{
    w.validate();
    const double ph = w.k * w.theta.dot(x);
    const cplx e(std::cos(ph), std::sin(ph));
    const Vec3 h = w.theta.cross(w.p);
    return {w.p.cast<cplx>() * e, h.cast<cplx>() * e};
}

} // namespace dimer
