#pragma once

#include "dimer/types.hpp"

#include <random>

namespace dimer::test {

inline std::mt19937_64& rng()
{
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Vec3 random_vec(double lo, double hi) { return Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)); }

inline Vec3 random_unit()
{
    Vec3 v;
    do v = random_vec(-1, 1);
    while (v.norm() < 0.1 || v.norm() > 1);
    return v.normalized();
}

/// Unit vector orthogonal to u.
inline Vec3 orthogonal_unit(const Vec3& u)
{
    Vec3 v = random_unit();
    v -= u.dot(v) * u;
    return v.normalized();
}

inline double rel(const ComplexVec3& a, const ComplexVec3& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }
inline double rel(const Dyadic3& a, const Dyadic3& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

} // namespace dimer::test
