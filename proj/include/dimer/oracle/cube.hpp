#pragma once

// Closed-form integrals of the static kernels over an axis-aligned cube.

#include "dimer/types.hpp"

#include <cmath>

namespace dimer::oracle {

/// Integrals over a cube of side s centered at the origin, seen from offset u:
/// block = matrix of the static magnetization operator applied to a unit field on the cube,
/// potential = integral of 1 / (4 pi |u - y|).
struct CubeIntegrals {
    Mat3 block = Mat3::Zero();
    double potential = 0;
};

namespace detail {

/// log(a + sqrt(a^2 + b^2 + c^2)) without cancellation when a < 0.
inline double log_a_plus_r(double a, double b, double c, double r)
{
    if (a >= 0) return std::log(a + r);
    return std::log(b * b + c * c) - std::log(r - a);
}

} // namespace detail

inline CubeIntegrals cube_integrals(const Vec3& u, double s, bool with_potential = true)
{
    // Jitter keeps the corner terms away from 0/0 on faces and edges.
    const Vec3 jitter = Vec3(1.3e-11, 0.7e-11, 1.1e-11) * s;
    Mat3 t = Mat3::Zero();
    double pot = 0;
    for (int c = 0; c < 8; ++c) {
        const int c0 = c & 1, c1 = (c >> 1) & 1, c2 = (c >> 2) & 1;
        const double sign = ((c0 + c1 + c2) & 1) ? -1.0 : 1.0;
        const Vec3 w = u - Vec3(c0 - 0.5, c1 - 0.5, c2 - 0.5) * s + jitter;
        const double r = w.norm();
        double at[3], lg[3];
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3, k = (i + 2) % 3;
            at[i] = std::atan(w(j) * w(k) / (w(i) * r));
            lg[i] = detail::log_a_plus_r(w(i), w(j), w(k), r);
        }
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3, k = (i + 2) % 3;
            t(i, i) += sign * at[i];
            t(i, j) -= sign * lg[k];
        }
        if (with_potential) {
            const double x = w(0), y = w(1), z = w(2);
            pot += sign * (y * z * lg[0] + x * z * lg[1] + x * y * lg[2] - 0.5 * x * x * at[0] - 0.5 * y * y * at[1]
                           - 0.5 * z * z * at[2]);
        }
    }
    for (int i = 0; i < 3; ++i) t((i + 1) % 3, i) = t(i, (i + 1) % 3);
    CubeIntegrals out;
    out.block = t / (4 * pi);
    out.potential = pot / (4 * pi);
    return out;
}

/// Point-source approximations of the same integrals for a source of volume v at offset u.
inline Mat3 point_block(const Vec3& u, double v)
{
    const double r = u.norm();
    const Vec3 e = u / r;
    return v / (4 * pi * r * r * r) * (Mat3::Identity() - 3.0 * e * e.transpose());
}

inline double point_potential(const Vec3& u, double v) { return v / (4 * pi * u.norm()); }

/// Integral of 1/|y| over the unit cube centered at the origin.
inline constexpr double unit_cube_inverse_distance = 2.3800772573206595;

} // namespace dimer::oracle
