#pragma once

#include <Eigen/Dense>

#include <complex>

namespace dimer {

using cplx = std::complex<double>;

template <class T>
using vec3_t = Eigen::Matrix<T, 3, 1>;
template <class T>
using cvec3_t = Eigen::Matrix<std::complex<T>, 3, 1>;
template <class T>
using cmat3_t = Eigen::Matrix<std::complex<T>, 3, 3>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using ComplexVec3 = Eigen::Vector3cd;
using Dyadic3 = Eigen::Matrix3cd;

inline constexpr double pi = 3.14159265358979323846;

/// Matrix of the map v -> g x v.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> skew(const Eigen::MatrixBase<Derived>& g)
{
    Eigen::Matrix<typename Derived::Scalar, 3, 3> s;
    using S = typename Derived::Scalar;
    s << S(0), -g(2), g(1),
         g(2), S(0), -g(0),
         -g(1), g(0), S(0);
    return s;
}

/// Bilinear cross product; Eigen's cross conjugates complex results.
template <class A, class B>
auto cross(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b)
{
    using S = decltype(a(0) * b(0));
    return Eigen::Matrix<S, 3, 1>(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0));
}

inline bool all_finite(const ComplexVec3& v)
{
    return v.array().real().allFinite() && v.array().imag().allFinite();
}

inline bool all_finite(const Dyadic3& m)
{
    return m.array().real().allFinite() && m.array().imag().allFinite();
}

} // namespace dimer
