#pragma once

// Helmholtz fundamental solution and its derivatives.
// Gradients are taken with respect to the second argument y.

#include "dimer/errors.hpp"
#include "dimer/types.hpp"

#include <cmath>
#include <complex>

namespace dimer {

inline constexpr double default_eps_sep = 1e-9;

namespace detail {

template <class T>
T checked_distance(const vec3_t<T>& x, const vec3_t<T>& y, T eps_sep)
{
    const T r = (x - y).norm();
    if (!(r >= eps_sep)) throw SingularEvaluation("kernel evaluated at separation below eps_sep");
    return r;
}

template <class T>
std::complex<T> phi_of_r(T r, T k)
{
    using std::cos;
    using std::sin;
    const T four_pi = T(4) * T(pi);
    return std::complex<T>(cos(k * r), sin(k * r)) / (four_pi * r);
}

} // namespace detail

/// e^{ik|x-y|} / (4 pi |x-y|)
template <class T>
std::complex<T> helmholtz_kernel(const vec3_t<T>& x, const vec3_t<T>& y, T k, T eps_sep = T(default_eps_sep))
{
    return detail::phi_of_r(detail::checked_distance(x, y, eps_sep), k);
}

/// grad_y Phi_k(x, y); the x-gradient is its negation.
template <class T>
cvec3_t<T> grad_helmholtz_kernel(const vec3_t<T>& x, const vec3_t<T>& y, T k, T eps_sep = T(default_eps_sep))
{
    const T r = detail::checked_distance(x, y, eps_sep);
    const std::complex<T> phi = detail::phi_of_r(r, k);
    const std::complex<T> c = phi * std::complex<T>(T(1) / r, -k);
    const vec3_t<T> rhat = (x - y) / r;
    return rhat.template cast<std::complex<T>>() * c;
}

/// Matrix of second derivatives of Phi_k (same in x and in y).
template <class T>
cmat3_t<T> hessian_helmholtz_kernel(const vec3_t<T>& x, const vec3_t<T>& y, T k, T eps_sep = T(default_eps_sep))
{
    const T r = detail::checked_distance(x, y, eps_sep);
    const std::complex<T> phi = detail::phi_of_r(r, k);
    const vec3_t<T> rhat = (x - y) / r;
    const T ir = T(1) / r;
    const std::complex<T> a = phi * std::complex<T>(T(3) * ir * ir - k * k, T(-3) * k * ir);
    const std::complex<T> b = phi * std::complex<T>(-ir * ir, k * ir);
    cmat3_t<T> h;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) h(i, j) = a * (rhat(i) * rhat(j)) + (i == j ? b : std::complex<T>(0));
    return h;
}

/// Upsilon_k = Hess(Phi_k) / k^2 + Phi_k I.
template <class T>
cmat3_t<T> dyadic_green(const vec3_t<T>& x, const vec3_t<T>& y, T k, T eps_sep = T(default_eps_sep))
{
    if (k == T(0)) throw ZeroWavenumber("dyadic Green kernel requires k > 0");
    cmat3_t<T> g = hessian_helmholtz_kernel(x, y, k, eps_sep) / (k * k);
    const std::complex<T> phi = helmholtz_kernel(x, y, k, eps_sep);
    for (int i = 0; i < 3; ++i) g(i, i) += phi;
    return g;
}

inline cplx helmholtz_kernel(const Vec3& x, const Vec3& y, double k) { return helmholtz_kernel<double>(x, y, k); }
inline ComplexVec3 grad_helmholtz_kernel(const Vec3& x, const Vec3& y, double k)
{
    return grad_helmholtz_kernel<double>(x, y, k);
}
inline Dyadic3 hessian_helmholtz_kernel(const Vec3& x, const Vec3& y, double k)
{
    return hessian_helmholtz_kernel<double>(x, y, k);
}
inline Dyadic3 dyadic_green(const Vec3& x, const Vec3& y, double k) { return dyadic_green<double>(x, y, k); }

} // namespace dimer
