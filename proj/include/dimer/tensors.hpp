#pragma once

// Polarization tensors: unit-ball closed forms and definitional sums over spectral data.

#include "dimer/errors.hpp"
#include "dimer/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace dimer {

struct PolarizationTensors {
    Dyadic3 p011 = Dyadic3::Zero();
    Dyadic3 p012 = Dyadic3::Zero();
    Dyadic3 p021 = Dyadic3::Zero();
    Dyadic3 p022 = Dyadic3::Zero();
};

struct SpectralMode {
    double lambda = 0;
    Vec3 moment = Vec3::Zero();
};

/// lambda1: Newtonian eigenvalues on the divergence-free subspace with phi-moments.
/// lambda3: magnetization eigenvalues on gradients of harmonic fields with moments of e_n.
struct SpectralData {
    std::vector<SpectralMode> lambda1;
    std::vector<SpectralMode> lambda3;
    std::string shape;
};

inline Dyadic3 ball_p011() { return Dyadic3::Identity() * (12.0 / (pi * pi * pi)); }
inline Dyadic3 ball_p012() { return Dyadic3::Identity() * (4.0 * pi); }
inline Dyadic3 ball_p022() { return Dyadic3::Identity() * (4.0 * pi / 27.0); }
/// Sum over the divergence-free modes of the unit ball.
inline Dyadic3 ball_p021() { return Dyadic3::Identity() * (2.0 * pi / 15.0); }

inline PolarizationTensors ball_tensors() { return {ball_p011(), ball_p012(), ball_p021(), ball_p022()}; }

/// Ball eigenvalues of the selected modes: first Newtonian eigenvalue and the constant-field one.
inline constexpr double ball_lambda_n0 = 1.0 / (pi * pi);
inline constexpr double ball_lambda_nstar = 1.0 / 3.0;

/// Rows satisfy -curl(row_i) = e_i.
inline Mat3 q_matrix(const Vec3& x)
{
    Mat3 q;
    q << 0, x(2), 0,
         0, 0, x(0),
         x(1), 0, 0;
    return q;
}

struct TensorOptions {
    int n0 = -1;                      ///< -1 selects the largest moment
    int nstar = -1;                   ///< -1 selects the largest moment
    double cluster_rel_tol = 0.02;    ///< modes within this relative eigenvalue gap are combined
    double zero_moment_tol = 1e-12;   ///< relative to the largest moment norm
    double truncation_tol = 1e-4;
    int truncation_window = 10;
};

struct TensorReport {
    int n0 = -1;
    int nstar = -1;
    int n0_cluster = 0;
    int nstar_cluster = 0;
    double tail_p012 = 0;
    double tail_p021 = 0;
    std::vector<std::string> warnings;
};

namespace detail {

inline Mat3 outer(const Vec3& m) { return m * m.transpose(); }

inline int select_mode(const std::vector<SpectralMode>& modes, int requested, double zero_tol, const char* what)
{
    if (modes.empty()) throw ZeroMoment(std::string("no modes available for ") + what);
    double mmax = 0;
    int best = 0;
    for (int i = 0; i < static_cast<int>(modes.size()); ++i) {
        const double n = modes[i].moment.norm();
        if (n > mmax) {
            mmax = n;
            best = i;
        }
    }
    const int sel = requested < 0 ? best : requested;
    if (sel >= static_cast<int>(modes.size())) throw InvalidParameter(std::string("mode index out of range for ") + what);
    if (!(modes[sel].moment.norm() > zero_tol * std::max(1.0, mmax)))
        throw ZeroMoment(std::string("selected mode has vanishing moment for ") + what);
    return sel;
}

inline Mat3 cluster_sum(const std::vector<SpectralMode>& modes, int sel, double rel_tol, int& count)
{
    Mat3 acc = Mat3::Zero();
    count = 0;
    const double l0 = modes[sel].lambda;
    for (const auto& m : modes) {
        if (std::abs(m.lambda - l0) <= rel_tol * std::abs(l0)) {
            acc += outer(m.moment);
            ++count;
        }
    }
    return acc;
}

/// Weighted sum of outer products, truncated once the last `window` terms add less than tol of the total.
inline Mat3 truncated_sum(std::vector<std::pair<double, Vec3>> terms, double tol, int window, double& tail)
{
    std::vector<double> mass(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) mass[i] = std::abs(terms[i].first) * terms[i].second.squaredNorm();
    std::vector<std::size_t> order(terms.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (mass[a] != mass[b]) return mass[a] > mass[b];
        return terms[a].second.norm() > terms[b].second.norm();
    });
    Mat3 acc = Mat3::Zero();
    double total = 0;
    std::size_t used = 0;
    std::vector<double> recent;
    for (; used < order.size(); ++used) {
        const auto& t = terms[order[used]];
        acc += t.first * outer(t.second);
        total += mass[order[used]];
        recent.push_back(mass[order[used]]);
        if (static_cast<int>(recent.size()) >= window) {
            double last = 0;
            for (std::size_t j = recent.size() - window; j < recent.size(); ++j) last += recent[j];
            if (last < tol * total) {
                ++used;
                break;
            }
        }
    }
    tail = 0;
    for (std::size_t i = used; i < order.size(); ++i) tail += mass[order[i]];
    return acc;
}

} // namespace detail

inline PolarizationTensors tensors_from_spectra(const SpectralData& s1, const SpectralData& s2,
                                                const TensorOptions& opt = {}, TensorReport* report = nullptr)
{
    TensorReport rep;
    PolarizationTensors pt;

    rep.n0 = detail::select_mode(s1.lambda1, opt.n0, opt.zero_moment_tol, "p011");
    pt.p011 = detail::cluster_sum(s1.lambda1, rep.n0, opt.cluster_rel_tol, rep.n0_cluster).cast<cplx>();

    rep.nstar = detail::select_mode(s2.lambda3, opt.nstar, opt.zero_moment_tol, "p022");
    pt.p022 = detail::cluster_sum(s2.lambda3, rep.nstar, opt.cluster_rel_tol, rep.nstar_cluster).cast<cplx>();

    std::vector<std::pair<double, Vec3>> t12;
    for (const auto& m : s1.lambda3) {
        if (!(m.lambda > 0)) throw InvalidParameter("magnetization eigenvalue must be positive");
        t12.emplace_back(1.0 / m.lambda, m.moment);
    }
    pt.p012 = detail::truncated_sum(t12, opt.truncation_tol, opt.truncation_window, rep.tail_p012).cast<cplx>();

    std::vector<std::pair<double, Vec3>> t21;
    for (const auto& m : s2.lambda1) t21.emplace_back(1.0, m.moment);
    pt.p021 = detail::truncated_sum(t21, opt.truncation_tol, opt.truncation_window, rep.tail_p021).cast<cplx>();

    if (rep.tail_p012 > 0)
        rep.warnings.push_back("TruncationWarning: p012 tail mass " + std::to_string(rep.tail_p012));
    if (rep.tail_p021 > 0)
        rep.warnings.push_back("TruncationWarning: p021 tail mass " + std::to_string(rep.tail_p021));
    if (report) *report = rep;
    return pt;
}

} // namespace dimer
