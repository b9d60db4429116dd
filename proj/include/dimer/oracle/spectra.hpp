#pragma once

// Spectral data of the discrete static operators by block Lanczos in the volume-weighted frame.
//
// Ritz pairs of gradM are split by eigenvalue: below zero_threshold the divergence-free cluster,
// above one_threshold the curl-free boundary cluster (discarded), the rest the interior cluster.
// Newtonian eigenvalues come from N restricted to the divergence-free Ritz vectors.

#include "dimer/errors.hpp"
#include "dimer/oracle/cut_cell.hpp"
#include "dimer/oracle/static_ops.hpp"
#include "dimer/tensors.hpp"
#include "dimer/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dimer::oracle {

struct SpectraOptions {
    double zero_threshold = 0.05;
    double one_threshold = 0.95;
    int block_steps = 35;
    double band = 0.01;           ///< half-width of the ambiguity bands around the thresholds
    double ambiguity_tol = 0.05;  ///< allowed band moment mass relative to the interior mass
    double deflation_tol = 1e-8;
};

struct SpectraReport {
    int basis_size = 0;
    int zero_count = 0;
    int interior_count = 0;
    int one_count = 0;
    double zero_moment_ratio = 0; ///< max |int e| on the zero cluster over the interior maximum
    double one_moment_ratio = 0;
    double band_mass_ratio = 0;
    double asymmetry = 0;
};

namespace detail {

class WeightedOperators {
public:
    explicit WeightedOperators(const StaticOperators& ops) : ops_(ops)
    {
        const Eigen::Index m = static_cast<Eigen::Index>(ops.size());
        sw_ = ops.weights.array().sqrt();
        sw3_.resize(3 * m);
        for (Eigen::Index i = 0; i < m; ++i) sw3_.segment<3>(3 * i).setConstant(sw_(i));
    }

    Eigen::Index dim() const { return sw3_.size(); }
    const Eigen::VectorXd& sqrt_weights3() const { return sw3_; }

    /// W^{1/2} gradM W^{-1/2} X
    Eigen::MatrixXd gradm(const Eigen::MatrixXd& x) const
    {
        Eigen::MatrixXf y = (x.array().colwise() / sw3_.array()).matrix().cast<float>();
        Eigen::MatrixXf r = ops_.gradm * y;
        return (r.cast<double>().array().colwise() * sw3_.array()).matrix();
    }

    /// W^{1/2} (N kron I3) W^{-1/2} X
    Eigen::MatrixXd newton(const Eigen::MatrixXd& x) const
    {
        const Eigen::Index m = sw_.size();
        const Eigen::Index b = x.cols();
        Eigen::MatrixXf stacked(3 * b, m);
        for (Eigen::Index c = 0; c < b; ++c)
            for (Eigen::Index o = 0; o < m; ++o)
                for (int a = 0; a < 3; ++a) stacked(3 * c + a, o) = static_cast<float>(x(3 * o + a, c) / sw_(o));
        const Eigen::MatrixXf prod = stacked * ops_.newton.transpose();
        Eigen::MatrixXd out(x.rows(), b);
        for (Eigen::Index c = 0; c < b; ++c)
            for (Eigen::Index o = 0; o < m; ++o)
                for (int a = 0; a < 3; ++a) out(3 * o + a, c) = static_cast<double>(prod(3 * c + a, o)) * sw_(o);
        return out;
    }

private:
    const StaticOperators& ops_;
    Eigen::VectorXd sw_;
    Eigen::VectorXd sw3_;
};

/// Appends the columns of c orthonormalized against basis(:, 0:used) and each other; returns the count added.
inline int append_orthonormal(Eigen::MatrixXd& basis, Eigen::Index& used, Eigen::MatrixXd c, double tol)
{
    const Eigen::VectorXd before = c.colwise().norm();
    for (int pass = 0; pass < 2; ++pass) {
        if (used == 0) break;
        const auto z = basis.leftCols(used);
        c -= z * (z.transpose() * c);
    }
    int added = 0;
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
        Eigen::VectorXd v = c.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index q = used - added; q < used; ++q) v -= basis.col(q).dot(v) * basis.col(q);
        const double nv = v.norm();
        if (!(nv > tol * std::max(before(j), 1e-300)) || used >= basis.cols()) continue;
        basis.col(used++) = v / nv;
        ++added;
    }
    return added;
}

} // namespace detail

/// Block Lanczos with full reorthogonalization and exact Rayleigh-Ritz projection.
inline SpectralData extract_spectra(const StaticOperators& ops, const SpectraOptions& opt = {},
                                    SpectraReport* report = nullptr)
{
    if (!ops.symmetrized) throw InvalidParameter("spectral extraction needs symmetrized operators");
    const detail::WeightedOperators op(ops);
    const Eigen::Index n = op.dim();
    const Eigen::Index m = static_cast<Eigen::Index>(ops.size());
    const Eigen::VectorXd& sw3 = op.sqrt_weights3();

    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, 3);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, 3);
    for (Eigen::Index o = 0; o < m; ++o) {
        const Vec3& x = ops.positions[o];
        for (int a = 0; a < 3; ++a) u(3 * o + a, a) = sw3(3 * o);
        const Mat3 qm = q_matrix(x);
        for (int row = 0; row < 3; ++row)
            for (int a = 0; a < 3; ++a) q(3 * o + a, row) = qm(row, a) * sw3(3 * o);
    }
    const Eigen::MatrixXd nq = op.newton(q);
    const Eigen::MatrixXd nnq = op.newton(nq);
    const Eigen::MatrixXd nnnq = op.newton(nnq);
    const Eigen::MatrixXd nu = op.newton(u);
    Eigen::MatrixXd seeds(n, 18);
    seeds << u, q, nq, nnq, nnnq, nu;

    const Eigen::Index cap = std::min<Eigen::Index>(n, 18 * (opt.block_steps + 1));
    Eigen::MatrixXd basis(n, cap);
    Eigen::MatrixXd image(n, cap);
    Eigen::Index used = 0, done = 0;
    detail::append_orthonormal(basis, used, seeds, opt.deflation_tol);
    for (int step = 0; step < opt.block_steps && done < used; ++step) {
        const Eigen::Index b = used - done;
        image.middleCols(done, b) = op.gradm(basis.middleCols(done, b));
        const Eigen::MatrixXd next = image.middleCols(done, b);
        done = used;
        if (used < cap) detail::append_orthonormal(basis, used, next, opt.deflation_tol);
    }
    if (done < used) {
        image.middleCols(done, used - done) = op.gradm(basis.middleCols(done, used - done));
        done = used;
    }
    const auto z = basis.leftCols(used);
    Eigen::MatrixXd t = z.transpose() * image.leftCols(used);
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd theta = es.eigenvalues();
    const Eigen::MatrixXd v = es.eigenvectors();
    const Eigen::MatrixXd mu = v.transpose() * (z.transpose() * u);
    const Eigen::MatrixXd mq = v.transpose() * (z.transpose() * q);

    SpectraReport rep;
    rep.basis_size = static_cast<int>(used);
    rep.asymmetry = ops.asymmetry_gradm;
    std::vector<Eigen::Index> zero, interior;
    double mu_int_max = 0, mu_zero_max = 0, mu_one_max = 0, mass_int = 0, mass_band = 0;
    for (Eigen::Index r = 0; r < theta.size(); ++r) {
        const double th = theta(r);
        const double mm = mu.row(r).norm();
        const bool in_band = std::abs(th - opt.zero_threshold) < opt.band || std::abs(th - opt.one_threshold) < opt.band;
        if (in_band) mass_band += mu.row(r).squaredNorm() + mq.row(r).squaredNorm();
        if (th < opt.zero_threshold) {
            zero.push_back(r);
            mu_zero_max = std::max(mu_zero_max, mm);
        } else if (th <= opt.one_threshold) {
            interior.push_back(r);
            mu_int_max = std::max(mu_int_max, mm);
            mass_int += mu.row(r).squaredNorm();
        } else {
            ++rep.one_count;
            mu_one_max = std::max(mu_one_max, mm);
        }
    }
    rep.zero_count = static_cast<int>(zero.size());
    rep.interior_count = static_cast<int>(interior.size());
    rep.zero_moment_ratio = mu_int_max > 0 ? mu_zero_max / mu_int_max : 0;
    rep.one_moment_ratio = mu_int_max > 0 ? mu_one_max / mu_int_max : 0;
    rep.band_mass_ratio = mass_int > 0 ? mass_band / mass_int : 0;
    if (report) *report = rep;
    if (interior.empty() || zero.empty()) throw ClusterAmbiguity("spectral clusters are empty");
    if (rep.band_mass_ratio > opt.ambiguity_tol)
        throw ClusterAmbiguity("Ritz values with significant moments fall inside the cluster-gap bands");

    SpectralData out;
    for (Eigen::Index r : interior) out.lambda3.push_back({theta(r), mu.row(r).transpose()});

    Eigen::MatrixXd vz(v.rows(), static_cast<Eigen::Index>(zero.size()));
    for (std::size_t c = 0; c < zero.size(); ++c) vz.col(static_cast<Eigen::Index>(c)) = v.col(zero[c]);
    const Eigen::MatrixXd ez = z * vz;
    Eigen::MatrixXd nr = ez.transpose() * op.newton(ez);
    nr = 0.5 * (nr + nr.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ns(nr);
    const Eigen::MatrixXd phi = -(ns.eigenvectors().transpose() * (ez.transpose() * q));
    for (Eigen::Index r = ns.eigenvalues().size() - 1; r >= 0; --r)
        out.lambda1.push_back({ns.eigenvalues()(r), phi.row(r).transpose()});
    return out;
}

/// Grid, dense operators and spectral data for one shape at resolution n.
inline SpectralData extract_spectra(const Shape& shape, int n, const SpectraOptions& opt = {},
                                    SpectraReport* report = nullptr)
{
    const CutCellGrid g = build_cut_cell_grid(shape, n);
    const StaticOperators ops = assemble_static(g);
    SpectralData s = extract_spectra(ops, opt, report);
    s.shape = shape.describe();
    return s;
}

} // namespace dimer::oracle
