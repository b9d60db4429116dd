#pragma once

// Discrete static magnetization (gradM) and Newtonian (N) operators on a cut-cell grid.
// Entry (i, j) integrates the kernel over the region merged into owner j, seen from the
// collocation point of owner i. gradM is dimensionless; N is returned in shape units.

#include "dimer/oracle/cube.hpp"
#include "dimer/oracle/cut_cell.hpp"
#include "dimer/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace dimer::oracle {

/// Exact unit-cube integrals for every lattice offset of a grid.
class CubeTable {
public:
    explicit CubeTable(const Index3& dims)
    {
        for (int d = 0; d < 3; ++d) {
            ext_[d] = dims[d];
            span_[d] = 2 * dims[d] + 1;
        }
        const std::size_t total = static_cast<std::size_t>(span_[0]) * span_[1] * span_[2];
        block_.resize(total);
        pot_.resize(total);
        for (int i = -ext_[0]; i <= ext_[0]; ++i)
            for (int j = -ext_[1]; j <= ext_[1]; ++j)
                for (int k = -ext_[2]; k <= ext_[2]; ++k) {
                    const CubeIntegrals c = cube_integrals(Vec3(i, j, k), 1.0);
                    const std::size_t id = index(i, j, k);
                    block_[id] = c.block;
                    pot_[id] = c.potential;
                }
    }

    const Mat3& block(int i, int j, int k) const { return block_[index(i, j, k)]; }
    double potential(int i, int j, int k) const { return pot_[index(i, j, k)]; }

private:
    std::size_t index(int i, int j, int k) const
    {
        return (static_cast<std::size_t>(i + ext_[0]) * span_[1] + (j + ext_[1])) * span_[2] + (k + ext_[2]);
    }
    int ext_[3]{};
    int span_[3]{};
    std::vector<Mat3> block_;
    std::vector<double> pot_;
};

/// Calls sink(target, source_owner, block, potential) for every (target owner, cell part) pair.
/// With averaged targets each owner row is the volume-weighted mean over the kept centroids of its
/// parts; otherwise it is collocated at the owner's lattice center.
/// Potentials are in lattice units (multiply by h^2 for shape units).
template <class Sink>
void visit_static_entries(const CutCellGrid& g, Sink&& sink, bool with_potential = true, bool averaged = true)
{
    const CubeTable table(g.dims);
    struct Target {
        std::size_t owner;
        Vec3 xi;
        double weight;
        bool center;
        Index3 l;
    };
    std::vector<Target> targets;
    const double cell = g.h * g.h * g.h;
    if (averaged) {
        for (const auto& p : g.parts)
            targets.push_back({static_cast<std::size_t>(p.owner), p.kept_centroid,
                               p.kept * cell / g.owner_volume[p.owner], p.tree < 0, p.lattice});
    } else {
        for (std::size_t i = 0; i < g.size(); ++i)
            targets.push_back({i, g.lattice_point(g.owner_lattice[i]), 1.0, true, g.owner_lattice[i]});
    }
    for (const auto& p : g.parts) {
        const Vec3 xp = g.lattice_point(p.lattice);
        for (const auto& t : targets) {
            Mat3 blk;
            double pot = 0;
            if (t.center) {
                const int di = t.l[0] - p.lattice[0], dj = t.l[1] - p.lattice[1], dk = t.l[2] - p.lattice[2];
                blk = table.block(di, dj, dk);
                if (with_potential) pot = table.potential(di, dj, dk);
            } else {
                const CubeIntegrals ci = cube_integrals(t.xi - xp, 1.0, with_potential);
                blk = ci.block;
                pot = ci.potential;
            }
            if (p.tree >= 0) {
                Mat3 rb = Mat3::Zero();
                double rp = 0;
                removed_integrals(g.trees[p.tree], t.xi, g.options.theta, rb, rp, with_potential);
                blk -= rb;
                pot -= rp;
            }
            sink(t.owner, static_cast<std::size_t>(p.owner), (t.weight * blk).eval(), t.weight * pot);
        }
    }
}

/// gradM applied to the constant field e_j, for j = 0..2, at every owner (column j of each 3x3).
inline std::vector<Mat3> apply_to_constant(const CutCellGrid& g, bool averaged = true)
{
    std::vector<Mat3> out(g.size(), Mat3::Zero());
    visit_static_entries(
        g, [&](std::size_t i, std::size_t, const Mat3& b, double) { out[i] += b; }, false, averaged);
    return out;
}

struct StaticOperators {
    Eigen::MatrixXf gradm;          ///< 3M x 3M, index 3*owner + component
    Eigen::MatrixXf newton;         ///< M x M, shape units
    Eigen::VectorXd weights;        ///< owner volumes, shape units
    std::vector<Vec3> positions;    ///< owner centroids, shape units
    double asymmetry_gradm = 0;     ///< relative weighted asymmetry before symmetrization
    double asymmetry_newton = 0;
    bool symmetrized = false;

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

namespace detail {

/// Replaces A by (A + W^{-1} A^T W) / 2 in place and returns max|S - S^T| / max|S| of S = W^{1/2} A W^{-1/2}.
inline double symmetrize_weighted(Eigen::MatrixXf& a, const Eigen::VectorXd& w)
{
    const Eigen::Index n = a.rows();
    double amax = 0, dmax = 0;
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r <= c; ++r) {
            const double sr = std::sqrt(w(r)), sc = std::sqrt(w(c));
            const double s_rc = sr * a(r, c) / sc;
            const double s_cr = sc * a(c, r) / sr;
            amax = std::max({amax, std::abs(s_rc), std::abs(s_cr)});
            dmax = std::max(dmax, std::abs(s_rc - s_cr));
            const double avg = 0.5 * (s_rc + s_cr);
            a(r, c) = static_cast<float>(avg * sc / sr);
            a(c, r) = static_cast<float>(avg * sr / sc);
        }
    }
    return amax > 0 ? dmax / amax : 0.0;
}

} // namespace detail

/// Dense assembly; with symmetrize the operators become self-adjoint in the volume-weighted inner product.
inline StaticOperators assemble_static(const CutCellGrid& g, bool symmetrize = true, bool averaged = true)
{
    const Eigen::Index m = static_cast<Eigen::Index>(g.size());
    StaticOperators ops;
    ops.gradm = Eigen::MatrixXf::Zero(3 * m, 3 * m);
    ops.newton = Eigen::MatrixXf::Zero(m, m);
    ops.weights = Eigen::Map<const Eigen::VectorXd>(g.owner_volume.data(), m);
    ops.positions = g.owner_centroid;
    const float h2 = static_cast<float>(g.h * g.h);
    visit_static_entries(g, [&](std::size_t i, std::size_t j, const Mat3& b, double p) {
        ops.gradm.block<3, 3>(3 * i, 3 * j) += b.cast<float>();
        ops.newton(i, j) += static_cast<float>(p) * h2;
    }, true, averaged);
    if (symmetrize) {
        Eigen::VectorXd w3(3 * m);
        for (Eigen::Index i = 0; i < m; ++i) w3.segment<3>(3 * i).setConstant(ops.weights(i));
        ops.asymmetry_gradm = detail::symmetrize_weighted(ops.gradm, w3);
        ops.asymmetry_newton = detail::symmetrize_weighted(ops.newton, ops.weights);
        ops.symmetrized = true;
    }
    return ops;
}

} // namespace dimer::oracle
