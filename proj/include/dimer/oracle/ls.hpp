#pragma once

// Voxelized Lippmann-Schwinger reference solver for the dimer:
//     E + gradM^k(eta E) - k^2 N^k(eta E) = E^inc   on D1 u D2.
//
// Each particle carries the cut-cell discretization of its reference shape. The self block of a
// particle is the static gradM matrix plus the k-dependent remainder
//     W_k = -grad grad (Phi_k - Phi_0) - k^2 Phi_k I,
// whose weak singularity is integrated analytically on the self cell and by Gauss rules on
// neighbouring cells. Blocks between particles use the full kernel at region centroids.
//
// The system is solved by restarted GMRES in double precision, right-preconditioned by complex
// float LU factors of the per-particle self blocks. Matrix-vector products use the exact blocks.

#include <complex>
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "dimer/errors.hpp"
#include "dimer/foldy_lax.hpp"
#include "dimer/incident.hpp"
#include "dimer/oracle/cube.hpp"
#include "dimer/oracle/cut_cell.hpp"
#include "dimer/oracle/static_ops.hpp"
#include "dimer/shape.hpp"
#include "dimer/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

namespace dimer::oracle {

/// Cells of all particles in physical coordinates, particle by particle.
struct VoxelGrid {
    int n = 0;
    std::vector<Vec3> centers;     ///< region centroids
    std::vector<double> volumes;
    std::vector<int> tag;          ///< particle number, 1-based
    std::vector<Index3> lattice;   ///< owner lattice index within the particle grid

    struct Particle {
        std::shared_ptr<const CutCellGrid> grid;
        std::string shape;
        Vec3 center = Vec3::Zero();
        double scale = 1;
        std::size_t offset = 0;
        std::size_t count = 0;
        double volume_error = 0;
        double cell_size() const { return scale * grid->h; }
    };
    std::vector<Particle> particles;

    std::size_t size() const { return centers.size(); }
    double total_volume() const
    {
        double v = 0;
        for (double x : volumes) v += x;
        return v;
    }
};

namespace detail {

inline void append_particle(VoxelGrid& g, std::shared_ptr<const CutCellGrid> cg, const std::string& shape,
                            const Vec3& z, double a)
{
    VoxelGrid::Particle p;
    p.grid = cg;
    p.shape = shape;
    p.center = z;
    p.scale = a;
    p.offset = g.size();
    p.count = cg->size();
    p.volume_error = cg->volume_error();
    const double a3 = a * a * a;
    const int tag = static_cast<int>(g.particles.size()) + 1;
    for (std::size_t i = 0; i < cg->size(); ++i) {
        g.centers.push_back(z + a * cg->owner_centroid[i]);
        g.volumes.push_back(a3 * cg->owner_volume[i]);
        g.tag.push_back(tag);
        g.lattice.push_back(cg->owner_lattice[i]);
    }
    g.particles.push_back(p);
}

} // namespace detail

/// Single particle z + a B, mainly for tests.
inline VoxelGrid voxelize_single(const Shape& shape, const Vec3& z, double a, int n, const CutCellOptions& opt = {})
{
    if (!(a > 0)) throw InvalidScale("scale must be positive");
    VoxelGrid g;
    g.n = n;
    detail::append_particle(g, std::make_shared<const CutCellGrid>(build_cut_cell_grid(shape, n, opt)),
                            shape.describe(), z, a);
    return g;
}

/// Both particles of a dimer at n cells per axis across each particle's bounding box.
inline VoxelGrid voxelize(const DimerConfig& cfg, int n, const CutCellOptions& opt = {})
{
    cfg.validate();
    VoxelGrid g;
    g.n = n;
    auto g1 = std::make_shared<const CutCellGrid>(build_cut_cell_grid(cfg.shape1, n, opt));
    auto g2 = cfg.shape2.describe() == cfg.shape1.describe()
                  ? g1
                  : std::make_shared<const CutCellGrid>(build_cut_cell_grid(cfg.shape2, n, opt));
    detail::append_particle(g, g1, cfg.shape1.describe(), cfg.z1, cfg.a);
    detail::append_particle(g, g2, cfg.shape2.describe(), cfg.z2, cfg.a);
    return g;
}

namespace detail {

/// Coefficients of K(r) v = -alpha rhat (rhat . v) - beta v for the full kernel
/// -grad grad Phi_k - k^2 Phi_k I, or for the remainder after removing the static part.
inline void kernel_coefficients(double r, double k, bool remainder, cplx& alpha, cplx& beta)
{
    const double inv = 1.0 / r;
    const double inv2 = inv * inv;
    const cplx ik(0, k);
    const cplx phi = std::exp(ik * r) * (inv / (4 * pi));
    const double phi0 = inv / (4 * pi);
    cplx al = phi * (3 * inv2 - 3.0 * ik * inv - k * k);
    cplx be = phi * (ik * inv - inv2);
    if (remainder) {
        al -= 3 * phi0 * inv2;
        be += phi0 * inv2;
    }
    alpha = -al;
    beta = -(be + k * k * phi);
}

inline Dyadic3 kernel_matrix(const Vec3& d, double k, bool remainder)
{
    const double r = d.norm();
    const Vec3 e = d / r;
    cplx al, be;
    kernel_coefficients(r, k, remainder, al, be);
    return al * (e * e.transpose()).cast<cplx>() + be * Dyadic3::Identity();
}

/// Remainder kernel integrated over the cube of side s centered at the target.
inline Dyadic3 remainder_self_cube(double s, double k)
{
    const double j1 = unit_cube_inverse_distance * s * s;
    const cplx v = (-(2.0 / 3.0) * k * k * j1 - cplx(0, (2.0 / 3.0) * k * k * k * s * s * s)) / (4 * pi);
    return v * Dyadic3::Identity();
}

/// Remainder kernel integrated over the cube of side s centered at c, by a 4-point Gauss rule per axis.
inline Dyadic3 remainder_cube_gauss(const Vec3& x, const Vec3& c, double s, double k)
{
    static constexpr double node[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                       0.8611363115940526};
    static constexpr double weight[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                         0.3478548451374538};
    Dyadic3 acc = Dyadic3::Zero();
    const double hs = 0.5 * s;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int l = 0; l < 4; ++l) {
                const Vec3 y = c + hs * Vec3(node[i], node[j], node[l]);
                acc += (weight[i] * weight[j] * weight[l]) * kernel_matrix(x - y, k, true);
            }
    return acc * (hs * hs * hs);
}

struct NearEntry {
    std::size_t source;
    Dyadic3 value;
};

} // namespace detail

struct LSOptions {
    double tolerance = 1e-8;
    int restart = 60;
    int max_iterations = 600;
    int near_range = 2;  ///< lattice offsets treated by quadrature in the remainder kernel
};

struct LSReport {
    int iterations = 0;
    double residual = 0;          ///< ||E^inc - L E|| / ||E^inc||
    double condition_estimate = 0; ///< largest 1-norm condition estimate of the self blocks
};

/// Matrix-free discrete Lippmann-Schwinger operator with per-cell contrast eta_p of particle p.
class LSOperator {
public:
    LSOperator(const VoxelGrid& grid, double k, std::vector<cplx> eta, const LSOptions& opt = {})
        : grid_(grid), k_(k), eta_(std::move(eta)), opt_(opt)
    {
        if (!(k >= 0)) throw InvalidParameter("wavenumber must be non-negative");
        if (eta_.size() != grid.particles.size()) throw InvalidParameter("one contrast per particle is required");
        for (std::size_t p = 0; p < grid.particles.size(); ++p) {
            std::shared_ptr<const StaticOperators> st;
            for (std::size_t q = 0; q < p; ++q)
                if (grid.particles[q].grid == grid.particles[p].grid) st = statics_[q];
            if (!st) st = std::make_shared<const StaticOperators>(assemble_static(*grid.particles[p].grid));
            statics_.push_back(st);
            near_.push_back(build_near(p));
        }
    }

    std::size_t dim() const { return 3 * grid_.size(); }
    double k() const { return k_; }
    const std::vector<cplx>& contrasts() const { return eta_; }
    const VoxelGrid& grid() const { return grid_; }

    cplx eta_of_cell(std::size_t i) const { return eta_[static_cast<std::size_t>(grid_.tag[i] - 1)]; }

    /// y = x + K (eta x) with the exact blocks.
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const
    {
        Eigen::VectorXcd u(x.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) u.segment<3>(3 * i) = eta_of_cell(i) * x.segment<3>(3 * i);
        Eigen::VectorXcd y = x;
        for (std::size_t p = 0; p < grid_.particles.size(); ++p) {
            const auto& part = grid_.particles[p];
            const Eigen::Index o = static_cast<Eigen::Index>(3 * part.offset);
            const Eigen::Index m3 = static_cast<Eigen::Index>(3 * part.count);
            y.segment(o, m3) += static_times(p, u.segment(o, m3));
        }
        accumulate_kernel(u, y);
        return y;
    }

    /// Dense matrix of the operator; intended for small grids.
    Eigen::MatrixXcd dense() const
    {
        const Eigen::Index n = static_cast<Eigen::Index>(dim());
        Eigen::MatrixXcd out(n, n);
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            e(j) = 1;
            out.col(j) = apply(e);
            e(j) = 0;
        }
        return out;
    }

    /// Factors the per-particle self blocks in complex float.
    void factor()
    {
        lu_.clear();
        pivots_.clear();
        rcond_.clear();
        for (std::size_t p = 0; p < grid_.particles.size(); ++p) {
            const auto& part = grid_.particles[p];
            const Eigen::Index m = static_cast<Eigen::Index>(part.count);
            const std::size_t off = part.offset;
            const cplx eta = eta_[p];
            const auto& gm = statics_[p]->gradm;
            Eigen::MatrixXcf s(3 * m, 3 * m);
            for (Eigen::Index j = 0; j < 3 * m; ++j)
                for (Eigen::Index i = 0; i < 3 * m; ++i) s(i, j) = std::complex<float>(eta * static_cast<double>(gm(i, j)));
            // Remainder: centroid rule everywhere, then near corrections.
            for (Eigen::Index j = 0; j < m; ++j) {
                const Vec3& y = grid_.centers[off + j];
                const double v = grid_.volumes[off + j];
                for (Eigen::Index i = 0; i < m; ++i) {
                    if (i == j) continue;
                    const Dyadic3 kb = eta * v * detail::kernel_matrix(grid_.centers[off + i] - y, k_, true);
                    s.block<3, 3>(3 * i, 3 * j) += kb.cast<std::complex<float>>();
                }
            }
            for (Eigen::Index i = 0; i < m; ++i)
                for (const auto& ne : near_[p][i])
                    s.block<3, 3>(3 * i, 3 * ne.source) += (eta * ne.value).cast<std::complex<float>>();
            s.diagonal().array() += std::complex<float>(1, 0);

            const float anorm = LAPACKE_clange(LAPACK_COL_MAJOR, '1', 3 * m, 3 * m, s.data(), 3 * m);
            std::vector<lapack_int> ipiv(static_cast<std::size_t>(3 * m));
            const lapack_int info = LAPACKE_cgetrf(LAPACK_COL_MAJOR, 3 * m, 3 * m, s.data(), 3 * m, ipiv.data());
            if (info > 0)
                throw SingularSystem("exactly singular self block in the oracle system",
                                     std::numeric_limits<double>::infinity());
            float rc = 0;
            LAPACKE_cgecon(LAPACK_COL_MAJOR, '1', 3 * m, s.data(), 3 * m, anorm, &rc);
            rcond_.push_back(rc);
            lu_.push_back(std::move(s));
            pivots_.push_back(std::move(ipiv));
        }
    }

    bool factored() const { return !lu_.empty(); }

    double condition_estimate() const
    {
        double c = 0;
        for (float r : rcond_) c = std::max(c, r > 0 ? 1.0 / r : std::numeric_limits<double>::infinity());
        return c;
    }

    /// Block-diagonal inverse by the float factors.
    Eigen::VectorXcd precondition(const Eigen::VectorXcd& x) const
    {
        Eigen::VectorXcd out(x.size());
        for (std::size_t p = 0; p < grid_.particles.size(); ++p) {
            const auto& part = grid_.particles[p];
            const Eigen::Index o = static_cast<Eigen::Index>(3 * part.offset);
            const Eigen::Index m3 = static_cast<Eigen::Index>(3 * part.count);
            Eigen::VectorXcf b = x.segment(o, m3).cast<std::complex<float>>();
            LAPACKE_cgetrs(LAPACK_COL_MAJOR, 'N', m3, 1, lu_[p].data(), m3, pivots_[p].data(), b.data(), m3);
            out.segment(o, m3) = b.cast<cplx>();
        }
        return out;
    }

private:
    Eigen::VectorXcd static_times(std::size_t p, const Eigen::VectorXcd& u) const
    {
        const auto& gm = statics_[p]->gradm;
        // Stored in float, multiplied in double by column panels.
        constexpr Eigen::Index panel = 256;
        Eigen::MatrixXd ri(u.size(), 2);
        ri.col(0) = u.real();
        ri.col(1) = u.imag();
        Eigen::MatrixXd pr = Eigen::MatrixXd::Zero(u.size(), 2);
        Eigen::MatrixXd buf;
        for (Eigen::Index c = 0; c < gm.cols(); c += panel) {
            const Eigen::Index w = std::min(panel, gm.cols() - c);
            buf = gm.middleCols(c, w).cast<double>();
            pr.noalias() += buf * ri.middleRows(c, w);
        }
        Eigen::VectorXcd out(u.size());
        out.real() = pr.col(0);
        out.imag() = pr.col(1);
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(near_[p].size()); ++i)
            for (const auto& ne : near_[p][i]) out.segment<3>(3 * i) += ne.value * u.segment<3>(3 * ne.source);
        return out;
    }

    /// y += sum over pairs i != j of K(x_i - y_j) vol_j u_j, remainder kernel within a particle.
    void accumulate_kernel(const Eigen::VectorXcd& u, Eigen::VectorXcd& y) const
    {
        const std::size_t n = grid_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3& xi = grid_.centers[i];
            const int ti = grid_.tag[i];
            ComplexVec3 acc = ComplexVec3::Zero();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const Vec3 d = xi - grid_.centers[j];
                const double r = d.norm();
                cplx al, be;
                detail::kernel_coefficients(r, k_, grid_.tag[j] == ti, al, be);
                const ComplexVec3 uj = grid_.volumes[j] * u.segment<3>(3 * j);
                const Vec3 e = d / r;
                const cplx proj = e(0) * uj(0) + e(1) * uj(1) + e(2) * uj(2);
                acc += (al * proj) * e.cast<cplx>() + be * uj;
            }
            y.segment<3>(3 * i) += acc;
        }
    }

    /// Near corrections of the remainder kernel: quadrature minus the centroid rule.
    std::vector<std::vector<detail::NearEntry>> build_near(std::size_t p) const
    {
        const auto& part = grid_.particles[p];
        const auto& cg = *part.grid;
        const double s = part.cell_size();
        const double cell = s * s * s;
        const std::size_t off = part.offset;
        std::vector<std::vector<detail::NearEntry>> out(part.count);
        for (std::size_t i = 0; i < part.count; ++i) {
            const Index3& li = cg.owner_lattice[i];
            const Vec3& xi = grid_.centers[off + i];
            for (std::size_t j = 0; j < part.count; ++j) {
                const Index3& lj = cg.owner_lattice[j];
                const int dist = std::max({std::abs(li[0] - lj[0]), std::abs(li[1] - lj[1]), std::abs(li[2] - lj[2])});
                if (dist > opt_.near_range) continue;
                const double fill = grid_.volumes[off + j] / cell;
                Dyadic3 v;
                if (i == j) {
                    v = fill * detail::remainder_self_cube(s, k_);
                } else {
                    const Vec3 c = part.center + part.scale * cg.to_shape(cg.lattice_point(lj));
                    v = fill * detail::remainder_cube_gauss(xi, c, s, k_)
                        - grid_.volumes[off + j] * detail::kernel_matrix(xi - grid_.centers[off + j], k_, true);
                }
                out[i].push_back({j, v});
            }
        }
        return out;
    }

    const VoxelGrid& grid_;
    double k_;
    std::vector<cplx> eta_;
    LSOptions opt_;
    std::vector<std::shared_ptr<const StaticOperators>> statics_;
    std::vector<std::vector<std::vector<detail::NearEntry>>> near_;
    std::vector<Eigen::MatrixXcf> lu_;
    std::vector<std::vector<lapack_int>> pivots_;
    std::vector<float> rcond_;
};

inline LSOperator assemble_ls(const VoxelGrid& grid, double k, cplx eta1, cplx eta2, const LSOptions& opt = {})
{
    std::vector<cplx> eta{eta1};
    if (grid.particles.size() > 1) eta.push_back(eta2);
    return LSOperator(grid, k, eta, opt);
}

/// Incident electric field sampled at the cell centroids.
inline Eigen::VectorXcd sample_incident(const VoxelGrid& grid, const IncidentWave& wave)
{
    Eigen::VectorXcd b(3 * static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) b.segment<3>(3 * i) = incident_fields(grid.centers[i], wave).first;
    return b;
}

namespace detail {

/// Restarted GMRES on L P^{-1} y = b, x = P^{-1} y. Returns the true relative residual.
template <class Apply, class Prec>
double gmres(const Apply& op, const Prec& prec, const Eigen::VectorXcd& b, Eigen::VectorXcd& x, double tol,
             int restart, int max_iter, int& iterations)
{
    const double bnorm = b.norm();
    iterations = 0;
    if (bnorm == 0) {
        x.setZero(b.size());
        return 0;
    }
    if (x.size() != b.size()) x.setZero(b.size());
    Eigen::VectorXcd r = b - op(x);
    double rel = r.norm() / bnorm;
    while (rel > tol && iterations < max_iter) {
        const double beta = r.norm();
        const int m = restart;
        Eigen::MatrixXcd v(b.size(), m + 1);
        Eigen::MatrixXcd hm = Eigen::MatrixXcd::Zero(m + 1, m);
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
        std::vector<cplx> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m));
        v.col(0) = r / beta;
        g(0) = beta;
        int j = 0;
        for (; j < m && iterations < max_iter; ++j) {
            ++iterations;
            Eigen::VectorXcd w = op(prec(v.col(j)));
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i) {
                    const cplx c = v.col(i).dot(w);
                    hm(i, j) += c;
                    w -= c * v.col(i);
                }
            hm(j + 1, j) = w.norm();
            if (std::abs(hm(j + 1, j)) > 0) v.col(j + 1) = w / hm(j + 1, j);
            for (int i = 0; i < j; ++i) {
                const cplx t = std::conj(cs[i]) * hm(i, j) + std::conj(sn[i]) * hm(i + 1, j);
                hm(i + 1, j) = -sn[i] * hm(i, j) + cs[i] * hm(i + 1, j);
                hm(i, j) = t;
            }
            const double den = std::hypot(std::abs(hm(j, j)), std::abs(hm(j + 1, j)));
            cs[j] = den > 0 ? hm(j, j) / den : cplx(1);
            sn[j] = den > 0 ? hm(j + 1, j) / den : cplx(0);
            hm(j, j) = den;
            hm(j + 1, j) = 0;
            g(j + 1) = -sn[j] * g(j);
            g(j) = std::conj(cs[j]) * g(j);
            if (std::abs(g(j + 1)) < 0.5 * tol * bnorm || std::abs(hm(j, j)) == 0) {
                ++j;
                break;
            }
        }
        const Eigen::VectorXcd yv =
            hm.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        x += prec(v.leftCols(j) * yv);
        r = b - op(x);
        const double next = r.norm() / bnorm;
        if (!(next < rel)) {
            rel = next;
            break;
        }
        rel = next;
    }
    return rel;
}

} // namespace detail

/// Total field on the cells. Factors the operator on first use.
inline Eigen::VectorXcd solve_ls(LSOperator& op, const Eigen::VectorXcd& incident, LSReport* report = nullptr,
                                 const LSOptions& opt = {})
{
    if (incident.size() != static_cast<Eigen::Index>(op.dim()))
        throw InvalidParameter("incident field has the wrong size");
    if (!op.factored()) op.factor();
    Eigen::VectorXcd x = op.precondition(incident);
    int it = 0;
    const double rel = detail::gmres([&](const Eigen::VectorXcd& v) { return op.apply(v); },
                                     [&](const Eigen::VectorXcd& v) { return op.precondition(v); }, incident, x,
                                     opt.tolerance, opt.restart, opt.max_iterations, it);
    if (report) *report = {it, rel, op.condition_estimate()};
    if (!(rel <= opt.tolerance))
        throw SingularSystem("oracle iteration did not reach the residual target", op.condition_estimate());
    return x;
}

/// (k^2 / 4 pi) (I - xhat xhat) sum_cells e^{-ik xhat.y} eta E vol
inline ComplexVec3 oracle_far_field(const VoxelGrid& grid, const Eigen::VectorXcd& e, const std::vector<cplx>& eta,
                                    double k, const Vec3& xhat_in)
{
    const double nx = xhat_in.norm();
    if (!(nx > 0)) throw InvalidParameter("observation direction must be non-zero");
    const Vec3 xhat = xhat_in / nx;
    ComplexVec3 acc = ComplexVec3::Zero();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx c = eta[static_cast<std::size_t>(grid.tag[i] - 1)] * grid.volumes[i]
                       * std::exp(cplx(0, -k * xhat.dot(grid.centers[i])));
        acc += c * e.segment<3>(3 * static_cast<Eigen::Index>(i));
    }
    const Mat3 proj = Mat3::Identity() - xhat * xhat.transpose();
    return (k * k / (4 * pi)) * (proj.cast<cplx>() * acc);
}

/// Induced dipole moment sum_cells eta E vol of the cells with the given tag (0 for all).
inline ComplexVec3 induced_moment(const VoxelGrid& grid, const Eigen::VectorXcd& e, const std::vector<cplx>& eta,
                                  int tag = 0)
{
    ComplexVec3 acc = ComplexVec3::Zero();
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (tag == 0 || grid.tag[i] == tag)
            acc += eta[static_cast<std::size_t>(grid.tag[i] - 1)] * grid.volumes[i] * e.segment<3>(3 * static_cast<Eigen::Index>(i));
    return acc;
}

} // namespace dimer::oracle
