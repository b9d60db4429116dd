#pragma once

// Cut-cell discretization of a single reference shape.
//
// Lattice cells whose center lies at least tau*h inside the shape carry the unknowns ("owners").
// Every other cell meeting the shape is merged into a neighbouring owner. The part of a cut cell
// lying outside the shape is stored as a small octree so that its contribution can be subtracted
// from the exact full-cube integrals.

#include "dimer/errors.hpp"
#include "dimer/oracle/cube.hpp"
#include "dimer/shape.hpp"
#include "dimer/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace dimer::oracle {

using Index3 = std::array<int, 3>;

enum class Region { Inside, Outside, Mixed };

/// Inside/outside queries for a Shape in its own (unit) coordinates.
class ShapeGeometry {
public:
    explicit ShapeGeometry(const Shape& s) : shape_(s) {}

    const Shape& shape() const { return shape_; }

    Vec3 lo() const
    {
        if (shape_.is_ball()) return Vec3::Constant(-shape_.radius);
        return shape_.mask.origin;
    }
    Vec3 hi() const
    {
        if (shape_.is_ball()) return Vec3::Constant(shape_.radius);
        const auto& m = shape_.mask;
        return m.origin + m.spacing * Vec3(m.dims[0], m.dims[1], m.dims[2]);
    }

    bool inside(const Vec3& p) const
    {
        if (shape_.is_ball()) return p.squaredNorm() <= shape_.radius * shape_.radius;
        const auto& m = shape_.mask;
        const Vec3 q = (p - m.origin) / m.spacing;
        return m.at(static_cast<int>(std::floor(q(0))), static_cast<int>(std::floor(q(1))),
                    static_cast<int>(std::floor(q(2))));
    }

    /// Classification of the box center +/- half.
    Region classify(const Vec3& c, double half) const
    {
        if (shape_.is_ball()) {
            const double r = shape_.radius;
            const Vec3 a = c.cwiseAbs();
            const Vec3 near = (a.array() - half).max(0.0).matrix();
            const Vec3 far = a.array() + half;
            if (far.squaredNorm() <= r * r) return Region::Inside;
            if (near.squaredNorm() >= r * r) return Region::Outside;
            return Region::Mixed;
        }
        const auto& m = shape_.mask;
        const Vec3 lo = (c.array() - half - m.origin.array()) / m.spacing;
        const Vec3 hi = (c.array() + half - m.origin.array()) / m.spacing;
        const double eps = 1e-12;
        Index3 a, b;
        for (int d = 0; d < 3; ++d) {
            a[d] = static_cast<int>(std::floor(lo(d) + eps));
            b[d] = static_cast<int>(std::ceil(hi(d) - eps)) - 1;
        }
        bool any_in = false, any_out = false;
        for (int i = a[0]; i <= b[0]; ++i)
            for (int j = a[1]; j <= b[1]; ++j)
                for (int k = a[2]; k <= b[2]; ++k) {
                    (m.at(i, j, k) ? any_in : any_out) = true;
                    if (any_in && any_out) return Region::Mixed;
                }
        return any_in ? Region::Inside : Region::Outside;
    }

    /// True when p lies at least delta inside the shape.
    bool deep_inside(const Vec3& p, double delta) const
    {
        if (shape_.is_ball()) return p.norm() <= shape_.radius - delta;
        return classify(p, delta) == Region::Inside;
    }

private:
    const Shape& shape_;
};

/// Node of the octree describing the part of a cut cell outside the shape (lattice units).
struct RemovedNode {
    Vec3 center = Vec3::Zero();
    double size = 0;
    double volume = 0;   ///< removed volume inside this node
    Vec3 centroid = Vec3::Zero();
    double fraction = 0; ///< leaves: removed fraction of the node cube
    int first_child = -1;
    int child_count = 0;
    bool leaf() const { return child_count == 0; }
};

struct CellPart {
    Index3 lattice{0, 0, 0};
    int owner = -1;
    double kept = 1.0;  ///< kept volume fraction of the lattice cell
    Vec3 kept_centroid = Vec3::Zero(); ///< lattice units
    int tree = -1;      ///< index into CutCellGrid::trees for cut cells
};

struct CutCellOptions {
    double tau = 0.25;    ///< owner depth in cell sizes
    int depth = 4;        ///< octree depth for removed parts
    int samples = 4;      ///< per-axis samples in mixed leaves
    double theta = 0.4;   ///< Barnes-Hut opening ratio
};

struct CutCellGrid {
    int n = 0;
    double h = 0;               ///< cell size in shape units
    Vec3 origin = Vec3::Zero(); ///< center of lattice cell (0,0,0)
    Index3 dims{0, 0, 0};
    CutCellOptions options;

    std::vector<Index3> owner_lattice;
    std::vector<Vec3> owner_center;   ///< collocation points, shape units
    std::vector<Vec3> owner_centroid; ///< centroid of the merged region, shape units
    std::vector<double> owner_volume; ///< shape units
    std::vector<CellPart> parts;
    std::vector<std::vector<RemovedNode>> trees;

    double shape_volume = 0;
    double grid_volume = 0;
    double dropped_volume = 0;

    std::size_t size() const { return owner_center.size(); }
    double volume_error() const { return std::abs(grid_volume - shape_volume) / shape_volume; }
    Vec3 lattice_point(const Index3& l) const { return Vec3(l[0], l[1], l[2]); }
    Vec3 to_shape(const Vec3& xi) const { return origin + h * xi; }
};

namespace detail {

struct RawTree {
    std::vector<RemovedNode> nodes;
    std::vector<std::vector<int>> kids;
};

inline int build_removed(const ShapeGeometry& g, const CutCellGrid& grid, RawTree& t, const Vec3& c, double s, int level)
{
    const Region r = g.classify(grid.to_shape(c), 0.5 * s * grid.h);
    if (r == Region::Inside) return -1;
    RemovedNode node;
    node.center = c;
    node.size = s;
    std::vector<int> kids;
    if (r == Region::Outside) {
        node.volume = s * s * s;
        node.centroid = c;
        node.fraction = 1.0;
    } else if (level == grid.options.depth) {
        const int m = grid.options.samples;
        int out = 0;
        Vec3 acc = Vec3::Zero();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k) {
                    const Vec3 p = c + s * (Vec3(i + 0.5, j + 0.5, k + 0.5) / m - Vec3::Constant(0.5));
                    if (!g.inside(grid.to_shape(p))) {
                        ++out;
                        acc += p;
                    }
                }
        if (out == 0) return -1;
        node.fraction = static_cast<double>(out) / (m * m * m);
        node.volume = node.fraction * s * s * s;
        node.centroid = acc / out;
    } else {
        for (int q = 0; q < 8; ++q) {
            const Vec3 off((q & 1) ? 0.25 : -0.25, ((q >> 1) & 1) ? 0.25 : -0.25, ((q >> 2) & 1) ? 0.25 : -0.25);
            const int id = build_removed(g, grid, t, c + s * off, 0.5 * s, level + 1);
            if (id < 0) continue;
            kids.push_back(id);
            node.volume += t.nodes[id].volume;
            node.centroid += t.nodes[id].volume * t.nodes[id].centroid;
        }
        if (kids.empty()) return -1;
        node.centroid /= node.volume;
    }
    t.nodes.push_back(node);
    t.kids.push_back(std::move(kids));
    return static_cast<int>(t.nodes.size()) - 1;
}

/// Flattens a tree so that the root is node 0 and siblings are contiguous.
inline std::vector<RemovedNode> compact_tree(const RawTree& raw, int root)
{
    std::vector<RemovedNode> out;
    out.reserve(raw.nodes.size());
    std::vector<int> source;
    out.push_back(raw.nodes[root]);
    source.push_back(root);
    for (std::size_t slot = 0; slot < out.size(); ++slot) {
        const auto& kids = raw.kids[source[slot]];
        if (kids.empty()) continue;
        out[slot].first_child = static_cast<int>(out.size());
        out[slot].child_count = static_cast<int>(kids.size());
        for (int id : kids) {
            out.push_back(raw.nodes[id]);
            source.push_back(id);
        }
    }
    return out;
}

} // namespace detail

/// Static integrals of the removed part of one cut cell seen from target xi (lattice units).
inline void removed_integrals(const std::vector<RemovedNode>& tree, const Vec3& xi, double theta, Mat3& block,
                              double& potential, bool with_potential = true)
{
    int stack[256];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const RemovedNode& nd = tree[stack[--top]];
        const Vec3 u = xi - nd.centroid;
        const double dist = u.norm();
        if (nd.size < theta * dist) {
            block += point_block(u, nd.volume);
            if (with_potential) potential += point_potential(u, nd.volume);
            continue;
        }
        if (nd.leaf()) {
            const CubeIntegrals ci = cube_integrals(xi - nd.center, nd.size, with_potential);
            block += nd.fraction * ci.block;
            potential += nd.fraction * ci.potential;
            continue;
        }
        for (int q = 0; q < nd.child_count; ++q) stack[top++] = nd.first_child + q;
    }
}

inline CutCellGrid build_cut_cell_grid(const Shape& shape, int n, const CutCellOptions& opt = {})
{
    if (n < 4) throw ResolutionTooLow("oracle resolution must be at least 4 cells per axis");
    const ShapeGeometry geo(shape);
    CutCellGrid g;
    g.n = n;
    g.options = opt;
    const Vec3 lo = geo.lo(), hi = geo.hi();
    const double extent = (hi - lo).maxCoeff();
    g.h = extent / n;
    for (int d = 0; d < 3; ++d) g.dims[d] = std::max(1, static_cast<int>(std::ceil((hi(d) - lo(d)) / g.h - 1e-9)));
    g.origin = lo + Vec3::Constant(0.5 * g.h);
    g.shape_volume = shape.volume();

    std::map<Index3, int> owner_at;
    std::vector<CellPart> candidates;
    for (int i = 0; i < g.dims[0]; ++i)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int k = 0; k < g.dims[2]; ++k) {
                const Index3 l{i, j, k};
                const Vec3 xi = g.lattice_point(l);
                const Vec3 c = g.to_shape(xi);
                const Region r = geo.classify(c, 0.5 * g.h);
                if (r == Region::Outside) continue;
                CellPart p;
                p.lattice = l;
                p.kept_centroid = xi;
                if (r == Region::Mixed) {
                    detail::RawTree raw;
                    const int root = detail::build_removed(geo, g, raw, xi, 1.0, 0);
                    if (root >= 0) {
                        auto tree = detail::compact_tree(raw, root);
                        const double vr = tree[0].volume;
                        p.kept = 1.0 - vr;
                        if (p.kept <= 1e-12) continue;
                        p.kept_centroid = (xi - vr * tree[0].centroid) / p.kept;
                        p.tree = static_cast<int>(g.trees.size());
                        g.trees.push_back(std::move(tree));
                    }
                }
                if (geo.deep_inside(c, opt.tau * g.h)) {
                    p.owner = static_cast<int>(g.owner_center.size());
                    owner_at[l] = p.owner;
                    g.owner_lattice.push_back(l);
                    g.owner_center.push_back(c);
                }
                candidates.push_back(p);
            }
    if (g.owner_center.empty()) throw ResolutionTooLow("no interior cells at this resolution");

    const double cell_vol = g.h * g.h * g.h;
    for (auto& p : candidates) {
        if (p.owner < 0) {
            int best = -1;
            std::pair<int, double> best_score{std::numeric_limits<int>::max(), 0.0};
            for (int reach = 1; reach <= 2 && best < 0; ++reach)
                for (int di = -reach; di <= reach; ++di)
                    for (int dj = -reach; dj <= reach; ++dj)
                        for (int dk = -reach; dk <= reach; ++dk) {
                            const Index3 q{p.lattice[0] + di, p.lattice[1] + dj, p.lattice[2] + dk};
                            const auto it = owner_at.find(q);
                            if (it == owner_at.end()) continue;
                            const std::pair<int, double> score{std::abs(di) + std::abs(dj) + std::abs(dk),
                                                               g.owner_center[it->second].norm()};
                            if (best < 0 || score < best_score) {
                                best = it->second;
                                best_score = score;
                            }
                        }
            if (best < 0) {
                g.dropped_volume += p.kept * cell_vol;
                continue;
            }
            p.owner = best;
        }
        g.parts.push_back(p);
    }

    const std::size_t m = g.owner_center.size();
    g.owner_volume.assign(m, 0.0);
    g.owner_centroid.assign(m, Vec3::Zero());
    for (const auto& p : g.parts) {
        const double v = p.kept * cell_vol;
        g.owner_volume[p.owner] += v;
        g.owner_centroid[p.owner] += v * g.to_shape(p.kept_centroid);
    }
    for (std::size_t i = 0; i < m; ++i) {
        g.owner_centroid[i] /= g.owner_volume[i];
        g.grid_volume += g.owner_volume[i];
    }
    return g;
}

} // namespace dimer::oracle
