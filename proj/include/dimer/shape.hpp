#pragma once

// Reference shapes B_m in unit coordinates: balls or voxel masks.

#include "dimer/errors.hpp"
#include "dimer/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dimer {

/// Union of axis-aligned cubes of side `spacing`; cell (i,j,k) is centered at
/// origin + spacing * (i + 1/2, j + 1/2, k + 1/2).
struct VoxelMask {
    std::array<int, 3> dims{0, 0, 0};
    double spacing = 1.0;
    Vec3 origin = Vec3::Zero();
    std::vector<std::uint8_t> cells;

    bool at(int i, int j, int k) const
    {
        if (i < 0 || j < 0 || k < 0 || i >= dims[0] || j >= dims[1] || k >= dims[2]) return false;
        return cells[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k] != 0;
    }
    Vec3 center(int i, int j, int k) const { return origin + spacing * Vec3(i + 0.5, j + 0.5, k + 0.5); }
    std::size_t count() const
    {
        std::size_t c = 0;
        for (auto v : cells) c += v != 0;
        return c;
    }

    /// Text format: "nx ny nz spacing ox oy oz" followed by nx*ny*nz digits 0/1 (k fastest).
    static VoxelMask load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open voxel mask file " + path);
        VoxelMask m;
        in >> m.dims[0] >> m.dims[1] >> m.dims[2] >> m.spacing >> m.origin(0) >> m.origin(1) >> m.origin(2);
        if (!in || m.dims[0] <= 0 || m.dims[1] <= 0 || m.dims[2] <= 0 || !(m.spacing > 0))
            throw InputError("malformed voxel mask header in " + path);
        const std::size_t n = static_cast<std::size_t>(m.dims[0]) * m.dims[1] * m.dims[2];
        m.cells.reserve(n);
        char c;
        while (m.cells.size() < n && in >> c) {
            if (c == '0' || c == '1') m.cells.push_back(static_cast<std::uint8_t>(c - '0'));
            else throw InputError("voxel mask may only contain 0/1 digits");
        }
        if (m.cells.size() != n) throw InputError("voxel mask body is truncated in " + path);
        return m;
    }
};

struct Shape {
    enum class Kind { Ball, Mask };
    Kind kind = Kind::Ball;
    double radius = 1.0;
    VoxelMask mask;

    static Shape ball(double r = 1.0)
    {
        if (!(r > 0)) throw InvalidParameter("ball radius must be positive");
        Shape s;
        s.radius = r;
        return s;
    }
    static Shape from_mask(VoxelMask m)
    {
        if (m.count() == 0) throw InvalidParameter("voxel mask is empty");
        Shape s;
        s.kind = Kind::Mask;
        s.mask = std::move(m);
        return s;
    }

    bool is_ball() const { return kind == Kind::Ball; }

    /// Largest distance from the origin to a point of the shape.
    double bounding_radius() const
    {
        if (is_ball()) return radius;
        double r = 0;
        for (int i = 0; i < mask.dims[0]; ++i)
            for (int j = 0; j < mask.dims[1]; ++j)
                for (int k = 0; k < mask.dims[2]; ++k) {
                    if (!mask.at(i, j, k)) continue;
                    for (int c = 0; c < 8; ++c) {
                        const Vec3 p = mask.origin + mask.spacing * Vec3(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                        r = std::max(r, p.norm());
                    }
                }
        return r;
    }

    double volume() const
    {
        if (is_ball()) return 4.0 / 3.0 * pi * radius * radius * radius;
        return static_cast<double>(mask.count()) * mask.spacing * mask.spacing * mask.spacing;
    }

    std::string describe() const
    {
        std::ostringstream os;
        if (is_ball()) os << "ball(" << radius << ")";
        else os << "mask(" << mask.dims[0] << "x" << mask.dims[1] << "x" << mask.dims[2] << ")";
        return os.str();
    }
};

} // namespace dimer
