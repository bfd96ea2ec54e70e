#pragma once

#include "vast/occupancy_grid.hpp"

#include <vector>

namespace vast {

// Convex region in H-representation: { x | A x <= b }, unit outward normals.
struct Polyhedron {
    Eigen::Matrix<double, Eigen::Dynamic, 3> A;
    Eigen::VectorXd b;

    bool contains(const Vec3 &p, double tol = 0.0) const {
        return ((A * p - b).array() <= tol).all();
    }
};

struct CorridorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CorridorOptions {
    double inflation = 0.3;      // vehicle radius
    double max_halfwidth = 3.0;  // growth cap beyond the segment bounding box
    double seed_margin = 0.1;    // initial slack around the segment
};

namespace corridor_detail {

// True when any voxel with center in [lo, hi] blocks (occupied, or unknown
// when the query reports it). The box is in world coordinates.
template <class StateFn>
bool region_blocked(const OccupancyGrid &g, StateFn &&state_of, const Vec3 &lo, const Vec3 &hi) {
    Vec3i a = g.voxel_of(lo), b = g.voxel_of(hi);
    for (int iz = a.z(); iz <= b.z(); ++iz)
        for (int iy = a.y(); iy <= b.y(); ++iy)
            for (int ix = a.x(); ix <= b.x(); ++ix) {
                if (!g.in_bounds(ix, iy, iz)) return true;  // outside = unknown
                if (state_of(g, g.index(ix, iy, iz), g.voxel_center(ix, iy, iz)) != Occupancy::Free)
                    return true;
            }
    return false;
}

}  // namespace corridor_detail

// Axis-aligned box expansion around each path segment: grow the six faces
// round-robin until an inflated obstacle (or unknown space) is hit or the
// face has moved max_halfwidth beyond the seed box. The Minkowski check runs
// against raw occupancy expanded by the inflation radius.
template <class StateFn>
std::vector<Polyhedron> build_corridor(const OccupancyGrid &grid, StateFn &&state_of,
                                       const std::vector<Vec3> &path, CorridorOptions opt = {}) {
    using corridor_detail::region_blocked;
    if (path.size() < 2) throw CorridorError("build_corridor: need at least two waypoints");

    const double res = grid.resolution;
    for (const Vec3 &w : path) {
        Vec3i vx = grid.voxel_of(w);
        if (!grid.in_bounds(vx.x(), vx.y(), vx.z()))
            throw CorridorError("build_corridor: path waypoint outside the grid");
        if (state_of(grid, grid.index(vx.x(), vx.y(), vx.z()), w) == Occupancy::Occupied)
            throw CorridorError("build_corridor: path waypoint in occupied space");
    }

    std::vector<Polyhedron> out;
    out.reserve(path.size() - 1);
    for (size_t s = 0; s + 1 < path.size(); ++s) {
        Vec3 lo = path[s].cwiseMin(path[s + 1]);
        Vec3 hi = path[s].cwiseMax(path[s + 1]);
        double margin = opt.seed_margin;
        Vec3 slo = lo - Vec3::Constant(margin), shi = hi + Vec3::Constant(margin);
        Vec3 infl = Vec3::Constant(opt.inflation);
        if (region_blocked(grid, state_of, slo - infl, shi + infl)) {
            // Retry with a minimal seed before giving up.
            margin = 0.02;
            slo = lo - Vec3::Constant(margin);
            shi = hi + Vec3::Constant(margin);
            if (region_blocked(grid, state_of, slo - infl, shi + infl))
                throw CorridorError("build_corridor: seed box blocked around segment");
        }

        Vec3 seed_lo = slo, seed_hi = shi;
        bool frozen[6] = {false, false, false, false, false, false};
        bool any = true;
        while (any) {
            any = false;
            for (int f = 0; f < 6; ++f) {
                if (frozen[f]) continue;
                int ax = f / 2;
                bool positive = (f % 2) == 1;
                double offset = positive ? (shi[ax] - seed_hi[ax]) : (seed_lo[ax] - slo[ax]);
                if (offset + res > opt.max_halfwidth + 1e-9) {
                    frozen[f] = true;
                    continue;
                }
                // New slab the expanded (Minkowski) box would gain.
                Vec3 alo = slo - infl, ahi = shi + infl;
                if (positive) {
                    alo[ax] = shi[ax] + opt.inflation;
                    ahi[ax] = shi[ax] + opt.inflation + res;
                } else {
                    ahi[ax] = slo[ax] - opt.inflation;
                    alo[ax] = slo[ax] - opt.inflation - res;
                }
                if (region_blocked(grid, state_of, alo, ahi)) {
                    frozen[f] = true;
                    continue;
                }
                if (positive)
                    shi[ax] += res;
                else
                    slo[ax] -= res;
                any = true;
            }
        }

        Polyhedron poly;
        poly.A.resize(6, 3);
        poly.b.resize(6);
        poly.A.setZero();
        for (int ax = 0; ax < 3; ++ax) {
            poly.A(2 * ax, ax) = -1.0;
            poly.b(2 * ax) = -slo[ax];
            poly.A(2 * ax + 1, ax) = 1.0;
            poly.b(2 * ax + 1) = shi[ax];
        }
        out.push_back(std::move(poly));
    }

    // Consecutive polyhedra share the interior around the common waypoint by
    // construction; verify to catch degenerate inputs early.
    for (size_t s = 0; s + 1 < out.size(); ++s)
        if (!out[s].contains(path[s + 1], 1e-9) || !out[s + 1].contains(path[s + 1], 1e-9))
            throw CorridorError("build_corridor: consecutive polyhedra do not overlap");
    return out;
}

inline std::vector<Polyhedron> build_corridor(const OccupancyGrid &grid,
                                              const std::vector<Vec3> &path,
                                              CorridorOptions opt = {}) {
    return build_corridor(
        grid,
        [](const OccupancyGrid &g, size_t idx, const Vec3 &) {
            return g.cells[idx] ? Occupancy::Occupied : Occupancy::Free;
        },
        path, opt);
}

}  // namespace vast
