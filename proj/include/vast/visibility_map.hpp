#pragma once

#include "vast/occupancy_grid.hpp"
#include "vast/spherical.hpp"

#include <cstdint>
#include <vector>

namespace vast {

// Per-direction index of the closest occluded radius. Direction (i,j) is
// visible at radial index k iff k < k_min[i,j]; k_min == n_r means the
// direction is never occluded. S[k] lists the directions with k_min == k, so
// S[n_r] holds the always-visible set used to seed the outermost layer.
struct VisibilityMap {
    SphericalGridSpec spec;
    std::vector<int32_t> k_min;
    std::vector<std::vector<int32_t>> S;

    bool visible(int dir, int k) const { return k < k_min[dir]; }
};

// Builds the visibility map by traversing the occupancy volume around the
// spec origin. `occluding(center)` decides whether a voxel blocks sight;
// occluded directions are angularly inflated by `inflation_cells`
// (Chebyshev dilation, phi wraps, theta clamps).
template <class OccludingFn>
VisibilityMap update_visibility_map(const OccupancyGrid &grid, const SphericalGridSpec &spec,
                                    int inflation_cells, OccludingFn &&occluding) {
    VisibilityMap vm;
    vm.spec = spec;
    const int nt = spec.n_theta, np = spec.n_phi, nr = spec.n_r;
    std::vector<int32_t> raw(static_cast<size_t>(nt) * np, nr);

    const double res = grid.resolution;
    const double reach = spec.r_max + 0.5 * res;
    Vec3i lo = grid.voxel_of(spec.origin - Vec3::Constant(reach));
    Vec3i hi = grid.voxel_of(spec.origin + Vec3::Constant(reach));
    lo = lo.cwiseMax(Vec3i::Zero());
    hi = hi.cwiseMin(grid.dims - Vec3i::Ones());

    const double r2_max = spec.r_max * spec.r_max;
    for (int iz = lo.z(); iz <= hi.z(); ++iz)
        for (int iy = lo.y(); iy <= hi.y(); ++iy) {
            size_t row = grid.index(lo.x(), iy, iz);
            for (int ix = lo.x(); ix <= hi.x(); ++ix, ++row) {
                Vec3 c = grid.voxel_center(ix, iy, iz);
                Vec3 d = c - spec.origin;
                double r2 = d.squaredNorm();
                if (r2 > r2_max || r2 < 1e-18) continue;
                if (!occluding(grid, row, c)) continue;
                double r = std::sqrt(r2);
                int k = spec.r_index(r);
                if (k >= nr) continue;
                double theta = std::acos(clamp(d.z() / r, -1.0, 1.0));
                double phi = std::atan2(d.y(), d.x());
                if (phi < 0.0) phi += kTwoPi;
                int i = spec.theta_index(theta);
                int j = spec.phi_index(phi);
                int32_t &cell = raw[spec.dir(i, j)];
                if (k < cell) cell = k;
            }
        }

    vm.k_min.assign(raw.size(), nr);
    if (inflation_cells > 0) {
        const int c = inflation_cells;
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < np; ++j) {
                int32_t best = nr;
                for (int di = -c; di <= c; ++di) {
                    int ii = i + di;
                    if (ii < 0 || ii >= nt) continue;
                    for (int dj = -c; dj <= c; ++dj) {
                        int jj = (j + dj) % np;
                        if (jj < 0) jj += np;
                        best = std::min(best, raw[spec.dir(ii, jj)]);
                    }
                }
                vm.k_min[spec.dir(i, j)] = best;
            }
    } else {
        vm.k_min = raw;
    }

    vm.S.assign(static_cast<size_t>(nr) + 1, {});
    for (int d = 0; d < nt * np; ++d) vm.S[vm.k_min[d]].push_back(d);
    return vm;
}

// Plain-grid overload: only occupied voxels occlude.
inline VisibilityMap update_visibility_map(const OccupancyGrid &grid,
                                           const SphericalGridSpec &spec, int inflation_cells) {
    return update_visibility_map(
        grid, spec, inflation_cells,
        [](const OccupancyGrid &g, size_t idx, const Vec3 &) { return g.cells[idx] != 0; });
}

}  // namespace vast
