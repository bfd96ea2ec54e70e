#pragma once

#include "vast/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace vast {

enum class Occupancy { Free = 0, Occupied = 1, Unknown = 2 };

// Axis-aligned 3-D voxel grid. World coordinates live in
// [origin, origin + dims * resolution); anything outside is Unknown.
struct OccupancyGrid {
    Vec3 origin = Vec3::Zero();
    double resolution = 0.1;
    Vec3i dims = Vec3i::Zero();
    std::vector<uint8_t> cells;

    void init(const Vec3 &orig, double res, const Vec3i &d) {
        if (res <= 0.0) throw std::invalid_argument("OccupancyGrid: resolution must be > 0");
        if (d.minCoeff() < 1) throw std::invalid_argument("OccupancyGrid: dims must be >= 1");
        origin = orig;
        resolution = res;
        dims = d;
        cells.assign(static_cast<size_t>(d.x()) * d.y() * d.z(), 0);
    }

    size_t index(int ix, int iy, int iz) const {
        return (static_cast<size_t>(iz) * dims.y() + iy) * dims.x() + ix;
    }

    bool in_bounds(int ix, int iy, int iz) const {
        return ix >= 0 && ix < dims.x() && iy >= 0 && iy < dims.y() && iz >= 0 && iz < dims.z();
    }

    Vec3i voxel_of(const Vec3 &p) const {
        Vec3 q = (p - origin) / resolution;
        return Vec3i(static_cast<int>(std::floor(q.x())), static_cast<int>(std::floor(q.y())),
                     static_cast<int>(std::floor(q.z())));
    }

    Vec3 voxel_center(int ix, int iy, int iz) const {
        return origin + resolution * Vec3(ix + 0.5, iy + 0.5, iz + 0.5);
    }

    void set_occupied(int ix, int iy, int iz) {
        if (in_bounds(ix, iy, iz)) cells[index(ix, iy, iz)] = 1;
    }

    bool occupied_at(int ix, int iy, int iz) const { return cells[index(ix, iy, iz)] != 0; }

    Occupancy state(const Vec3 &p) const {
        Vec3i v = voxel_of(p);
        if (!in_bounds(v.x(), v.y(), v.z())) return Occupancy::Unknown;
        return cells[index(v.x(), v.y(), v.z())] ? Occupancy::Occupied : Occupancy::Free;
    }

    Vec3 max_corner() const { return origin + resolution * dims.cast<double>(); }

    // Any occupied voxel within `radius` of p. Unknown (out of grid) counts as
    // blocked when `unknown_blocks` is set.
    bool occupied_within(const Vec3 &p, double radius, bool unknown_blocks = false) const {
        int r = static_cast<int>(std::ceil(radius / resolution));
        Vec3i c = voxel_of(p);
        double r2 = radius * radius;
        for (int dz = -r; dz <= r; ++dz)
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    int ix = c.x() + dx, iy = c.y() + dy, iz = c.z() + dz;
                    if (!in_bounds(ix, iy, iz)) {
                        if (unknown_blocks) return true;
                        continue;
                    }
                    if (!occupied_at(ix, iy, iz)) continue;
                    Vec3 cc = voxel_center(ix, iy, iz);
                    Vec3 d = (cc - p).cwiseAbs() - Vec3::Constant(0.5 * resolution);
                    d = d.cwiseMax(0.0);
                    if (d.squaredNorm() <= r2) return true;
                }
        return false;
    }
};

struct MapGenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MapKind { Forest, Walls };

struct MapGenOptions {
    double resolution = 0.1;
    // Disc kept free of obstacles (around the scenario start region).
    Vec3 clearance_center = Vec3::Zero();  // xy used; set to extent/2 if zero
    double clearance_radius = 4.0;
    double tree_height = 4.0;
    double tree_diameter = 1.0;
    double wall_thickness = 0.3;
    double wall_min_length = 2.0, wall_max_length = 6.0;
    double wall_min_height = 2.0, wall_max_height = 4.0;
    int max_attempts_per_obstacle = 200;
};

namespace detail {

inline void rasterize_cylinder(OccupancyGrid &g, double cx, double cy, double radius,
                               double height) {
    int x0 = std::max(0, static_cast<int>(std::floor((cx - radius - g.origin.x()) / g.resolution)));
    int x1 = std::min(g.dims.x() - 1,
                      static_cast<int>(std::floor((cx + radius - g.origin.x()) / g.resolution)));
    int y0 = std::max(0, static_cast<int>(std::floor((cy - radius - g.origin.y()) / g.resolution)));
    int y1 = std::min(g.dims.y() - 1,
                      static_cast<int>(std::floor((cy + radius - g.origin.y()) / g.resolution)));
    int z1 = std::min(g.dims.z() - 1,
                      static_cast<int>(std::floor((height - 1e-9) / g.resolution)));
    double r2 = radius * radius;
    for (int iy = y0; iy <= y1; ++iy)
        for (int ix = x0; ix <= x1; ++ix) {
            Vec3 c = g.voxel_center(ix, iy, 0);
            double dx = c.x() - cx, dy = c.y() - cy;
            if (dx * dx + dy * dy > r2) continue;
            for (int iz = 0; iz <= z1; ++iz) g.set_occupied(ix, iy, iz);
        }
}

inline void rasterize_box(OccupancyGrid &g, const Vec3 &lo, const Vec3 &hi) {
    Vec3i a = g.voxel_of(lo), b = g.voxel_of(hi - Vec3::Constant(1e-9));
    for (int iz = std::max(0, a.z()); iz <= std::min(g.dims.z() - 1, b.z()); ++iz)
        for (int iy = std::max(0, a.y()); iy <= std::min(g.dims.y() - 1, b.y()); ++iy)
            for (int ix = std::max(0, a.x()); ix <= std::min(g.dims.x() - 1, b.x()); ++ix)
                g.set_occupied(ix, iy, iz);
}

}  // namespace detail

// Deterministic procedural maps. Obstacle count = floor(footprint_area * density).
inline OccupancyGrid generate_map(MapKind kind, uint64_t seed, const Vec3 &extent, double density,
                                  MapGenOptions opt = {}) {
    if (extent.minCoeff() <= 0.0) throw std::invalid_argument("generate_map: extent must be positive");
    if (density < 0.0) throw std::invalid_argument("generate_map: density must be >= 0");

    OccupancyGrid g;
    Vec3i dims(static_cast<int>(std::ceil(extent.x() / opt.resolution)),
               static_cast<int>(std::ceil(extent.y() / opt.resolution)),
               static_cast<int>(std::ceil(extent.z() / opt.resolution)));
    g.init(Vec3::Zero(), opt.resolution, dims);

    Vec3 clear_c = opt.clearance_center;
    if (clear_c.isZero()) clear_c = 0.5 * extent;

    const double area = extent.x() * extent.y();
    const int count = static_cast<int>(std::floor(area * density));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    if (kind == MapKind::Forest) {
        const double rad = 0.5 * opt.tree_diameter;
        const double margin = rad + 0.1;
        std::vector<Vec3> centers;
        centers.reserve(count);
        for (int n = 0; n < count; ++n) {
            bool placed = false;
            for (int attempt = 0; attempt < opt.max_attempts_per_obstacle; ++attempt) {
                double cx = margin + u01(rng) * (extent.x() - 2 * margin);
                double cy = margin + u01(rng) * (extent.y() - 2 * margin);
                double dcx = cx - clear_c.x(), dcy = cy - clear_c.y();
                if (std::sqrt(dcx * dcx + dcy * dcy) < opt.clearance_radius + rad) continue;
                bool overlap = false;
                for (const Vec3 &c : centers) {
                    double dx = cx - c.x(), dy = cy - c.y();
                    if (dx * dx + dy * dy < opt.tree_diameter * opt.tree_diameter) {
                        overlap = true;
                        break;
                    }
                }
                if (overlap) continue;
                centers.emplace_back(cx, cy, 0.0);
                detail::rasterize_cylinder(g, cx, cy, rad, opt.tree_height);
                placed = true;
                break;
            }
            if (!placed)
                throw MapGenError("generate_map: obstacle placement failed, density too high");
        }
    } else {
        for (int n = 0; n < count; ++n) {
            bool placed = false;
            for (int attempt = 0; attempt < opt.max_attempts_per_obstacle; ++attempt) {
                bool along_x = u01(rng) < 0.5;
                double len = opt.wall_min_length + u01(rng) * (opt.wall_max_length - opt.wall_min_length);
                double hgt = opt.wall_min_height + u01(rng) * (opt.wall_max_height - opt.wall_min_height);
                double cx = u01(rng) * extent.x();
                double cy = u01(rng) * extent.y();
                double hx = along_x ? 0.5 * len : 0.5 * opt.wall_thickness;
                double hy = along_x ? 0.5 * opt.wall_thickness : 0.5 * len;
                Vec3 lo(cx - hx, cy - hy, 0.0), hi(cx + hx, cy + hy, hgt);
                // Keep the clearance disc free: distance of disc center to the box footprint.
                double ddx = std::max({lo.x() - clear_c.x(), clear_c.x() - hi.x(), 0.0});
                double ddy = std::max({lo.y() - clear_c.y(), clear_c.y() - hi.y(), 0.0});
                if (std::sqrt(ddx * ddx + ddy * ddy) < opt.clearance_radius) continue;
                detail::rasterize_box(g, lo, hi);
                placed = true;
                break;
            }
            if (!placed)
                throw MapGenError("generate_map: obstacle placement failed, density too high");
        }
    }
    return g;
}

// Exact voxel traversal (3-D DDA). When the segment crosses a voxel boundary
// exactly, both adjacent voxels are checked (conservative tie rule).
inline bool line_of_sight_clear(const OccupancyGrid &g, const Vec3 &a, const Vec3 &b) {
    Vec3 d = b - a;
    double len = d.norm();
    if (len < 1e-12) return true;  // degenerate segment

    auto blocked = [&](int ix, int iy, int iz) {
        return g.in_bounds(ix, iy, iz) && g.occupied_at(ix, iy, iz);
    };

    Vec3i cur = g.voxel_of(a);
    Vec3i last = g.voxel_of(b);
    if (blocked(cur.x(), cur.y(), cur.z())) return false;

    Vec3i step;
    Vec3 t_max, t_delta;
    for (int ax = 0; ax < 3; ++ax) {
        if (d[ax] > 0) {
            step[ax] = 1;
            double next = g.origin[ax] + (cur[ax] + 1) * g.resolution;
            t_max[ax] = (next - a[ax]) / d[ax];
            t_delta[ax] = g.resolution / d[ax];
        } else if (d[ax] < 0) {
            step[ax] = -1;
            double next = g.origin[ax] + cur[ax] * g.resolution;
            t_max[ax] = (next - a[ax]) / d[ax];
            t_delta[ax] = -g.resolution / d[ax];
        } else {
            step[ax] = 0;
            t_max[ax] = std::numeric_limits<double>::infinity();
            t_delta[ax] = std::numeric_limits<double>::infinity();
        }
    }

    const double tie_eps = 1e-12;
    int guard = 4 * (g.dims.x() + g.dims.y() + g.dims.z());
    while (cur != last && guard-- > 0) {
        double tmin = std::min({t_max.x(), t_max.y(), t_max.z()});
        if (tmin > 1.0 + tie_eps) break;
        bool tie[3];
        int n_tied = 0;
        for (int ax = 0; ax < 3; ++ax) {
            tie[ax] = (t_max[ax] - tmin) <= tie_eps;
            n_tied += tie[ax];
        }
        if (n_tied > 1) {
            // Boundary-exact crossing: check every voxel adjacent to the corner/edge.
            for (int ax = 0; ax < 3; ++ax) {
                if (!tie[ax]) continue;
                Vec3i side = cur;
                side[ax] += step[ax];
                if (blocked(side.x(), side.y(), side.z())) return false;
            }
        }
        for (int ax = 0; ax < 3; ++ax) {
            if (tie[ax]) {
                cur[ax] += step[ax];
                t_max[ax] += t_delta[ax];
            }
        }
        if (blocked(cur.x(), cur.y(), cur.z())) return false;
    }
    return true;
}

// --- Map export/import -------------------------------------------------------

inline nlohmann::json map_to_json(const OccupancyGrid &g) {
    nlohmann::json j;
    j["origin"] = {g.origin.x(), g.origin.y(), g.origin.z()};
    j["resolution"] = g.resolution;
    j["dims"] = {g.dims.x(), g.dims.y(), g.dims.z()};
    std::vector<uint64_t> occ;
    for (size_t i = 0; i < g.cells.size(); ++i)
        if (g.cells[i]) occ.push_back(i);
    j["occupied"] = occ;
    return j;
}

inline OccupancyGrid map_from_json(const nlohmann::json &j) {
    OccupancyGrid g;
    Vec3 origin(j.at("origin")[0], j.at("origin")[1], j.at("origin")[2]);
    Vec3i dims(j.at("dims")[0], j.at("dims")[1], j.at("dims")[2]);
    g.init(origin, j.at("resolution").get<double>(), dims);
    for (uint64_t idx : j.at("occupied")) g.cells.at(idx) = 1;
    return g;
}

inline void map_save_json(const OccupancyGrid &g, const std::string &path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("map_save_json: cannot open " + path);
    f << map_to_json(g).dump();
}

inline OccupancyGrid map_load_json(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("map_load_json: cannot open " + path);
    nlohmann::json j;
    f >> j;
    return map_from_json(j);
}

// Flat binary: magic, origin, resolution, dims, count, occupied indices (LE).
inline void map_save_binary(const OccupancyGrid &g, const std::string &path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("map_save_binary: cannot open " + path);
    const char magic[4] = {'V', 'O', 'X', 'L'};
    f.write(magic, 4);
    double o[4] = {g.origin.x(), g.origin.y(), g.origin.z(), g.resolution};
    f.write(reinterpret_cast<const char *>(o), sizeof(o));
    int32_t d[3] = {g.dims.x(), g.dims.y(), g.dims.z()};
    f.write(reinterpret_cast<const char *>(d), sizeof(d));
    std::vector<uint64_t> occ;
    for (size_t i = 0; i < g.cells.size(); ++i)
        if (g.cells[i]) occ.push_back(i);
    uint64_t n = occ.size();
    f.write(reinterpret_cast<const char *>(&n), sizeof(n));
    f.write(reinterpret_cast<const char *>(occ.data()), sizeof(uint64_t) * occ.size());
}

inline OccupancyGrid map_load_binary(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("map_load_binary: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (std::memcmp(magic, "VOXL", 4) != 0) throw std::runtime_error("map_load_binary: bad magic");
    double o[4];
    f.read(reinterpret_cast<char *>(o), sizeof(o));
    int32_t d[3];
    f.read(reinterpret_cast<char *>(d), sizeof(d));
    OccupancyGrid g;
    g.init(Vec3(o[0], o[1], o[2]), o[3], Vec3i(d[0], d[1], d[2]));
    uint64_t n = 0;
    f.read(reinterpret_cast<char *>(&n), sizeof(n));
    std::vector<uint64_t> occ(n);
    f.read(reinterpret_cast<char *>(occ.data()), sizeof(uint64_t) * n);
    for (uint64_t idx : occ) g.cells.at(idx) = 1;
    return g;
}

}  // namespace vast
