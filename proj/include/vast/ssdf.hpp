#pragma once

#include "vast/spherical.hpp"
#include "vast/visibility_map.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <fstream>
#include <string>
#include <vector>

namespace vast {

// Truncated spherical signed distance volume around a target point.
// D <= 0 everywhere: 0 on visible cells, minus the angular distance to the
// closest visible direction at the same radial layer elsewhere. B stores the
// packed (theta, phi) index of that boundary direction, -1 where no visible
// direction exists at the layer (D saturates at -pi).
struct SsdfVolume {
    SphericalGridSpec spec;
    double stamp = 0.0;
    std::vector<double> D;
    std::vector<int32_t> B;

    size_t cell(int i, int j, int k) const {
        return (static_cast<size_t>(k) * spec.n_theta + i) * spec.n_phi + j;
    }
    double *layer_d(int k) { return D.data() + static_cast<size_t>(k) * spec.n_dirs(); }
    int32_t *layer_b(int k) { return B.data() + static_cast<size_t>(k) * spec.n_dirs(); }
    const double *layer_d(int k) const { return D.data() + static_cast<size_t>(k) * spec.n_dirs(); }
    const int32_t *layer_b(int k) const { return B.data() + static_cast<size_t>(k) * spec.n_dirs(); }
};

namespace ssdf_detail {

// Exact 2-D spherical distance transform of one layer (truncated form).
// visible[d] != 0 marks visible directions. Writes cosine-of-distance and the
// boundary index per direction; cos_d = 1 on visible cells, -1 with B = -1
// when the layer has no visible direction at all.
inline void transform_layer(const SphericalGridSpec &spec, const SphericalTables &tb,
                            const uint8_t *visible, double *cos_d, int32_t *B,
                            std::vector<int32_t> &g_scratch, std::vector<int32_t> &v_scratch,
                            std::vector<double> &z_scratch) {
    const int nt = spec.n_theta, np = spec.n_phi;
    g_scratch.assign(static_cast<size_t>(nt) * np, -1);
    int32_t *g = g_scratch.data();

    // Latitudinal pass: per row, the circularly nearest visible phi index.
    // Scanning each direction twice handles the wraparound; the better of the
    // clockwise/counterclockwise candidates is exact because the row metric is
    // monotone in the wrapped azimuth offset.
    std::vector<int32_t> fwd(np), bwd(np);
    for (int i = 0; i < nt; ++i) {
        const uint8_t *vis = visible + static_cast<size_t>(i) * np;
        int32_t *grow = g + static_cast<size_t>(i) * np;
        int cur = -1;
        for (int t = 2 * np - 1; t >= 0; --t) {
            int jj = t % np;
            if (vis[jj]) cur = jj;
            if (t < np) fwd[jj] = cur;
        }
        if (cur < 0) continue;  // empty row
        cur = -1;
        for (int t = 0; t < 2 * np; ++t) {
            int jj = t % np;
            if (vis[jj]) cur = jj;
            if (t >= np) bwd[jj] = cur;
        }
        for (int j = 0; j < np; ++j) {
            if (vis[j]) {
                grow[j] = j;
            } else {
                int f = fwd[j], b = bwd[j];
                grow[j] = (tb.cos_dphi(b, j) >= tb.cos_dphi(f, j)) ? b : f;
            }
        }
    }

    // Longitudinal pass: lower envelope over per-row candidates along each
    // meridian, split by the single-intersection latitude.
    std::vector<int32_t> site_row(nt), site_phi(nt);
    std::vector<double> site_a(nt), site_b(nt);
    v_scratch.resize(nt);
    z_scratch.resize(static_cast<size_t>(nt) + 1);
    int32_t *v = v_scratch.data();
    double *z = z_scratch.data();

    for (int j = 0; j < np; ++j) {
        int ns = 0;
        for (int i = 0; i < nt; ++i) {
            int gj = g[static_cast<size_t>(i) * np + j];
            if (gj < 0) continue;
            site_row[ns] = i;
            site_phi[ns] = gj;
            site_a[ns] = tb.cos_t[i];
            site_b[ns] = tb.sin_t[i] * tb.cos_dphi(gj, j);
            ++ns;
        }
        if (ns == 0) {
            for (int i = 0; i < nt; ++i) {
                cos_d[static_cast<size_t>(i) * np + j] = -1.0;
                B[static_cast<size_t>(i) * np + j] = -1;
            }
            continue;
        }

        auto intersect = [&](int s_new, int s_top) {
            double P = site_b[s_new], Q = site_b[s_top];
            double R = site_a[s_top] - site_a[s_new];
            if (P == Q) return 0.5 * kPi;
            double ratio = R / (P - Q);
            double t = std::atan(ratio);
            return ratio >= 0.0 ? t : t + kPi;
        };

        int top = 0;
        v[0] = 0;
        z[0] = -std::numeric_limits<double>::infinity();
        z[1] = std::numeric_limits<double>::infinity();
        for (int s = 1; s < ns; ++s) {
            double h = intersect(s, v[top]);
            while (h <= z[top]) {
                --top;
                h = intersect(s, v[top]);
            }
            ++top;
            v[top] = s;
            z[top] = h;
            z[top + 1] = std::numeric_limits<double>::infinity();
        }

        int n = 0;
        for (int i = 0; i < nt; ++i) {
            size_t d = static_cast<size_t>(i) * np + j;
            if (visible[d]) {
                cos_d[d] = 1.0;
                B[d] = static_cast<int32_t>(d);
                continue;
            }
            double tq = tb.theta[i];
            while (z[n + 1] < tq) ++n;
            int s = v[n];
            cos_d[d] = tb.cos_between(i, j, site_row[s], site_phi[s]);
            B[d] = spec.dir(site_row[s], site_phi[s]);
        }
    }
}

inline double to_signed_distance(double cos_d) {
    return -std::acos(clamp(cos_d, -1.0, 1.0));
}

}  // namespace ssdf_detail

// Exposed for tests: exact transform of a single visibility layer.
// Returns (D <= 0, B) per direction.
inline void distance_transform_2d(const SphericalGridSpec &spec, const std::vector<uint8_t> &visible,
                                  std::vector<double> &D_out, std::vector<int32_t> &B_out) {
    SphericalTables tb(spec);
    std::vector<double> cos_d(spec.n_dirs());
    D_out.resize(spec.n_dirs());
    B_out.resize(spec.n_dirs());
    std::vector<int32_t> g, v;
    std::vector<double> z;
    ssdf_detail::transform_layer(spec, tb, visible.data(), cos_d.data(), B_out.data(), g, v, z);
    for (int d = 0; d < spec.n_dirs(); ++d) D_out[d] = ssdf_detail::to_signed_distance(cos_d[d]);
}

// Ground-truth builder: applies the 2-D transform independently to every
// radial layer.
inline SsdfVolume build_ssdf_bruteforce(const VisibilityMap &vm) {
    const SphericalGridSpec &spec = vm.spec;
    SphericalTables tb(spec);
    SsdfVolume vol;
    vol.spec = spec;
    vol.stamp = spec.stamp;
    const int nd = spec.n_dirs(), nr = spec.n_r;
    vol.D.resize(static_cast<size_t>(nd) * nr);
    vol.B.resize(static_cast<size_t>(nd) * nr);

    std::vector<uint8_t> vis(nd);
    std::vector<double> cos_d(nd);
    std::vector<int32_t> g, v;
    std::vector<double> z;
    for (int k = 0; k < nr; ++k) {
        for (int d = 0; d < nd; ++d) vis[d] = vm.visible(d, k) ? 1 : 0;
        ssdf_detail::transform_layer(spec, tb, vis.data(), cos_d.data(), vol.layer_b(k), g, v, z);
        double *D = vol.layer_d(k);
        for (int d = 0; d < nd; ++d) D[d] = ssdf_detail::to_signed_distance(cos_d[d]);
    }
    return vol;
}

// Incremental builder: full transform on the outermost layer, then BFS
// insertion of the newly visible directions per inner layer. Distances can
// only shrink inward, so each layer reuses the previous one.
inline SsdfVolume build_ssdf_incremental(const VisibilityMap &vm) {
    const SphericalGridSpec &spec = vm.spec;
    SphericalTables tb(spec);
    SsdfVolume vol;
    vol.spec = spec;
    vol.stamp = spec.stamp;
    const int nt = spec.n_theta, np = spec.n_phi, nr = spec.n_r;
    const int nd = nt * np;
    vol.D.resize(static_cast<size_t>(nd) * nr);
    vol.B.resize(static_cast<size_t>(nd) * nr);

    std::vector<double> cos_d(nd);
    std::vector<int32_t> bnd(nd);
    {
        std::vector<uint8_t> vis(nd, 0);
        for (int32_t d : vm.S[nr]) vis[d] = 1;
        std::vector<int32_t> g, v;
        std::vector<double> z;
        ssdf_detail::transform_layer(spec, tb, vis.data(), cos_d.data(), bnd.data(), g, v, z);
        double *D = vol.layer_d(nr - 1);
        int32_t *B = vol.layer_b(nr - 1);
        for (int d = 0; d < nd; ++d) {
            D[d] = ssdf_detail::to_signed_distance(cos_d[d]);
            B[d] = bnd[d];
        }
    }

    std::vector<int32_t> changed;
    std::vector<uint8_t> is_changed(nd, 0);
    std::deque<int32_t> queue;
    changed.reserve(nd);

    auto touch = [&](int32_t d) {
        if (!is_changed[d]) {
            is_changed[d] = 1;
            changed.push_back(d);
        }
    };

    for (int k = nr - 2; k >= 0; --k) {
        changed.clear();
        queue.clear();
        for (int32_t d : vm.S[k + 1]) {
            cos_d[d] = 1.0;
            bnd[d] = d;
            touch(d);
            queue.push_back(d);
        }
        while (!queue.empty()) {
            int32_t d = queue.front();
            queue.pop_front();
            int i = d / np, j = d % np;
            int32_t bd = bnd[d];
            int bi = bd / np, bj = bd % np;
            for (int di = -1; di <= 1; ++di) {
                int mi = i + di;
                if (mi < 0 || mi >= nt) continue;
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    int mj = j + dj;
                    if (mj < 0) mj += np;
                    else if (mj >= np) mj -= np;
                    int32_t m = spec.dir(mi, mj);
                    double cand = tb.cos_between(bi, bj, mi, mj);
                    if (cand > cos_d[m]) {
                        cos_d[m] = cand;
                        bnd[m] = bd;
                        touch(m);
                        queue.push_back(m);
                    }
                }
            }
        }
        const double *Dp = vol.layer_d(k + 1);
        const int32_t *Bp = vol.layer_b(k + 1);
        double *D = vol.layer_d(k);
        int32_t *B = vol.layer_b(k);
        std::copy(Dp, Dp + nd, D);
        std::copy(Bp, Bp + nd, B);
        for (int32_t d : changed) {
            D[d] = ssdf_detail::to_signed_distance(cos_d[d]);
            B[d] = bnd[d];
            is_changed[d] = 0;
        }
    }
    return vol;
}

// --- Interpolated query ------------------------------------------------------

// Trilinear interpolation of D at a world position. Radial and polar axes
// clamp (the field extends constant past its bounds); azimuth wraps. The
// origin itself reports 0 (the target's own cell is treated as visible).
inline double ssdf_query(const SsdfVolume &vol, const Vec3 &p) {
    const SphericalGridSpec &spec = vol.spec;
    Vec3 rel = p - spec.origin;
    double r = rel.norm();
    if (r < 1e-9) return 0.0;
    double theta = std::acos(clamp(rel.z() / r, -1.0, 1.0));
    double phi = std::atan2(rel.y(), rel.x());
    if (phi < 0.0) phi += kTwoPi;

    double gt = clamp(theta / spec.dang - 0.5, 0.0, static_cast<double>(spec.n_theta - 1));
    double gr = clamp(r / spec.dr - 0.5, 0.0, static_cast<double>(spec.n_r - 1));
    double gp = phi / spec.dang - 0.5;

    int i0 = static_cast<int>(std::floor(gt));
    i0 = std::min(i0, spec.n_theta - 2);
    int i1 = i0 + 1;
    double ft = gt - i0;

    int k0 = static_cast<int>(std::floor(gr));
    k0 = std::min(k0, spec.n_r - 2);
    int k1 = k0 + 1;
    double fr = gr - k0;

    int j0 = static_cast<int>(std::floor(gp));
    double fp = gp - j0;
    j0 %= spec.n_phi;
    if (j0 < 0) j0 += spec.n_phi;
    int j1 = (j0 + 1) % spec.n_phi;

    auto at = [&](int i, int j, int k) { return vol.D[vol.cell(i, j, k)]; };
    double v = 0.0;
    for (int dk = 0; dk <= 1; ++dk) {
        double wk = dk ? fr : 1.0 - fr;
        for (int di = 0; di <= 1; ++di) {
            double wi = di ? ft : 1.0 - ft;
            for (int dj = 0; dj <= 1; ++dj) {
                double wj = dj ? fp : 1.0 - fp;
                v += wk * wi * wj * at(di ? i1 : i0, dj ? j1 : j0, dk ? k1 : k0);
            }
        }
    }
    return v;
}

// Cartesian gradient of the interpolant. Zero at the origin and on the polar
// axis (spherical Jacobian singularity), zero along clamped axes.
inline Vec3 ssdf_gradient(const SsdfVolume &vol, const Vec3 &p) {
    const SphericalGridSpec &spec = vol.spec;
    Vec3 rel = p - spec.origin;
    double r = rel.norm();
    if (r < 1e-9) return Vec3::Zero();
    double st_raw = std::sqrt(rel.x() * rel.x() + rel.y() * rel.y()) / r;
    if (st_raw < 1e-6) return Vec3::Zero();
    double theta = std::acos(clamp(rel.z() / r, -1.0, 1.0));
    double phi = std::atan2(rel.y(), rel.x());
    if (phi < 0.0) phi += kTwoPi;

    double gt_raw = theta / spec.dang - 0.5;
    double gr_raw = r / spec.dr - 0.5;
    bool t_clamped = gt_raw <= 0.0 || gt_raw >= spec.n_theta - 1;
    bool r_clamped = gr_raw <= 0.0 || gr_raw >= spec.n_r - 1;
    double gt = clamp(gt_raw, 0.0, static_cast<double>(spec.n_theta - 1));
    double gr = clamp(gr_raw, 0.0, static_cast<double>(spec.n_r - 1));
    double gp = phi / spec.dang - 0.5;

    int i0 = std::min(static_cast<int>(std::floor(gt)), spec.n_theta - 2);
    int i1 = i0 + 1;
    double ft = gt - i0;
    int k0 = std::min(static_cast<int>(std::floor(gr)), spec.n_r - 2);
    int k1 = k0 + 1;
    double fr = gr - k0;
    int j0 = static_cast<int>(std::floor(gp));
    double fp = gp - j0;
    j0 %= spec.n_phi;
    if (j0 < 0) j0 += spec.n_phi;
    int j1 = (j0 + 1) % spec.n_phi;

    auto at = [&](int i, int j, int k) { return vol.D[vol.cell(i, j, k)]; };
    double d_dt = 0.0, d_dp = 0.0, d_dr = 0.0;
    for (int dk = 0; dk <= 1; ++dk) {
        double wk = dk ? fr : 1.0 - fr;
        double sk = dk ? 1.0 : -1.0;
        for (int di = 0; di <= 1; ++di) {
            double wi = di ? ft : 1.0 - ft;
            double si = di ? 1.0 : -1.0;
            for (int dj = 0; dj <= 1; ++dj) {
                double wj = dj ? fp : 1.0 - fp;
                double sj = dj ? 1.0 : -1.0;
                double val = at(di ? i1 : i0, dj ? j1 : j0, dk ? k1 : k0);
                d_dt += si * wj * wk * val;
                d_dp += sj * wi * wk * val;
                d_dr += sk * wi * wj * val;
            }
        }
    }
    double dD_dtheta = t_clamped ? 0.0 : d_dt / spec.dang;
    double dD_dphi = d_dp / spec.dang;
    double dD_dr = r_clamped ? 0.0 : d_dr / spec.dr;

    double ct = clamp(rel.z() / r, -1.0, 1.0), st = st_raw;
    double cp = std::cos(phi), sp = std::sin(phi);
    Vec3 grad_theta(ct * cp / r, ct * sp / r, -st / r);
    Vec3 grad_phi(-sp / (r * st), cp / (r * st), 0.0);
    Vec3 grad_r = rel / r;
    return dD_dtheta * grad_theta + dD_dphi * grad_phi + dD_dr * grad_r;
}

// --- Debug dump --------------------------------------------------------------

// One file: a JSON header line, then the flat D array as little-endian doubles.
inline void ssdf_dump(const SsdfVolume &vol, const std::string &path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("ssdf_dump: cannot open " + path);
    nlohmann::json hdr;
    hdr["origin"] = {vol.spec.origin.x(), vol.spec.origin.y(), vol.spec.origin.z()};
    hdr["r_max"] = vol.spec.r_max;
    hdr["dr"] = vol.spec.dr;
    hdr["dang"] = vol.spec.dang;
    hdr["n_theta"] = vol.spec.n_theta;
    hdr["n_phi"] = vol.spec.n_phi;
    hdr["n_r"] = vol.spec.n_r;
    hdr["stamp"] = vol.stamp;
    std::string h = hdr.dump();
    f << h << '\n';
    f.write(reinterpret_cast<const char *>(vol.D.data()), sizeof(double) * vol.D.size());
}

inline SsdfVolume ssdf_load(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("ssdf_load: cannot open " + path);
    std::string line;
    std::getline(f, line);
    nlohmann::json hdr = nlohmann::json::parse(line);
    SsdfVolume vol;
    vol.spec = SphericalGridSpec(
        Vec3(hdr["origin"][0], hdr["origin"][1], hdr["origin"][2]), hdr["r_max"], hdr["dr"],
        hdr["dang"], hdr["stamp"]);
    vol.stamp = hdr["stamp"];
    vol.D.resize(static_cast<size_t>(vol.spec.n_dirs()) * vol.spec.n_r);
    vol.B.assign(vol.D.size(), -1);
    f.read(reinterpret_cast<char *>(vol.D.data()), sizeof(double) * vol.D.size());
    return vol;
}

}  // namespace vast
