#pragma once

#include "vast/types.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace vast {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SphericalCoord {
    double theta;  // polar angle from +z, [0, pi]
    double phi;    // azimuth from +x, [0, 2*pi)
    double r;
};

// p != origin required; the degenerate query is signalled to the caller.
inline SphericalCoord to_spherical(const Vec3 &p, const Vec3 &origin) {
    Vec3 d = p - origin;
    double r = d.norm();
    if (r < 1e-12) throw std::domain_error("to_spherical: query coincides with origin");
    double theta = std::acos(clamp(d.z() / r, -1.0, 1.0));
    double phi = std::atan2(d.y(), d.x());
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi = 0.0;
    return {theta, phi, r};
}

// Central angle between two directions by the spherical law of cosines,
// clamped against round-off.
inline double angular_distance(double theta_u, double phi_u, double theta_v, double phi_v) {
    double c = std::cos(theta_u) * std::cos(theta_v) +
               std::sin(theta_u) * std::sin(theta_v) * std::cos(std::abs(phi_u - phi_v));
    return std::acos(clamp(c, -1.0, 1.0));
}

// Latitude theta0 on meridian phi0 equidistant (in angular distance) from v1
// and v2. Three-branch form; the single-intersection property guarantees
// uniqueness for v1 != v2.
inline double theta_intersection(double theta1, double phi1, double theta2, double phi2,
                                 double phi0) {
    double P = std::sin(theta1) * std::cos(phi1 - phi0);
    double Q = std::sin(theta2) * std::cos(phi2 - phi0);
    double R = std::cos(theta2) - std::cos(theta1);
    if (P == Q) return 0.5 * kPi;
    double ratio = R / (P - Q);
    double t = std::atan(ratio);
    return ratio >= 0.0 ? t : t + kPi;
}

// Spherical grid around a target point. Cell centers: theta_i = (i+0.5)*dang,
// phi_j = (j+0.5)*dang, r_k covering [k*dr, (k+1)*dr).
struct SphericalGridSpec {
    Vec3 origin = Vec3::Zero();
    double r_max = 5.0;
    double dr = 0.1;
    double dang = 0.1;
    int n_theta = 0, n_phi = 0, n_r = 0;
    double stamp = 0.0;

    SphericalGridSpec() { derive(); }
    SphericalGridSpec(const Vec3 &orig, double rmax, double dr_, double dang_, double stamp_ = 0.0)
        : origin(orig), r_max(rmax), dr(dr_), dang(dang_), stamp(stamp_) {
        derive();
    }

    void derive() {
        if (dr <= 0.0 || dang <= 0.0 || r_max <= 0.0)
            throw std::invalid_argument("SphericalGridSpec: positive resolutions required");
        n_theta = static_cast<int>(std::lround(kPi / dang));
        n_phi = static_cast<int>(std::lround(kTwoPi / dang));
        n_r = static_cast<int>(std::lround(r_max / dr));
        if (n_theta < 2 || n_phi < 2 || n_r < 2)
            throw std::invalid_argument("SphericalGridSpec: grid too coarse (all counts must be >= 2)");
    }

    double theta_of(int i) const { return (i + 0.5) * dang; }
    double phi_of(int j) const { return (j + 0.5) * dang; }
    double r_of(int k) const { return (k + 0.5) * dr; }

    int theta_index(double theta) const {
        int i = static_cast<int>(std::floor(theta / dang));
        return i < 0 ? 0 : (i >= n_theta ? n_theta - 1 : i);
    }
    int phi_index(double phi) const {
        int j = static_cast<int>(std::floor(phi / dang));
        j %= n_phi;
        return j < 0 ? j + n_phi : j;
    }
    int r_index(double r) const { return static_cast<int>(std::floor(r / dr)); }

    int n_dirs() const { return n_theta * n_phi; }
    int dir(int i, int j) const { return i * n_phi + j; }
};

// Precomputed cell-center trigonometry shared by the distance transforms.
struct SphericalTables {
    std::vector<double> cos_t, sin_t, cos_p, sin_p, theta, phi;
    int n_theta = 0, n_phi = 0;

    explicit SphericalTables(const SphericalGridSpec &spec)
        : n_theta(spec.n_theta), n_phi(spec.n_phi) {
        cos_t.resize(n_theta);
        sin_t.resize(n_theta);
        theta.resize(n_theta);
        for (int i = 0; i < n_theta; ++i) {
            theta[i] = spec.theta_of(i);
            cos_t[i] = std::cos(theta[i]);
            sin_t[i] = std::sin(theta[i]);
        }
        cos_p.resize(n_phi);
        sin_p.resize(n_phi);
        phi.resize(n_phi);
        for (int j = 0; j < n_phi; ++j) {
            phi[j] = spec.phi_of(j);
            cos_p[j] = std::cos(phi[j]);
            sin_p[j] = std::sin(phi[j]);
        }
    }

    double cos_dphi(int j1, int j2) const {
        return cos_p[j1] * cos_p[j2] + sin_p[j1] * sin_p[j2];
    }

    // Cosine of the angular distance between two cell-center directions.
    // Larger means closer; comparisons stay in cosine space.
    double cos_between(int i1, int j1, int i2, int j2) const {
        return cos_t[i1] * cos_t[i2] + sin_t[i1] * sin_t[i2] * cos_dphi(j1, j2);
    }
};

}  // namespace vast
