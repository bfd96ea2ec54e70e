#pragma once

#include "vast/corridor.hpp"
#include "vast/ssdf.hpp"

#include <span>

namespace vast {

// Sensor field of view attached to the body frame. Omnidirectional sensors
// constrain elevation only; conic sensors additionally require the heading to
// face the target. theta_ctr is the elevation of the vertical-FOV bisector
// above the horizon; t_bl the body-to-sensor offset.
struct FovConfig {
    enum class Kind { Omni, Conic };
    Kind kind = Kind::Omni;
    double theta_vrt = 1.02;   // vertical extent (rad)
    double theta_ctr = 0.0;    // bisector elevation (rad)
    Vec3 t_bl = Vec3::Zero();  // sensor offset in body frame (m)
    double theta_hrz = 1.22;   // conic horizontal extent, evaluation only

    void validate() const {
        if (!(theta_vrt > 0.0 && theta_vrt < kPi))
            throw std::invalid_argument("FovConfig: theta_vrt must lie in (0, pi)");
    }
};

struct TrackingParams {
    double d_lb = 1.5;
    double d_ub = 2.5;
    double theta_c = 0.6;
    double k_e = 1.0;
    double r_s = 1.0;
    double v_max = 3.0;
    double a_max = 6.0;
    double omega_max = 3.0;

    void validate() const {
        if (!(0.0 < d_lb && d_lb < d_ub)) throw std::invalid_argument("TrackingParams: need 0 < d_lb < d_ub");
        if (!(theta_c > 0.0 && theta_c < kPi)) throw std::invalid_argument("TrackingParams: theta_c in (0, pi)");
        if (r_s <= 0.0) throw std::invalid_argument("TrackingParams: r_s > 0");
        if (v_max <= 0.0 || a_max <= 0.0 || omega_max <= 0.0)
            throw std::invalid_argument("TrackingParams: dynamic limits > 0");
    }
};

struct CostWeights {
    // Front-end node scoring.
    double w_vis = 8.0, w_dis = 1.5, w_toc = 2.0, w_frm = 0.5;
    // Back-end discrete (tracking) penalties.
    double lam_vis = 400.0, lam_fov = 60.0, lam_dis = 120.0, lam_toc = 150.0, lam_frm = 4.0;
    // Back-end continuous penalties.
    double lam_obs = 8000.0, lam_dyn = 500.0, lam_swm = 4000.0;

    void validate() const {
        for (double w : {w_vis, w_dis, w_toc, w_frm, lam_vis, lam_fov, lam_dis, lam_toc, lam_frm,
                         lam_obs, lam_dyn, lam_swm})
            if (w < 0.0) throw std::invalid_argument("CostWeights: weights must be >= 0");
    }
};

// Cubic smoothing of an inequality violation: C2, zero on the feasible side.
// Applied by the planners to the signed raw violations (FOV terms, corridor
// rows, dynamic limits); costs whose published form already carries its own
// penalty shape (distance, teammate occlusion, swarm clearance) are used as
// returned.
struct Smoothed {
    double value;
    double dvalue;
};

inline Smoothed smooth_penalty(double x) {
    if (x <= 0.0) return {0.0, 0.0};
    return {x * x * x, 3.0 * x * x};
}

struct ValueGrad {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();
};

// Occlusion penalty: -D(p) >= 0, zero where visible.
inline ValueGrad cost_visibility(const SsdfVolume &vol, const Vec3 &p) {
    return {-ssdf_query(vol, p), -ssdf_gradient(vol, p)};
}

// FOV alignment. Raw terms are the signed violations; value is the smoothed
// penalty (vertical, plus horizontal for conic sensors).
struct FovCost {
    double value = 0.0;
    Vec3 grad_p = Vec3::Zero();
    double grad_yaw = 0.0;
    double vrt_raw = 0.0;
    double hrz_raw = 0.0;
    bool degenerate = false;  // target on the sensor's vertical axis
};

inline FovCost cost_fov(const FovConfig &cfg, const Vec3 &p, double yaw, const Vec3 &target) {
    FovCost out;
    double cy = std::cos(yaw), sy = std::sin(yaw);
    Vec3 w = target - p;
    // Body frame via yaw-only attitude, then the fixed sensor offset.
    Vec3 v(cy * w.x() + sy * w.y(), -sy * w.x() + cy * w.y(), w.z());
    v -= cfg.t_bl;

    double x = v.x(), y = v.y(), zc = v.z();
    double rho2 = x * x + y * y;
    double rho = std::sqrt(rho2);
    double n2 = rho2 + zc * zc;
    double n = std::sqrt(n2);
    if (n < 1e-9) {
        out.degenerate = true;
        return out;
    }

    double cctr = std::cos(cfg.theta_ctr), sctr = std::sin(cfg.theta_ctr);
    // Alignment cosine between the target bearing and the FOV bisector plane:
    // (rho*cos(theta_ctr) + z*sin(theta_ctr)) / |v|.
    double u = rho * cctr + zc * sctr;
    double f = u / n;
    out.vrt_raw = std::cos(0.5 * cfg.theta_vrt) - f;

    Vec3 df_dv = Vec3::Zero();
    if (rho < 1e-9) {
        out.degenerate = true;  // bearing straight along the axis; keep value, drop xy gradient
        df_dv.z() = sctr / n - u * zc / (n2 * n);
    } else {
        df_dv.x() = (x / rho) * cctr / n - u * x / (n2 * n);
        df_dv.y() = (y / rho) * cctr / n - u * y / (n2 * n);
        df_dv.z() = sctr / n - u * zc / (n2 * n);
    }

    Smoothed sv = smooth_penalty(out.vrt_raw);
    Vec3 dJ_dv = -sv.dvalue * df_dv;
    out.value = sv.value;

    if (cfg.kind == FovConfig::Kind::Conic) {
        if (rho < 1e-9) {
            out.hrz_raw = 1.0;  // undefined heading; treat as fully misaligned
            out.value += smooth_penalty(out.hrz_raw).value;
        } else {
            out.hrz_raw = 1.0 - x / rho;
            Smoothed sh = smooth_penalty(out.hrz_raw);
            out.value += sh.value;
            double rho3 = rho2 * rho;
            dJ_dv.x() += sh.dvalue * (-y * y / rho3);
            dJ_dv.y() += sh.dvalue * (x * y / rho3);
        }
    }

    // v = Rz(yaw)^T (target - p) - t_bl
    Vec3 dv_dyaw(-sy * w.x() + cy * w.y(), -cy * w.x() - sy * w.y(), 0.0);
    out.grad_yaw = dv_dyaw.dot(dJ_dv);
    // d v / d p = -Rz(yaw)^T, so grad_p = -Rz(yaw) * dJ_dv.
    out.grad_p = Vec3(-(cy * dJ_dv.x() - sy * dJ_dv.y()), -(sy * dJ_dv.x() + cy * dJ_dv.y()),
                      -dJ_dv.z());
    return out;
}

// Tracking distance band: steep cubic below d_lb, mild quadratic above d_ub.
inline ValueGrad cost_distance(const Vec3 &p, const Vec3 &target, const TrackingParams &prm) {
    Vec3 diff = p - target;
    double d = diff.norm();
    ValueGrad out;
    if (d < 1e-9) {
        out.value = 5.0 * prm.d_lb * prm.d_lb * prm.d_lb;
        return out;  // direction undefined; gradient defined as zero
    }
    if (d < prm.d_lb) {
        double e = prm.d_lb - d;
        out.value = 5.0 * e * e * e;
        out.grad = (-15.0 * e * e / d) * diff;
    } else if (d > prm.d_ub) {
        double e = d - prm.d_ub;
        out.value = 0.5 * e * e;
        out.grad = (e / d) * diff;
    }
    return out;
}

// Angular clearance around the target: sum of (eta_j - cos(theta_c))^3 over
// teammates inside the clearance cone. Teammates are constants here.
inline ValueGrad cost_teammate_occlusion(const Vec3 &p_i, const Vec3 &target,
                                         std::span<const Vec3> teammates, double theta_c) {
    ValueGrad out;
    Vec3 a = p_i - target;
    double na = a.norm();
    if (na < 1e-9) return out;  // degenerate geometry, maximally penalized elsewhere
    double cth = std::cos(theta_c);
    for (const Vec3 &pj : teammates) {
        Vec3 b = pj - target;
        double nb = b.norm();
        if (nb < 1e-9) continue;
        Vec3 bh = b / nb;
        double eta = a.dot(bh) / na;
        double x = eta - cth;
        if (x <= 0.0) continue;
        out.value += x * x * x;
        Vec3 deta = (bh - eta * a / na) / na;
        out.grad += 3.0 * x * x * deta;
    }
    return out;
}

// Logarithmic electrostatic distribution energy; repels the ego from
// teammates so the swarm spreads around the target.
inline ValueGrad cost_formation(const Vec3 &p_i, std::span<const Vec3> teammates, double k_e) {
    ValueGrad out;
    for (const Vec3 &pj : teammates) {
        Vec3 d = p_i - pj;
        double r2 = d.squaredNorm();
        if (r2 < 1e-18) {
            out.value += k_e * std::log(1e9);  // singular energy, clamped
            continue;
        }
        out.value += -0.5 * k_e * std::log(r2);
        out.grad += (-k_e / r2) * d;
    }
    return out;
}

// Per-face signed corridor violations A p - b; the rows of A are the exact
// gradients.
inline Eigen::VectorXd cost_corridor(const Polyhedron &poly, const Vec3 &p) {
    return poly.A * p - poly.b;
}

// Raw dynamic-limit violation |v|^2 - limit^2 with gradient 2 v.
inline ValueGrad cost_dynamics(const Vec3 &v, double limit) {
    return {v.squaredNorm() - limit * limit, 2.0 * v};
}

// Reciprocal clearance max{r_s^2 - |p_i - p_j|^2, 0}.
struct SwarmClearance {
    double value = 0.0;
    Vec3 grad_pi = Vec3::Zero();
    Vec3 grad_pj = Vec3::Zero();
};

inline SwarmClearance cost_swarm_clearance(const Vec3 &p_i, const Vec3 &p_j, double r_s) {
    SwarmClearance out;
    Vec3 d = p_i - p_j;
    double x = r_s * r_s - d.squaredNorm();
    if (x <= 0.0) return out;
    out.value = x;
    out.grad_pi = -2.0 * d;
    out.grad_pj = 2.0 * d;
    return out;
}

}  // namespace vast
