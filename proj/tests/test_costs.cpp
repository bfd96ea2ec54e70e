#include "vast/costs.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace vast;
using Catch::Approx;

namespace {

std::mt19937_64 rng(2718);

Vec3 random_vec(double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    return Vec3(u(rng), u(rng), u(rng));
}

// Central finite differences over a position argument.
template <class F>
Vec3 fd_grad(F &&f, const Vec3 &p, double h = 1e-5) {
    Vec3 g;
    for (int ax = 0; ax < 3; ++ax) {
        Vec3 e = Vec3::Zero();
        e[ax] = h;
        g[ax] = (f(p + e) - f(p - e)) / (2 * h);
    }
    return g;
}

double rel_err(const Vec3 &a, const Vec3 &b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("distance cost branches", "[costs]") {
    TrackingParams prm;
    prm.d_lb = 1.5;
    prm.d_ub = 2.5;
    Vec3 target(1.0, 2.0, 1.0);

    // Inside the band: zero.
    REQUIRE(cost_distance(target + Vec3(2.0, 0, 0), target, prm).value == 0.0);
    // One meter past the upper bound: (d - d_ub)^2 / 2 = 0.5.
    REQUIRE(cost_distance(target + Vec3(3.5, 0, 0), target, prm).value == Approx(0.5));
    // One meter under the lower bound: 5 * 1^3 = 5.
    REQUIRE(cost_distance(target + Vec3(0.5, 0, 0), target, prm).value == Approx(5.0));
    // Coincident: value 5*d_lb^3, zero gradient.
    auto c0 = cost_distance(target, target, prm);
    REQUIRE(c0.value == Approx(5.0 * 1.5 * 1.5 * 1.5));
    REQUIRE(c0.grad == Vec3::Zero());
    // Gradient is continuous at both knots: zero exactly there, O(eps) beside.
    for (double d : {1.5, 2.5}) {
        REQUIRE(cost_distance(target + Vec3(d, 0, 0), target, prm).grad.norm() == 0.0);
    }
    for (double d : {1.5 - 1e-7, 1.5 + 1e-7, 2.5 - 1e-7, 2.5 + 1e-7}) {
        auto c = cost_distance(target + Vec3(d, 0, 0), target, prm);
        REQUIRE(c.grad.norm() < 1e-6);
    }
}

TEST_CASE("distance cost gradient vs finite differences", "[costs]") {
    TrackingParams prm;
    Vec3 target = random_vec(-2, 2);
    for (int n = 0; n < 100; ++n) {
        Vec3 p = target + random_vec(-4, 4);
        double d = (p - target).norm();
        if (d < 0.05 || std::abs(d - prm.d_lb) < 1e-3 || std::abs(d - prm.d_ub) < 1e-3) continue;
        auto c = cost_distance(p, target, prm);
        Vec3 g = fd_grad([&](const Vec3 &q) { return cost_distance(q, target, prm).value; }, p);
        REQUIRE(rel_err(c.grad, g) <= 1e-4);
    }
}

TEST_CASE("teammate occlusion cost values", "[costs]") {
    Vec3 target(0, 0, 0);
    double theta_c = kPi / 3.0;  // cos = 0.5
    Vec3 ego(2.0, 0, 0);

    // Boundary: eta = cos(theta_c) exactly -> 0.
    double cth = std::cos(theta_c);
    Vec3 mate_at_boundary(2.0 * cth, 2.0 * std::sin(theta_c), 0.0);
    std::vector<Vec3> mates{mate_at_boundary};
    REQUIRE(cost_teammate_occlusion(ego, target, mates, theta_c).value ==
            Approx(0.0).margin(1e-12));

    // Collinear behind ego: eta = 1 -> (1 - 0.5)^3 = 0.125.
    mates = {Vec3(4.0, 0, 0)};
    REQUIRE(cost_teammate_occlusion(ego, target, mates, theta_c).value == Approx(0.125));
}

TEST_CASE("teammate occlusion gradient vs finite differences", "[costs]") {
    double theta_c = 0.6;
    int tested = 0;
    for (int n = 0; n < 400 && tested < 100; ++n) {
        Vec3 target = random_vec(-1, 1);
        Vec3 p = target + random_vec(-3, 3);
        if ((p - target).norm() < 0.2) continue;
        std::vector<Vec3> mates;
        for (int m = 0; m < 3; ++m) {
            Vec3 q = target + random_vec(-3, 3);
            if ((q - target).norm() > 0.2) mates.push_back(q);
        }
        // Avoid the penalty activation boundary where FD straddles the kink.
        bool near_kink = false;
        for (const Vec3 &q : mates) {
            double eta = (p - target).normalized().dot((q - target).normalized());
            if (std::abs(eta - std::cos(theta_c)) < 1e-3) near_kink = true;
        }
        if (near_kink) continue;
        auto c = cost_teammate_occlusion(p, target, mates, theta_c);
        Vec3 g = fd_grad(
            [&](const Vec3 &q) { return cost_teammate_occlusion(q, target, mates, theta_c).value; },
            p);
        REQUIRE(rel_err(c.grad, g) <= 1e-4);
        ++tested;
    }
    REQUIRE(tested == 100);
}

TEST_CASE("formation cost basics and symmetry", "[costs]") {
    // log(1/1) = 0 at unit distance.
    std::vector<Vec3> one{Vec3(1.0, 0, 0)};
    REQUIRE(cost_formation(Vec3::Zero(), one, 1.0).value == Approx(0.0).margin(1e-12));

    // Translation invariance and teammate relabeling symmetry.
    Vec3 p = random_vec(-2, 2);
    std::vector<Vec3> mates{random_vec(-2, 2), random_vec(-2, 2), random_vec(-2, 2)};
    auto base = cost_formation(p, mates, 1.3);
    Vec3 shift(0.7, -1.1, 2.2);
    std::vector<Vec3> shifted;
    for (auto &m : mates) shifted.push_back(m + shift);
    auto moved = cost_formation(p + shift, shifted, 1.3);
    REQUIRE(moved.value == Approx(base.value));
    REQUIRE((moved.grad - base.grad).norm() < 1e-12);

    std::vector<Vec3> relabeled{mates[2], mates[0], mates[1]};
    auto rel = cost_formation(p, relabeled, 1.3);
    REQUIRE(rel.value == Approx(base.value));
    REQUIRE((rel.grad - base.grad).norm() < 1e-12);
}

TEST_CASE("formation gradient vs finite differences", "[costs]") {
    int tested = 0;
    for (int n = 0; n < 300 && tested < 100; ++n) {
        Vec3 p = random_vec(-3, 3);
        std::vector<Vec3> mates{random_vec(-3, 3), random_vec(-3, 3)};
        if ((p - mates[0]).norm() < 0.2 || (p - mates[1]).norm() < 0.2) continue;
        auto c = cost_formation(p, mates, 0.8);
        Vec3 g = fd_grad([&](const Vec3 &q) { return cost_formation(q, mates, 0.8).value; }, p);
        REQUIRE(rel_err(c.grad, g) <= 1e-4);
        ++tested;
    }
    REQUIRE(tested == 100);
}

TEST_CASE("corridor cost is the signed face violation", "[costs]") {
    Polyhedron poly;
    poly.A.resize(6, 3);
    poly.b.resize(6);
    poly.A << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
    poly.b << 1, 1, 1, 1, 1, 1;  // unit cube around the origin

    Eigen::VectorXd rows = cost_corridor(poly, Vec3::Zero());
    REQUIRE((rows.array() < 0.0).all());

    rows = cost_corridor(poly, Vec3(2.0, 0, 0));
    REQUIRE(rows(0) == Approx(1.0));  // one meter outside the +x face

    // Exact linear gradient: finite differences to machine precision.
    Vec3 p = random_vec(-2, 2);
    for (int face = 0; face < 6; ++face) {
        Vec3 g = fd_grad([&](const Vec3 &q) { return cost_corridor(poly, q)(face); }, p, 1e-6);
        REQUIRE((g - poly.A.row(face).transpose()).norm() <= 1e-6);
    }
}

TEST_CASE("dynamics cost raw violation", "[costs]") {
    double limit = 2.0;
    REQUIRE(cost_dynamics(Vec3(2.0, 0, 0), limit).value == Approx(0.0).margin(1e-12));
    REQUIRE(cost_dynamics(Vec3(limit + 1.0, 0, 0), limit).value == Approx(2.0 * limit + 1.0));
    REQUIRE(smooth_penalty(cost_dynamics(Vec3::Zero(), limit).value).value == 0.0);
    Vec3 v = random_vec(-3, 3);
    auto c = cost_dynamics(v, limit);
    REQUIRE((c.grad - 2.0 * v).norm() < 1e-12);
}

TEST_CASE("swarm clearance values", "[costs]") {
    double r_s = 1.0;
    Vec3 pi(0, 0, 0);
    REQUIRE(cost_swarm_clearance(pi, Vec3(r_s, 0, 0), r_s).value == 0.0);
    REQUIRE(cost_swarm_clearance(pi, pi, r_s).value == Approx(r_s * r_s));
    REQUIRE(cost_swarm_clearance(pi, Vec3(0.5 * r_s, 0, 0), r_s).value == Approx(0.75 * r_s * r_s));

    // FD check away from the activation boundary.
    for (int n = 0; n < 100; ++n) {
        Vec3 pj = random_vec(-0.6, 0.6);
        double d = pj.norm();
        if (d < 0.05 || std::abs(d - r_s) < 1e-3) continue;
        auto c = cost_swarm_clearance(pi, pj, r_s);
        Vec3 g = fd_grad([&](const Vec3 &q) { return cost_swarm_clearance(q, pj, r_s).value; }, pi);
        REQUIRE((c.grad_pi - g).norm() <= 1e-6);
    }
}

TEST_CASE("fov cost geometry", "[costs]") {
    FovConfig omni;
    omni.kind = FovConfig::Kind::Omni;
    omni.theta_vrt = 1.0;
    omni.theta_ctr = 0.3;

    // Target exactly on the bisector: raw term negative, smoothed zero.
    Vec3 p(0, 0, 1.0);
    double yaw = 0.7;
    double range = 2.0;
    Vec3 bisector_body(std::cos(omni.theta_ctr), 0.0, std::sin(omni.theta_ctr));
    Vec3 bisector_world(std::cos(yaw) * bisector_body.x(), std::sin(yaw) * bisector_body.x(),
                        bisector_body.z());
    Vec3 target = p + range * bisector_world;
    FovCost fc = cost_fov(omni, p, yaw, target);
    REQUIRE(fc.vrt_raw == Approx(std::cos(0.5) - 1.0).margin(1e-12));
    REQUIRE(fc.value == 0.0);

    FovConfig conic = omni;
    conic.kind = FovConfig::Kind::Conic;
    conic.theta_ctr = 0.0;
    // Straight ahead: horizontal term zero.
    FovCost ahead = cost_fov(conic, p, 0.0, p + Vec3(3.0, 0, 0));
    REQUIRE(ahead.hrz_raw == Approx(0.0).margin(1e-12));
    // Directly behind: horizontal term 1 - (-1) = 2.
    FovCost behind = cost_fov(conic, p, 0.0, p + Vec3(-3.0, 0, 0));
    REQUIRE(behind.hrz_raw == Approx(2.0));
}

TEST_CASE("fov cost is 2*pi periodic in yaw", "[costs]") {
    FovConfig conic;
    conic.kind = FovConfig::Kind::Conic;
    conic.theta_vrt = 1.2;
    conic.theta_ctr = 0.1;
    conic.t_bl = Vec3(0.05, 0.0, 0.08);
    for (int n = 0; n < 50; ++n) {
        Vec3 p = random_vec(-2, 2);
        Vec3 t = p + random_vec(-3, 3);
        if ((t - p).norm() < 0.3) continue;
        std::uniform_real_distribution<double> uy(-kPi, kPi);
        double yaw = uy(rng);
        FovCost a = cost_fov(conic, p, yaw, t);
        FovCost b = cost_fov(conic, p, yaw + kTwoPi, t);
        REQUIRE(a.value == Approx(b.value).margin(1e-9));
    }
}

TEST_CASE("fov gradients vs finite differences", "[costs]") {
    for (auto kind : {FovConfig::Kind::Omni, FovConfig::Kind::Conic}) {
        FovConfig cfg;
        cfg.kind = kind;
        cfg.theta_vrt = 0.9;
        cfg.theta_ctr = 0.25;
        cfg.t_bl = Vec3(0.1, 0.0, 0.05);
        int tested = 0;
        for (int n = 0; n < 600 && tested < 100; ++n) {
            Vec3 p = random_vec(-2, 2);
            Vec3 t = p + random_vec(-3, 3);
            std::uniform_real_distribution<double> uy(-kPi, kPi);
            double yaw = uy(rng);
            Vec3 w = t - p;
            if (w.norm() < 0.4 || std::hypot(w.x(), w.y()) < 0.3) continue;
            FovCost c = cost_fov(cfg, p, yaw, t);
            // Skip activation boundaries (smoothing kink at raw = 0).
            if (std::abs(c.vrt_raw) < 1e-3) continue;
            if (kind == FovConfig::Kind::Conic && std::abs(c.hrz_raw) < 1e-3) continue;
            Vec3 gp = fd_grad([&](const Vec3 &q) { return cost_fov(cfg, q, yaw, t).value; }, p);
            double gy = (cost_fov(cfg, p, yaw + 1e-5, t).value -
                         cost_fov(cfg, p, yaw - 1e-5, t).value) /
                        2e-5;
            REQUIRE(rel_err(c.grad_p, gp) <= 1e-4);
            REQUIRE(std::abs(c.grad_yaw - gy) / std::max(1.0, std::abs(gy)) <= 1e-4);
            ++tested;
        }
        REQUIRE(tested == 100);
    }
}

TEST_CASE("costs are nonnegative after smoothing and zero on the feasible set", "[costs]") {
    TrackingParams prm;
    for (int n = 0; n < 200; ++n) {
        Vec3 target = random_vec(-2, 2);
        Vec3 p = target + random_vec(-4, 4);
        if ((p - target).norm() < 0.1) continue;
        REQUIRE(cost_distance(p, target, prm).value >= 0.0);
        std::vector<Vec3> mates{target + random_vec(-3, 3)};
        REQUIRE(cost_teammate_occlusion(p, target, mates, prm.theta_c).value >= 0.0);
        REQUIRE(cost_swarm_clearance(p, mates[0], prm.r_s).value >= 0.0);
        REQUIRE(smooth_penalty(cost_dynamics(random_vec(-4, 4), prm.v_max).value).value >= 0.0);
        FovConfig cfg;
        double far = std::hypot(p.x() - target.x(), p.y() - target.y());
        if (far > 0.3) REQUIRE(cost_fov(cfg, p, 0.0, target).value >= 0.0);
    }
}
