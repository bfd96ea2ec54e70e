#include "vast/kino_search.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <functional>

using namespace vast;
using Catch::Approx;

namespace {

OccupancyGrid open_grid() {
    OccupancyGrid g;
    g.init(Vec3::Zero(), 0.1, Vec3i(200, 200, 60));
    return g;
}

SsdfVolume zero_volume(const Vec3 &origin) {
    OccupancyGrid g = open_grid();
    SphericalGridSpec spec(origin, 3.0, 0.3, 0.3);
    return build_ssdf_bruteforce(update_visibility_map(g, spec, 0));
}

TargetPrediction static_prediction(const Vec3 &pos, int steps, double dt) {
    TargetEstimate est;
    est.position = pos;
    return predict(est, dt, steps * dt);
}

}  // namespace

TEST_CASE("expansion propagates the double integrator", "[kino]") {
    SearchNode n;
    n.p = Vec3(1.0, 2.0, 3.0);
    n.v = Vec3::Zero();
    auto children = expand(n, 4.0, 0.3);
    REQUIRE(children.size() == 27);

    // u = 0 keeps the position.
    auto still = std::find_if(children.begin(), children.end(),
                              [](const SearchNode &c) { return c.u == Vec3::Zero(); });
    REQUIRE(still != children.end());
    REQUIRE(still->p == n.p);
    REQUIRE(still->v == Vec3::Zero());

    // u = (a_max, 0, 0): dx = 0.5 * 4 * 0.09 = 0.18, vx = 1.2.
    auto ax = std::find_if(children.begin(), children.end(),
                           [](const SearchNode &c) { return c.u == Vec3(4.0, 0.0, 0.0); });
    REQUIRE(ax != children.end());
    REQUIRE(ax->p.x() == Approx(1.18));
    REQUIRE(ax->v.x() == Approx(1.2));
    REQUIRE(ax->depth == 1);
}

TEST_CASE("pruning rejects occupied, fast and crowded children", "[kino]") {
    OccupancyGrid g = open_grid();
    detail::rasterize_box(g, Vec3(9.9, 9.9, 0.0), Vec3(10.3, 10.3, 6.0));
    TrackingParams prm;
    prm.v_max = 3.0;
    prm.r_s = 1.0;

    SearchNode inside;
    inside.p = Vec3(10.1, 10.1, 2.0);
    SearchNode fast;
    fast.p = Vec3(5.0, 5.0, 2.0);
    fast.v = Vec3(3.1, 0, 0);
    SearchNode near_mate;
    near_mate.p = Vec3(5.0, 5.0, 2.0);
    SearchNode at_boundary;
    at_boundary.p = Vec3(5.0, 5.0 + prm.r_s + 1e-6, 2.0);
    SearchNode outside_grid;
    outside_grid.p = Vec3(100.0, 5.0, 2.0);

    std::vector<Vec3> mates{Vec3(5.0, 5.0, 2.0)};
    auto kept = prune({inside, fast, near_mate, at_boundary, outside_grid}, g, mates, prm,
                      Vec3(5.0, 4.0, 2.0), false);
    REQUIRE(kept.size() == 1);
    REQUIRE(kept[0].p == at_boundary.p);
}

TEST_CASE("search stays put when already at a zero-cost vantage", "[kino]") {
    OccupancyGrid g = open_grid();
    Vec3 target(10.0, 10.0, 2.0);
    TargetPrediction pred = static_prediction(target, 6, 0.3);
    std::vector<SsdfVolume> vols;
    for (int k = 0; k <= 6; ++k) vols.push_back(zero_volume(target));

    TrackingParams prm;
    CostWeights w;
    w.w_frm = 0.0;  // no teammates anyway
    KinoConfig cfg;
    Vec3 start = target + Vec3(2.0, 0.0, 0.0);  // inside the distance band
    std::vector<std::vector<Vec3>> mates(7);
    FrontEndPath path = kino_search(start, Vec3::Zero(), pred, vols, mates,
                                    [&g](const Vec3 &p) { return g.state(p); }, prm, w, cfg);
    REQUIRE_FALSE(path.degraded);
    REQUIRE(path.states.size() == 7);
    for (const auto &s : path.states) {
        REQUIRE((s.p - start).norm() <= 0.1001);  // within one voxel
        REQUIRE(s.v.norm() <= prm.v_max);
    }
    REQUIRE(path.cost <= 1e-9);
}

TEST_CASE("stamps align with depth and the horizon is reached", "[kino]") {
    OccupancyGrid g = open_grid();
    Vec3 target(10.0, 10.0, 2.0);
    TargetPrediction pred = static_prediction(target, 6, 0.3);
    std::vector<SsdfVolume> vols;
    for (int k = 0; k <= 6; ++k) vols.push_back(zero_volume(target));
    TrackingParams prm;
    CostWeights w;
    KinoConfig cfg;
    std::vector<std::vector<Vec3>> mates(7);
    FrontEndPath path = kino_search(Vec3(6.0, 10.0, 2.0), Vec3::Zero(), pred, vols, mates,
                                    [&g](const Vec3 &p) { return g.state(p); }, prm, w, cfg);
    REQUIRE(path.states.size() == 7);
    for (int k = 0; k < 7; ++k) REQUIRE(path.states[k].stamp == Approx(0.3 * k));
    // Consecutive states satisfy the propagation under the recorded control.
    for (int k = 1; k < 7; ++k) {
        const auto &a = path.states[k - 1];
        const auto &b = path.states[k];
        REQUIRE((b.p - (a.p + a.v * 0.3 + 0.5 * b.u * 0.09)).norm() <= 1e-12);
        REQUIRE((b.v - (a.v + b.u * 0.3)).norm() <= 1e-12);
        REQUIRE(b.v.norm() <= prm.v_max + 1e-12);
    }
}

TEST_CASE("optimal on toy instances with bucketing disabled", "[kino]") {
    // 3-step exhaustive oracle; all costs nonnegative and the heuristic off,
    // so the first goal pop is provably minimal.
    OccupancyGrid g = open_grid();
    detail::rasterize_box(g, Vec3(9.0, 8.0, 0.0), Vec3(9.4, 12.0, 6.0));  // wall
    Vec3 target(11.0, 10.0, 2.0);
    int steps = 3;
    double dt = 0.3;
    TargetPrediction pred = static_prediction(target, steps, dt);
    std::vector<SsdfVolume> vols;
    {
        SphericalGridSpec spec(target, 3.0, 0.2, 0.2);
        VisibilityMap vm = update_visibility_map(g, spec, 0);
        for (int k = 0; k <= steps; ++k) vols.push_back(build_ssdf_bruteforce(vm));
    }
    TrackingParams prm;
    CostWeights w;
    w.w_toc = w.w_frm = 0.0;
    KinoConfig cfg;
    cfg.bucketing = false;
    cfg.w_heuristic = 0.0;
    cfg.max_expansions = 100000;
    std::vector<std::vector<Vec3>> mates(steps + 1);
    Vec3 start(8.0, 10.0, 2.0), sv(0.0, 0.0, 0.0);
    auto state_fn = [&g](const Vec3 &p) { return g.state(p); };
    FrontEndPath path = kino_search(start, sv, pred, vols, mates, state_fn, prm, w, cfg);
    REQUIRE_FALSE(path.degraded);

    // Exhaustive enumeration over all pruned control sequences.
    double best = std::numeric_limits<double>::infinity();
    std::function<void(SearchNode, int, double)> enumerate = [&](SearchNode n, int depth,
                                                                 double run) {
        if (depth == steps) {
            best = std::min(best, run);
            return;
        }
        auto children = expand(n, prm.a_max, dt);
        children = prune(std::move(children), state_fn, {}, prm, n.p, cfg.check_edge_midpoint);
        for (auto &c : children) {
            double sc = w.w_vis * cost_visibility(vols[depth + 1], c.p).value +
                        w.w_dis * cost_distance(c.p, pred.points[depth + 1], prm).value;
            enumerate(c, depth + 1, run + sc);
        }
    };
    SearchNode root;
    root.p = start;
    root.v = sv;
    enumerate(root, 0, 0.0);
    REQUIRE(path.cost <= best + 1e-9);
    REQUIRE(path.cost == Approx(best).margin(1e-9));
}

TEST_CASE("target behind a wall: terminal node escapes occlusion", "[kino]") {
    OccupancyGrid g = open_grid();
    // Wall between the start and the target, with free space above and around.
    detail::rasterize_box(g, Vec3(9.5, 8.5, 0.0), Vec3(9.9, 11.5, 3.5));
    Vec3 target(11.5, 10.0, 2.0);
    int steps = 6;
    TargetPrediction pred = static_prediction(target, steps, 0.3);
    SphericalGridSpec spec(target, 4.0, 0.2, 0.15);
    VisibilityMap vm = update_visibility_map(g, spec, 1);
    std::vector<SsdfVolume> vols;
    for (int k = 0; k <= steps; ++k) vols.push_back(build_ssdf_bruteforce(vm));

    TrackingParams prm;
    prm.v_max = 3.5;
    CostWeights w;
    w.w_toc = w.w_frm = 0.0;
    w.w_vis = 20.0;
    KinoConfig cfg;
    cfg.max_expansions = 20000;
    std::vector<std::vector<Vec3>> mates(steps + 1);
    Vec3 start(8.2, 10.0, 2.0);  // occluded by the wall initially
    REQUIRE(cost_visibility(vols[0], start).value > 0.0);
    FrontEndPath path = kino_search(start, Vec3::Zero(), pred, vols, mates,
                                    [&g](const Vec3 &p) { return g.state(p); }, prm, w, cfg);
    REQUIRE_FALSE(path.degraded);
    REQUIRE(cost_visibility(vols[steps], path.states.back().p).value == 0.0);
}

TEST_CASE("blocked-in start degrades to a partial path", "[kino]") {
    OccupancyGrid g = open_grid();
    Vec3 start(10.0, 10.0, 2.0);
    detail::rasterize_box(g, Vec3(9.0, 9.0, 0.0), Vec3(11.0, 11.0, 6.0));
    // Hollow out the start voxel so the root is free but every child is not.
    Vec3i v = g.voxel_of(start);
    g.cells[g.index(v.x(), v.y(), v.z())] = 0;

    TargetPrediction pred = static_prediction(Vec3(15.0, 10.0, 2.0), 6, 0.3);
    std::vector<SsdfVolume> vols;
    for (int k = 0; k <= 6; ++k) vols.push_back(zero_volume(Vec3(15.0, 10.0, 2.0)));
    TrackingParams prm;
    CostWeights w;
    KinoConfig cfg;
    std::vector<std::vector<Vec3>> mates(7);
    // Moving fast enough that every child lands inside the surrounding box.
    FrontEndPath path = kino_search(start, Vec3(3.0, 0.0, 0.0), pred, vols, mates,
                                    [&g](const Vec3 &p) { return g.state(p); }, prm, w, cfg);
    REQUIRE(path.degraded);
    REQUIRE(path.states.size() >= 1);
}
