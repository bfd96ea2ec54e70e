#pragma once

#include "vast/costs.hpp"
#include "vast/target_estimator.hpp"

#include <queue>
#include <span>
#include <unordered_map>

namespace vast {

struct SearchNode {
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 u = Vec3::Zero();  // control applied to reach this node
    int depth = 0;
    double g = 0.0;
    double effort = 0.0;  // accumulated |u|^2, tie-breaker only
    int parent = -1;
};

struct FrontEndState {
    Vec3 p, v, u;
    double stamp;  // k * dt from the cycle start
};

struct FrontEndPath {
    std::vector<FrontEndState> states;
    double cost = 0.0;
    bool degraded = false;
    int nodes_expanded = 0;
};

struct KinoConfig {
    double w_heuristic = 30.0;  // weight on the remaining-horizon bias
    double bucket_pos = 0.2;
    double bucket_vel = 0.5;
    bool bucketing = true;
    int max_expansions = 4000;
    bool check_edge_midpoint = true;
};

// 27 double-integrator children: per-axis accelerations {-a_max, 0, +a_max}.
inline std::vector<SearchNode> expand(const SearchNode &node, double a_max, double dt) {
    std::vector<SearchNode> children;
    children.reserve(27);
    const double acc[3] = {-a_max, 0.0, a_max};
    for (double ux : acc)
        for (double uy : acc)
            for (double uz : acc) {
                SearchNode c;
                c.u = Vec3(ux, uy, uz);
                c.p = node.p + node.v * dt + 0.5 * c.u * dt * dt;
                c.v = node.v + c.u * dt;
                c.depth = node.depth + 1;
                c.g = node.g;
                c.effort = node.effort + c.u.squaredNorm();
                children.push_back(c);
            }
    return children;
}

// Rejects children in occupied/unknown space, over the speed limit, or within
// r_s of a teammate at the matching stamp.
template <class StateFn>
std::vector<SearchNode> prune(std::vector<SearchNode> children, const StateFn &state_at,
                              std::span<const Vec3> teammates_at_stamp, const TrackingParams &prm,
                              const Vec3 &parent_p, bool check_midpoint = true) {
    std::vector<SearchNode> kept;
    kept.reserve(children.size());
    for (SearchNode &c : children) {
        if (state_at(c.p) != Occupancy::Free) continue;
        if (check_midpoint && state_at(0.5 * (parent_p + c.p)) != Occupancy::Free) continue;
        if (c.v.norm() > prm.v_max) continue;
        bool unsafe = false;
        for (const Vec3 &q : teammates_at_stamp)
            if ((c.p - q).norm() <= prm.r_s) {
                unsafe = true;
                break;
            }
        if (unsafe) continue;
        kept.push_back(std::move(c));
    }
    return kept;
}

inline std::vector<SearchNode> prune(std::vector<SearchNode> children, const OccupancyGrid &grid,
                                     std::span<const Vec3> teammates_at_stamp,
                                     const TrackingParams &prm, const Vec3 &parent_p,
                                     bool check_midpoint = true) {
    return prune(std::move(children), [&grid](const Vec3 &p) { return grid.state(p); },
                 teammates_at_stamp, prm, parent_p, check_midpoint);
}

// Best-first search over motion primitives time-aligned with the target
// prediction. Node cost: w . [J_vis, J_dis, J_toc, J_frm] at the node stamp;
// heuristic: remaining horizon scaled by w_heuristic. Ties break toward the
// deeper stamp, then insertion order (deterministic).
template <class StateFn>
FrontEndPath kino_search(const Vec3 &start_p, const Vec3 &start_v,
                         const TargetPrediction &prediction, std::span<const SsdfVolume> volumes,
                         const std::vector<std::vector<Vec3>> &teammates_at,
                         const StateFn &state_at, const TrackingParams &prm,
                         const CostWeights &w, const KinoConfig &cfg) {
    const int n_steps = prediction.steps;
    const double dt = prediction.dt;

    std::vector<SearchNode> arena;
    arena.reserve(1024);
    SearchNode root;
    root.p = start_p;
    root.v = start_v;
    arena.push_back(root);

    struct OpenEntry {
        double f;
        int depth;
        double effort;
        int seq;
        int idx;
    };
    auto worse = [](const OpenEntry &a, const OpenEntry &b) {
        if (a.f != b.f) return a.f > b.f;
        if (a.depth != b.depth) return a.depth < b.depth;
        if (a.effort != b.effort) return a.effort > b.effort;
        return a.seq > b.seq;
    };
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, decltype(worse)> open(worse);
    int seq = 0;
    auto heuristic = [&](int depth) { return cfg.w_heuristic * (n_steps - depth) * dt; };
    open.push({root.g + heuristic(0), 0, 0.0, seq++, 0});

    struct BucketKey {
        int64_t px, py, pz;
        int32_t vx, vy, vz, depth;
        bool operator==(const BucketKey &o) const {
            return px == o.px && py == o.py && pz == o.pz && vx == o.vx && vy == o.vy &&
                   vz == o.vz && depth == o.depth;
        }
    };
    struct BucketHash {
        size_t operator()(const BucketKey &k) const {
            size_t h = 1469598103934665603ull;
            auto mix = [&h](int64_t v) {
                h ^= static_cast<size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            };
            mix(k.px);
            mix(k.py);
            mix(k.pz);
            mix(k.vx);
            mix(k.vy);
            mix(k.vz);
            mix(k.depth);
            return h;
        }
    };
    std::unordered_map<BucketKey, double, BucketHash> best_g;
    auto bucket_of = [&](const SearchNode &n) {
        BucketKey k;
        k.px = static_cast<int64_t>(std::floor(n.p.x() / cfg.bucket_pos));
        k.py = static_cast<int64_t>(std::floor(n.p.y() / cfg.bucket_pos));
        k.pz = static_cast<int64_t>(std::floor(n.p.z() / cfg.bucket_pos));
        k.vx = static_cast<int32_t>(std::floor(n.v.x() / cfg.bucket_vel));
        k.vy = static_cast<int32_t>(std::floor(n.v.y() / cfg.bucket_vel));
        k.vz = static_cast<int32_t>(std::floor(n.v.z() / cfg.bucket_vel));
        k.depth = n.depth;
        return k;
    };

    FrontEndPath out;
    int expansions = 0;
    int best_partial = 0;  // deepest then cheapest fallback
    int goal_idx = -1;

    while (!open.empty()) {
        OpenEntry top = open.top();
        open.pop();
        const SearchNode node = arena[top.idx];
        if (cfg.bucketing) {
            auto it = best_g.find(bucket_of(node));
            if (it != best_g.end() && it->second < node.g) continue;  // stale entry
        }
        if (node.depth == n_steps) {
            goal_idx = top.idx;
            break;
        }
        if (expansions++ >= cfg.max_expansions) break;

        const SearchNode &bp = arena[best_partial];
        if (node.depth > bp.depth || (node.depth == bp.depth && node.g < bp.g))
            best_partial = top.idx;

        int k = node.depth + 1;
        std::vector<SearchNode> children = expand(node, prm.a_max, dt);
        std::span<const Vec3> mates =
            k < static_cast<int>(teammates_at.size()) ? std::span<const Vec3>(teammates_at[k])
                                                      : std::span<const Vec3>();
        children = prune(std::move(children), state_at, mates, prm, node.p,
                         cfg.check_edge_midpoint);
        const Vec3 &xi = prediction.points[k];
        const SsdfVolume *vol = k < static_cast<int>(volumes.size()) ? &volumes[k] : nullptr;
        for (SearchNode &c : children) {
            double step_cost = 0.0;
            if (vol && w.w_vis > 0.0) step_cost += w.w_vis * cost_visibility(*vol, c.p).value;
            if (w.w_dis > 0.0) step_cost += w.w_dis * cost_distance(c.p, xi, prm).value;
            if (w.w_toc > 0.0 && !mates.empty())
                step_cost += w.w_toc * cost_teammate_occlusion(c.p, xi, mates, prm.theta_c).value;
            if (w.w_frm > 0.0 && !mates.empty())
                step_cost += w.w_frm * cost_formation(c.p, mates, prm.k_e).value;
            c.g = node.g + step_cost;
            c.parent = top.idx;
            if (cfg.bucketing) {
                BucketKey key = bucket_of(c);
                auto it = best_g.find(key);
                if (it != best_g.end() && it->second <= c.g) continue;
                best_g[key] = c.g;
            }
            arena.push_back(c);
            open.push({c.g + heuristic(c.depth), c.depth, c.effort, seq++,
                       static_cast<int>(arena.size()) - 1});
        }
    }

    out.nodes_expanded = expansions;
    int tail = goal_idx;
    if (tail < 0) {
        out.degraded = true;
        tail = best_partial;
    }
    out.cost = arena[tail].g;
    std::vector<FrontEndState> rev;
    for (int idx = tail; idx >= 0; idx = arena[idx].parent)
        rev.push_back({arena[idx].p, arena[idx].v, arena[idx].u, arena[idx].depth * dt});
    out.states.assign(rev.rbegin(), rev.rend());
    return out;
}

}  // namespace vast
