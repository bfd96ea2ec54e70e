#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace vast {

// Limited-memory BFGS with a bracketing weak-Wolfe line search. Handles the
// C0/C1 kinks the penalty terms can produce.
struct LbfgsParams {
    int memory = 8;
    int max_iterations = 200;
    int max_linesearch = 60;
    double g_epsilon = 1e-5;     // infinity norm of the gradient
    double delta = 1e-8;         // relative decrease over the past window
    int past = 3;
    double f_dec_coeff = 1e-4;   // Armijo
    double s_curv_coeff = 0.9;   // weak Wolfe curvature
};

enum class LbfgsStatus { Converged, Stagnated, MaxIterations, LineSearchFailed };

struct LbfgsResult {
    LbfgsStatus status = LbfgsStatus::MaxIterations;
    double fx = 0.0;
    int iterations = 0;
    int evaluations = 0;
    double gnorm_inf = 0.0;
};

// cost(x, grad) -> f, filling grad.
inline LbfgsResult lbfgs_minimize(
    Eigen::VectorXd &x, const std::function<double(const Eigen::VectorXd &, Eigen::VectorXd &)> &cost,
    const LbfgsParams &prm = {}) {
    const int n = static_cast<int>(x.size());
    LbfgsResult res;
    Eigen::VectorXd g(n), gp(n), xp(n), d(n);
    double fx = cost(x, g);
    ++res.evaluations;
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> hist;  // (s, y)
    std::deque<double> past_f{fx};

    for (int iter = 0; iter < prm.max_iterations; ++iter) {
        res.iterations = iter;
        res.gnorm_inf = g.cwiseAbs().maxCoeff();
        if (res.gnorm_inf < prm.g_epsilon) {
            res.status = LbfgsStatus::Converged;
            break;
        }

        // Two-loop recursion.
        d = -g;
        std::vector<double> alpha(hist.size());
        for (int h = static_cast<int>(hist.size()) - 1; h >= 0; --h) {
            const auto &[sh, yh] = hist[h];
            alpha[h] = sh.dot(d) / yh.dot(sh);
            d -= alpha[h] * yh;
        }
        if (!hist.empty()) {
            const auto &[sb, yb] = hist.back();
            d *= sb.dot(yb) / yb.squaredNorm();
        }
        for (size_t h = 0; h < hist.size(); ++h) {
            const auto &[sh, yh] = hist[h];
            double beta = yh.dot(d) / yh.dot(sh);
            d += (alpha[h] - beta) * sh;
        }

        double dg0 = d.dot(g);
        if (dg0 >= 0.0) {  // not a descent direction; restart from steepest
            hist.clear();
            d = -g;
            dg0 = d.dot(g);
        }

        xp = x;
        gp = g;
        const double f0 = fx;
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        double step = 1.0 / std::max(1.0, d.norm());
        if (!hist.empty()) step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < prm.max_linesearch; ++ls) {
            x = xp + step * d;
            fx = cost(x, g);
            ++res.evaluations;
            if (!std::isfinite(fx) || fx > f0 + prm.f_dec_coeff * step * dg0) {
                hi = step;
            } else if (d.dot(g) < prm.s_curv_coeff * dg0) {
                lo = step;
            } else {
                accepted = true;
                break;
            }
            step = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * step;
        }
        if (!accepted) {
            if (std::isfinite(fx) && fx < f0) {
                // Keep the best point found; treat as a weak accept.
            } else {
                x = xp;
                g = gp;
                fx = f0;
                res.status = LbfgsStatus::LineSearchFailed;
                break;
            }
        }

        Eigen::VectorXd s = x - xp;
        Eigen::VectorXd y = g - gp;
        double ys = y.dot(s);
        if (ys > 1e-10 * y.squaredNorm()) {
            hist.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(hist.size()) > prm.memory) hist.pop_front();
        }

        past_f.push_back(fx);
        if (static_cast<int>(past_f.size()) > prm.past + 1) past_f.pop_front();
        if (static_cast<int>(past_f.size()) == prm.past + 1) {
            double rel = (past_f.front() - fx) / std::max({1.0, std::abs(fx)});
            if (rel < prm.delta) {
                res.status = LbfgsStatus::Stagnated;
                break;
            }
        }
    }
    res.fx = fx;
    res.gnorm_inf = g.cwiseAbs().maxCoeff();
    return res;
}

}  // namespace vast
