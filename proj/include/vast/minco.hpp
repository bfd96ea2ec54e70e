#pragma once

#include "vast/banded_lu.hpp"
#include "vast/types.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace vast {

namespace poly_detail {

// beta^{(k)}(t)_a = a!/(a-k)! * t^(a-k) for the monomial basis of size n.
inline void basis(int n, double t, int order, Eigen::Ref<Eigen::VectorXd> out) {
    out.setZero();
    double tp = 1.0;
    for (int a = order; a < n; ++a) {
        double f = 1.0;
        for (int q = 0; q < order; ++q) f *= a - q;
        out(a) = f * tp;
        tp *= t;
    }
}

inline double falling(int a, int k) {
    double f = 1.0;
    for (int q = 0; q < k; ++q) f *= a - q;
    return f;
}

}  // namespace poly_detail

// Piecewise polynomial of degree 2s-1 with M pieces over [0, sum(T)].
// Coefficients are stored piece-major: rows [p*2s, (p+1)*2s) hold piece p in
// ascending monomial order, one column per dimension.
struct PolyTrajectory {
    int s = 4;
    int dims = 3;
    Eigen::VectorXd T;
    Eigen::MatrixXd coeffs;

    int pieces() const { return static_cast<int>(T.size()); }
    int block() const { return 2 * s; }
    double duration() const { return T.sum(); }

    // Piece index and relative time for an absolute t in [0, duration].
    std::pair<int, double> locate(double t) const {
        double dur = duration();
        if (t < -1e-9 || t > dur + 1e-9)
            log_warn("PolyTrajectory: t=%.6f outside [0, %.6f], clamping", t, dur);
        t = clamp(t, 0.0, dur);
        int p = 0;
        while (p + 1 < pieces() && t > T(p)) {
            t -= T(p);
            ++p;
        }
        return {p, t};
    }

    Eigen::VectorXd eval_piece(int p, double tr, int order) const {
        Eigen::VectorXd beta(block());
        poly_detail::basis(block(), tr, order, beta);
        return coeffs.middleRows(p * block(), block()).transpose() * beta;
    }

    Eigen::VectorXd evaluate(double t, int order) const {
        auto [p, tr] = locate(t);
        return eval_piece(p, tr, order);
    }

    Vec3 pos(double t) const { return evaluate(t, 0); }
    Vec3 vel(double t) const { return evaluate(t, 1); }
    Vec3 acc(double t) const { return evaluate(t, 2); }
};

inline nlohmann::json traj_to_json(const PolyTrajectory &tr) {
    nlohmann::json j;
    j["s"] = tr.s;
    j["dims"] = tr.dims;
    j["T"] = std::vector<double>(tr.T.data(), tr.T.data() + tr.T.size());
    std::vector<double> c(tr.coeffs.data(), tr.coeffs.data() + tr.coeffs.size());
    j["coeffs"] = c;
    return j;
}

inline PolyTrajectory traj_from_json(const nlohmann::json &j) {
    PolyTrajectory tr;
    tr.s = j.at("s");
    tr.dims = j.at("dims");
    std::vector<double> T = j.at("T");
    tr.T = Eigen::Map<Eigen::VectorXd>(T.data(), T.size());
    std::vector<double> c = j.at("coeffs");
    tr.coeffs = Eigen::Map<Eigen::MatrixXd>(c.data(), 2 * tr.s * tr.T.size(), tr.dims);
    return tr;
}

// Minimum-control-effort interpolation: given boundary derivatives up to
// order s-1, interior waypoints and piece times, solves the banded system
// whose solution is the unique minimizer of the integrated squared s-th
// derivative. The same factorization backs the adjoint (gradient) pass.
class Minco {
 public:
    Minco(int s, int dims) : s_(s), dims_(dims) {}

    // head/tail: dims x s (column r = boundary derivative of order r).
    void set_conditions(const Eigen::MatrixXd &head, const Eigen::MatrixXd &tail, int pieces) {
        if (head.rows() != dims_ || head.cols() != s_ || tail.rows() != dims_ || tail.cols() != s_)
            throw std::invalid_argument("Minco: boundary dimensions mismatch");
        if (pieces < 1) throw std::invalid_argument("Minco: need at least one piece");
        head_ = head;
        tail_ = tail;
        M_ = pieces;
    }

    // rho: dims x (M-1); T: M positive piece times. Returns the trajectory.
    const PolyTrajectory &set_parameters(const Eigen::MatrixXd &rho, const Eigen::VectorXd &T) {
        if (T.size() != M_) throw std::invalid_argument("Minco: T size must equal piece count");
        if ((T.array() <= 0.0).any())
            throw std::invalid_argument("Minco: piece times must be positive");
        if (M_ > 1 && (rho.rows() != dims_ || rho.cols() != M_ - 1))
            throw std::invalid_argument("Minco: rho must be dims x (M-1)");

        const int b = 2 * s_, n = b * M_;
        lu_.reset(n, s_ + 1, s_ - 1);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, dims_);

        for (int r = 0; r < s_; ++r) {
            lu_(r, r) = poly_detail::falling(r, r);
            rhs.row(r) = head_.col(r).transpose();
        }
        Eigen::VectorXd beta(b);
        for (int p = 0; p + 1 < M_; ++p) {
            const int base = s_ + p * b;
            const double Tp = T(p);
            poly_detail::basis(b, Tp, 0, beta);
            for (int a = 0; a < b; ++a) lu_(base, p * b + a) = beta(a);
            rhs.row(base) = rho.col(p).transpose();
            for (int k = 0; k <= b - 2; ++k) {
                const int row = base + 1 + k;
                poly_detail::basis(b, Tp, k, beta);
                for (int a = k; a < b; ++a) lu_(row, p * b + a) = beta(a);
                lu_(row, (p + 1) * b + k) = -poly_detail::falling(k, k);
            }
        }
        const int base_e = s_ + (M_ - 1) * b;
        for (int r = 0; r < s_; ++r) {
            poly_detail::basis(b, T(M_ - 1), r, beta);
            for (int a = r; a < b; ++a) lu_(base_e + r, (M_ - 1) * b + a) = beta(a);
            rhs.row(base_e + r) = tail_.col(r).transpose();
        }

        lu_.factorize();
        lu_.solve(rhs, false);
        traj_.s = s_;
        traj_.dims = dims_;
        traj_.T = T;
        traj_.coeffs = rhs;
        return traj_;
    }

    const PolyTrajectory &trajectory() const { return traj_; }

    // Adjoint of the construction: maps partials w.r.t. coefficients and
    // times to partials w.r.t. waypoints, times and boundary conditions.
    void propagate_gradients(const Eigen::MatrixXd &grad_coeffs,
                             const Eigen::VectorXd &grad_T_direct, Eigen::MatrixXd &grad_rho,
                             Eigen::VectorXd &grad_T, Eigen::MatrixXd &grad_head,
                             Eigen::MatrixXd &grad_tail) const {
        const int b = 2 * s_, n = b * M_;
        if (grad_coeffs.rows() != n || grad_coeffs.cols() != dims_)
            throw std::invalid_argument("Minco: grad_coeffs shape mismatch");
        Eigen::MatrixXd lambda = grad_coeffs;
        lu_.solve(lambda, true);

        grad_rho.setZero(dims_, std::max(0, M_ - 1));
        grad_head.setZero(dims_, s_);
        grad_tail.setZero(dims_, s_);
        grad_T = grad_T_direct;

        for (int r = 0; r < s_; ++r) grad_head.col(r) = lambda.row(r).transpose();
        const int base_e = s_ + (M_ - 1) * b;
        for (int r = 0; r < s_; ++r) grad_tail.col(r) = lambda.row(base_e + r).transpose();

        for (int p = 0; p + 1 < M_; ++p) {
            const int base = s_ + p * b;
            grad_rho.col(p) = lambda.row(base).transpose();
            // d(A c)/dT_p on the junction rows is the next-order derivative of
            // piece p at T_p.
            Eigen::VectorXd d1 = traj_.eval_piece(p, traj_.T(p), 1);
            grad_T(p) -= lambda.row(base).dot(d1);
            for (int k = 0; k <= b - 2; ++k) {
                Eigen::VectorXd dk1 = traj_.eval_piece(p, traj_.T(p), k + 1);
                grad_T(p) -= lambda.row(base + 1 + k).dot(dk1);
            }
        }
        for (int r = 0; r < s_; ++r) {
            Eigen::VectorXd dr1 = traj_.eval_piece(M_ - 1, traj_.T(M_ - 1), r + 1);
            grad_T(M_ - 1) -= lambda.row(base_e + r).dot(dr1);
        }
    }

    int pieces() const { return M_; }

 private:
    int s_, dims_, M_ = 0;
    Eigen::MatrixXd head_, tail_;
    BandedLU lu_;
    PolyTrajectory traj_;
};

// Integrated squared s-th derivative with exact gradients.
struct ControlEffort {
    double value = 0.0;
    Eigen::MatrixXd grad_coeffs;
    Eigen::VectorXd grad_T;
};

inline ControlEffort control_effort(const PolyTrajectory &tr) {
    const int s = tr.s, b = tr.block(), M = tr.pieces(), dims = tr.dims;
    ControlEffort out;
    out.grad_coeffs.setZero(b * M, dims);
    out.grad_T.setZero(M);
    for (int p = 0; p < M; ++p) {
        const double Tp = tr.T(p);
        auto cb = tr.coeffs.middleRows(p * b, b);
        for (int a = s; a < b; ++a) {
            double mu_a = poly_detail::falling(a, s);
            for (int c = s; c < b; ++c) {
                double mu_c = poly_detail::falling(c, s);
                int pw = a + c - 2 * s + 1;
                double integ = mu_a * mu_c * std::pow(Tp, pw) / pw;
                for (int d = 0; d < dims; ++d) {
                    out.value += cb(a, d) * cb(c, d) * integ;
                    out.grad_coeffs(p * b + a, d) += 2.0 * cb(c, d) * integ;
                }
            }
        }
        out.grad_T(p) += tr.eval_piece(p, Tp, s).squaredNorm();
    }
    return out;
}

}  // namespace vast
