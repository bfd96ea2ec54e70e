#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace vast {

// LU factorization of a banded matrix with partial pivoting (LAPACK GB
// layout). Supports solves with the matrix and its transpose, which the
// trajectory gradient propagation needs.
class BandedLU {
 public:
    BandedLU() = default;
    BandedLU(int n, int kl, int ku) { reset(n, kl, ku); }

    void reset(int n, int kl, int ku) {
        n_ = n;
        kl_ = kl;
        ku_ = ku;
        ab_.setZero(2 * kl + ku + 1, n);
        ipiv_.assign(n, 0);
        factored_ = false;
    }

    double &operator()(int i, int j) { return ab_(kl_ + ku_ + i - j, j); }
    double operator()(int i, int j) const { return ab_(kl_ + ku_ + i - j, j); }

    void factorize() {
        const int n = n_, kl = kl_, ku = ku_;
        for (int j = 0; j < n; ++j) {
            int km = std::min(kl, n - 1 - j);
            int piv = j;
            double pmax = std::abs(ab_(kl + ku, j));
            for (int i = j + 1; i <= j + km; ++i) {
                double v = std::abs(ab_(kl + ku + i - j, j));
                if (v > pmax) {
                    pmax = v;
                    piv = i;
                }
            }
            ipiv_[j] = piv;
            if (pmax == 0.0) throw std::runtime_error("BandedLU: singular matrix");
            int jend = std::min(n - 1, j + kl + ku);
            if (piv != j)
                for (int c = j; c <= jend; ++c)
                    std::swap(ab_(kl + ku + piv - c, c), ab_(kl + ku + j - c, c));
            double pivot = ab_(kl + ku, j);
            for (int i = j + 1; i <= j + km; ++i) ab_(kl + ku + i - j, j) /= pivot;
            for (int c = j + 1; c <= jend; ++c) {
                double ujc = ab_(kl + ku + j - c, c);
                if (ujc == 0.0) continue;
                for (int i = j + 1; i <= j + km; ++i)
                    ab_(kl + ku + i - c, c) -= ab_(kl + ku + i - j, j) * ujc;
            }
        }
        factored_ = true;
    }

    // Solves A X = B (or A^T X = B) in place, column by column.
    void solve(Eigen::Ref<Eigen::MatrixXd> B, bool transpose = false) const {
        if (!factored_) throw std::logic_error("BandedLU: factorize first");
        const int n = n_, kl = kl_, ku = ku_;
        for (int col = 0; col < B.cols(); ++col) {
            auto x = B.col(col);
            if (!transpose) {
                for (int j = 0; j < n; ++j) {
                    if (ipiv_[j] != j) std::swap(x(j), x(ipiv_[j]));
                    int km = std::min(kl, n - 1 - j);
                    for (int i = j + 1; i <= j + km; ++i) x(i) -= ab_(kl + ku + i - j, j) * x(j);
                }
                for (int j = n - 1; j >= 0; --j) {
                    x(j) /= ab_(kl + ku, j);
                    int i0 = std::max(0, j - kl - ku);
                    for (int i = i0; i < j; ++i) x(i) -= ab_(kl + ku + i - j, j) * x(j);
                }
            } else {
                // U^T y = b (forward), then L^T z = y with the row swaps undone
                // in reverse order.
                for (int j = 0; j < n; ++j) {
                    int i0 = std::max(0, j - kl - ku);
                    double acc = x(j);
                    for (int i = i0; i < j; ++i) acc -= ab_(kl + ku + i - j, j) * x(i);
                    x(j) = acc / ab_(kl + ku, j);
                }
                for (int j = n - 1; j >= 0; --j) {
                    int km = std::min(kl, n - 1 - j);
                    double acc = x(j);
                    for (int i = j + 1; i <= j + km; ++i) acc -= ab_(kl + ku + i - j, j) * x(i);
                    x(j) = acc;
                    if (ipiv_[j] != j) std::swap(x(j), x(ipiv_[j]));
                }
            }
        }
    }

    int size() const { return n_; }

 private:
    int n_ = 0, kl_ = 0, ku_ = 0;
    Eigen::MatrixXd ab_;
    std::vector<int> ipiv_;
    bool factored_ = false;
};

}  // namespace vast
