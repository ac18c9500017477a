#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "voterlab/errors.hpp"

namespace voterlab {

// Thomas algorithm for A x = rhs with sub/diag/super diagonals. No pivoting;
// the absorption systems solved here are diagonally dominant.
// sub[0] and super[n-1] are unused.
inline std::vector<double> solve_tridiagonal(const std::vector<double>& sub,
                                             const std::vector<double>& diag,
                                             const std::vector<double>& super,
                                             const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || super.size() != n || rhs.size() != n)
        throw invalid_parameter("tridiagonal bands must have equal length");
    if (n == 0) return {};

    std::vector<double> c_star(n), x(n);
    if (diag[0] == 0.0) throw divergence_error("singular tridiagonal system");
    c_star[0] = super[0] / diag[0];
    x[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double denom = diag[i] - sub[i] * c_star[i - 1];
        if (denom == 0.0) throw divergence_error("singular tridiagonal system");
        c_star[i] = super[i] / denom;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_star[i] * x[i + 1];
    return x;
}

// Dense row-major matrix just big enough for the solvers below.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// In-place LU factorization with partial pivoting, then solves for each
// right-hand side column. Throws divergence_error on a (near-)singular
// matrix, which for the absorption systems here means the expectation
// being solved for does not exist.
inline void lu_solve_in_place(DenseMatrix& a, std::vector<std::vector<double>>& rhs) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw invalid_parameter("LU solve needs a square matrix");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a.at(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::fabs(a.at(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-13)
            throw divergence_error("singular linear system (no finite solution)");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a.at(col, c), a.at(pivot, c));
            for (auto& b : rhs) std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a.at(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) * inv;
            if (f == 0.0) continue;
            a.at(r, col) = f;
            for (std::size_t c = col + 1; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
            for (auto& b : rhs) b[r] -= f * b[col];
        }
    }
    for (auto& b : rhs) {
        for (std::size_t i = n; i-- > 0;) {
            double s = b[i];
            for (std::size_t c = i + 1; c < n; ++c) s -= a.at(i, c) * b[c];
            b[i] = s / a.at(i, i);
        }
    }
}

// Compressed sparse row system (I - Q) x = b where Q is given by rows of
// (index, weight) pairs. Gauss-Seidel; I - Q is an M-matrix for the
// substochastic kernels used here, so the sweep converges.
struct SparseRows {
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
};

inline std::vector<double> gauss_seidel_i_minus_q(const SparseRows& q,
                                                  const std::vector<double>& b,
                                                  double tol = 1e-12,
                                                  std::size_t max_sweeps = 500000) {
    const std::size_t n = b.size();
    std::vector<double> x(n, 0.0);
    auto residual = [&] {
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i] - b[i];
            for (const auto& [j, w] : q.rows[i]) s -= w * x[j];
            r = std::max(r, std::fabs(s));
        }
        return r;
    };
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double diag = 1.0;
            double s = b[i];
            for (const auto& [j, w] : q.rows[i]) {
                if (j == i)
                    diag -= w;
                else
                    s += w * x[j];
            }
            if (diag <= 0.0) throw divergence_error("non-absorbing state in sparse system");
            const double next = s / diag;
            max_delta = std::max(max_delta, std::fabs(next - x[i]));
            x[i] = next;
        }
        // The update delta understates the true error when convergence is
        // slow, so confirm with the actual residual before declaring done.
        if (max_delta <= tol && residual() <= tol) return x;
    }
    throw divergence_error("iterative solve failed to converge");
}

} // namespace voterlab
