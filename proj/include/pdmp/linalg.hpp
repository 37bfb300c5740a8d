#pragma once

// Small dense linear algebra: Gaussian elimination with partial pivoting and
// a pivoted Gram-Schmidt rank estimate. Systems here are tiny (environment
// counts, species counts), so no external library is warranted.

#include <algorithm>
#include <cmath>

#include "pdmp/common.hpp"

namespace pdmp {

// Solve A x = b with partial pivoting. Throws NumericError when the pivot
// collapses relative to the matrix scale.
inline Vec solve_linear(Mat A, Vec b) {
    const int n = static_cast<int>(A.size());
    double scale = 0;
    for (const auto& row : A)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0) throw NumericError("solve_linear: zero matrix");

    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) <= 1e-13 * scale)
            throw NumericError("solve_linear: singular matrix");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            if (f == 0) continue;
            for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    return x;
}

// Rank of a set of n-dimensional vectors via modified Gram-Schmidt with
// greedy pivoting. Tolerance is relative to the largest input norm.
inline int numerical_rank(std::vector<Vec> cols, int dim, double rel_tol = 1e-9) {
    double max_norm = 0;
    for (const auto& c : cols) max_norm = std::max(max_norm, norm2(c));
    if (max_norm == 0) return 0;
    const double tol = rel_tol * max_norm;

    int rank = 0;
    std::vector<Vec> basis;
    while (rank < dim) {
        int best = -1;
        double best_norm = tol;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            double nn = norm2(cols[i]);
            if (nn > best_norm) {
                best_norm = nn;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;
        Vec q = cols[best];
        for (double& v : q) v /= best_norm;
        basis.push_back(q);
        ++rank;
        for (auto& c : cols) {
            double dot = 0;
            for (int d = 0; d < dim; ++d) dot += c[d] * q[d];
            for (int d = 0; d < dim; ++d) c[d] -= dot * q[d];
        }
    }
    return rank;
}

}  // namespace pdmp
