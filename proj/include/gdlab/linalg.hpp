#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "core.hpp"

namespace gdlab {

// Dense symmetric d x d matrix stored row-major.  Only small d is expected.
struct SymMat {
    std::size_t d = 0;
    std::vector<double> a;  // d*d entries

    explicit SymMat(std::size_t dim = 0) : d(dim), a(dim * dim, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return a[i * d + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * d + j]; }

    // A += c * v v^T
    void add_outer(double c, const Vec& v) {
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) a[i * d + j] += c * v[i] * v[j];
    }

    void add_diag(double c) {
        for (std::size_t i = 0; i < d; ++i) a[i * d + i] += c;
    }
};

// Solve A x = b with partial pivoting.  Returns false if A is numerically
// singular.  A is copied; sizes must agree.
inline bool solve_linear(SymMat A, Vec b, Vec& x) {
    const std::size_t d = A.d;
    if (b.size() != d) throw UsageError("solve_linear: size mismatch");
    std::vector<std::size_t> piv(d);
    for (std::size_t i = 0; i < d; ++i) piv[i] = i;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t best = col;
        double best_abs = std::fabs(A.at(col, col));
        for (std::size_t r = col + 1; r < d; ++r) {
            const double v = std::fabs(A.at(r, col));
            if (v > best_abs) {
                best_abs = v;
                best = r;
            }
        }
        if (best_abs < 1e-300) return false;
        if (best != col) {
            for (std::size_t j = 0; j < d; ++j)
                std::swap(A.a[best * d + j], A.a[col * d + j]);
            std::swap(b[best], b[col]);
        }
        const double pivot = A.at(col, col);
        for (std::size_t r = col + 1; r < d; ++r) {
            const double f = A.at(r, col) / pivot;
            if (f == 0.0) continue;
            for (std::size_t j = col; j < d; ++j) A.at(r, j) -= f * A.at(col, j);
            b[r] -= f * b[col];
        }
    }
    x.assign(d, 0.0);
    for (std::size_t ri = d; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t j = ri + 1; j < d; ++j) s -= A.at(ri, j) * x[j];
        x[ri] = s / A.at(ri, ri);
    }
    return all_finite(x);
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> sym_eigenvalues(SymMat A) {
    const std::size_t d = A.d;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) off += A.at(i, j) * A.at(i, j);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = A.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (A.at(q, q) - A.at(p, p)) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) /
                    (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = A.at(k, p);
                    const double akq = A.at(k, q);
                    A.at(k, p) = c * akp - s * akq;
                    A.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = A.at(p, k);
                    const double aqk = A.at(q, k);
                    A.at(p, k) = c * apk - s * aqk;
                    A.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(d);
    for (std::size_t i = 0; i < d; ++i) ev[i] = A.at(i, i);
    return ev;
}

inline double min_eigenvalue(const SymMat& A) {
    const auto ev = sym_eigenvalues(A);
    double m = ev.empty() ? 0.0 : ev[0];
    for (double v : ev)
        if (v < m) m = v;
    return m;
}

}  // namespace gdlab
