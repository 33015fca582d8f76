#pragma once

#include "kirchhoff/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <string>
#include <vector>

namespace kirchhoff {

/// Symmetric tridiagonal matrix: diagonal d (n entries), off-diagonal e (n-1 entries).
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const { return diag.size(); }

    std::vector<double> apply(const std::vector<double>& x) const {
        const std::size_t n = diag.size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v = diag[i] * x[i];
            if (i > 0) v += off[i - 1] * x[i - 1];
            if (i + 1 < n) v += off[i] * x[i + 1];
            y[i] = v;
        }
        return y;
    }
};

/// Solves T X = B for each column in rhs (partial pivoting, LAPACK dgtsv).
inline void solve_in_place(const Tridiagonal& t, std::vector<std::vector<double>*> rhs) {
    const lapack_int n = static_cast<lapack_int>(t.size());
    if (rhs.empty() || n == 0) return;
    std::vector<double> dl(t.off), d(t.diag), du(t.off);
    std::vector<double> b(static_cast<std::size_t>(n) * rhs.size());
    for (std::size_t k = 0; k < rhs.size(); ++k)
        std::copy(rhs[k]->begin(), rhs[k]->begin() + n, b.begin() + k * n);
    const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, static_cast<lapack_int>(rhs.size()), dl.data(),
                                          d.data(), du.data(), b.data(), n);
    if (info != 0) throw NumericalFailure("tridiagonal solve failed (info " + std::to_string(info) + ")");
    for (std::size_t k = 0; k < rhs.size(); ++k)
        std::copy(b.begin() + k * n, b.begin() + (k + 1) * n, rhs[k]->begin());
}

inline std::vector<double> solve(const Tridiagonal& t, std::vector<double> rhs) {
    solve_in_place(t, {&rhs});
    return rhs;
}

}  // namespace kirchhoff
