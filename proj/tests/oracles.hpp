#pragma once

// Independent reference implementations used only by tests: brute-force ODE
// flow integration, dense SPD solves, and a finite-difference deformation
// gradient. These deliberately avoid the library's semi-Lagrangian and Krylov
// code paths.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "veloreg/errors.hpp"

namespace veloreg::testing {

/// Classic RK4 integration of dx/dt = sign * v(x) over `time`, split into
/// `substeps` steps. v is any callable (x1,x2,x3) -> array<double,3>.
template <typename VFn>
std::array<double, 3> rk4_flow(VFn&& v, std::array<double, 3> x, double time, int substeps,
                               double sign = 1.0) {
    const double h = time / substeps;
    for (int s = 0; s < substeps; ++s) {
        auto f = [&](const std::array<double, 3>& p) {
            auto k = v(p[0], p[1], p[2]);
            return std::array<double, 3>{sign * k[0], sign * k[1], sign * k[2]};
        };
        auto k1 = f(x);
        auto k2 = f({x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1], x[2] + 0.5 * h * k1[2]});
        auto k3 = f({x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1], x[2] + 0.5 * h * k2[2]});
        auto k4 = f({x[0] + h * k3[0], x[1] + h * k3[1], x[2] + h * k3[2]});
        for (int c = 0; c < 3; ++c)
            x[c] += (h / 6.0) * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    }
    return x;
}

/// Dense symmetric positive definite solve by LDL^T factorization (in place).
inline std::vector<double> ldlt_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) throw veloreg::LogicError("ldlt_solve: shape mismatch");
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) {
        double dj = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) dj -= a[j * n + k] * a[j * n + k] * d[k];
        d[j] = dj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double lij = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) lij -= a[i * n + k] * a[j * n + k] * d[k];
            a[i * n + j] = lij / dj;
        }
    }
    // forward: L y = b
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
    for (std::size_t i = 0; i < n; ++i) b[i] /= d[i];
    // backward: L^T x = y
    for (std::size_t ii = n; ii-- > 0;)
        for (std::size_t k = ii + 1; k < n; ++k) b[ii] -= a[k * n + ii] * b[k];
    return b;
}

/// det of a 3x3 matrix given as rows.
inline double det3(const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Finite-difference determinant of the deformation gradient of the backward
/// flow map y(x) (the map consistent with the pullback m_T(y)): central
/// differences of RK4-integrated trajectories, displacement-based so periodic
/// wrap is a non-issue for moderate deformations.
template <typename VFn>
double fd_det_grad(VFn&& v, const std::array<double, 3>& x, double eps, int substeps) {
    std::array<std::array<double, 3>, 3> jac{};
    for (int a = 0; a < 3; ++a) {
        auto xp = x, xm = x;
        xp[a] += eps;
        xm[a] -= eps;
        auto yp = rk4_flow(v, xp, 1.0, substeps, -1.0);
        auto ym = rk4_flow(v, xm, 1.0, substeps, -1.0);
        for (int c = 0; c < 3; ++c) {
            // displacement difference + identity contribution
            double up = yp[c] - xp[c];
            double um = ym[c] - xm[c];
            jac[c][a] = (up - um) / (2 * eps) + (c == a ? 1.0 : 0.0);
        }
    }
    return det3(jac);
}

} // namespace veloreg::testing
