#pragma once

#include <cmath>
#include <limits>

#include "veloreg/field.hpp"
#include "veloreg/parallel.hpp"

namespace veloreg {

// Elementwise helpers shared by all modules. Reductions accumulate in double
// with a deterministic chunk order (see parallel.hpp).

template <typename T>
void scale(ScalarField<T>& f, double a) {
    par::for_each(f.size(), [&](std::int64_t i) { f[i] = static_cast<T>(f[i] * a); });
}
template <typename T>
void scale(VectorField<T>& f, double a) {
    for (int c = 0; c < 3; ++c) scale(f[c], a);
}

/// y += a * x
template <typename T>
void add_scaled(ScalarField<T>& y, double a, const ScalarField<T>& x) {
    require_same_grid(y, x, "add_scaled");
    par::for_each(y.size(), [&](std::int64_t i) { y[i] = static_cast<T>(y[i] + a * x[i]); });
}
template <typename T>
void add_scaled(VectorField<T>& y, double a, const VectorField<T>& x) {
    for (int c = 0; c < 3; ++c) add_scaled(y[c], a, x[c]);
}

/// out = a*x + b*y
template <typename T>
void lin_comb(ScalarField<T>& out, double a, const ScalarField<T>& x, double b,
              const ScalarField<T>& y) {
    require_same_grid(x, y, "lin_comb");
    if (out.grid() != x.grid()) out = ScalarField<T>(x.grid());
    par::for_each(out.size(),
                  [&](std::int64_t i) { out[i] = static_cast<T>(a * x[i] + b * y[i]); });
}
template <typename T>
void lin_comb(VectorField<T>& out, double a, const VectorField<T>& x, double b,
              const VectorField<T>& y) {
    for (int c = 0; c < 3; ++c) lin_comb(out[c], a, x[c], b, y[c]);
}

/// Plain (unweighted) discrete dot product / l2 norm, used by the Krylov
/// solvers. Quadrature-weighted inner products live in spectral.hpp.
template <typename T>
double dot_l2(const ScalarField<T>& a, const ScalarField<T>& b) {
    require_same_grid(a, b, "dot_l2");
    return par::sum(a.size(), [&](std::int64_t i) {
        return static_cast<double>(a[i]) * static_cast<double>(b[i]);
    });
}
template <typename T>
double dot_l2(const VectorField<T>& a, const VectorField<T>& b) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += dot_l2(a[c], b[c]);
    return s;
}
template <typename F>
double norm_l2(const F& a) {
    return std::sqrt(dot_l2(a, a));
}

template <typename T>
double max_abs(const ScalarField<T>& f) {
    if (f.size() == 0) return 0.0;
    return par::max(f.size(), [&](std::int64_t i) { return std::abs(static_cast<double>(f[i])); });
}
template <typename T>
double max_abs(const VectorField<T>& f) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, max_abs(f[c]));
    return m;
}

template <typename T>
double min_value(const ScalarField<T>& f) {
    return -par::max(f.size(), [&](std::int64_t i) { return -static_cast<double>(f[i]); });
}
template <typename T>
double max_value(const ScalarField<T>& f) {
    return par::max(f.size(), [&](std::int64_t i) { return static_cast<double>(f[i]); });
}

/// Largest pointwise vector magnitude |v(x)|.
template <typename T>
double max_magnitude(const VectorField<T>& v) {
    return std::sqrt(par::max(v.size(), [&](std::int64_t i) {
        double a = v[0][i], b = v[1][i], c = v[2][i];
        return a * a + b * b + c * c;
    }));
}

template <typename T>
double max_abs_diff(const ScalarField<T>& a, const ScalarField<T>& b) {
    require_same_grid(a, b, "max_abs_diff");
    return par::max(a.size(), [&](std::int64_t i) {
        return std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    });
}
template <typename T>
double max_abs_diff(const VectorField<T>& a, const VectorField<T>& b) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max(m, max_abs_diff(a[c], b[c]));
    return m;
}

} // namespace veloreg
