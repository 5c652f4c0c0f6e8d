#pragma once

// Shared helpers for the unit and acceptance suites: analytic field sampling,
// reproducible band-limited random fields, and convergence-order fits.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "veloreg/field.hpp"
#include "veloreg/grid.hpp"

namespace veloreg::testing {

template <typename T, typename Fn>
ScalarField<T> sample_scalar(const Grid3& g, Fn&& fn) {
    ScalarField<T> f(g);
    std::int64_t idx = 0;
    for (int i1 = 0; i1 < g.dims[0]; ++i1)
        for (int i2 = 0; i2 < g.dims[1]; ++i2)
            for (int i3 = 0; i3 < g.dims[2]; ++i3, ++idx)
                f[idx] = static_cast<T>(fn(g.coord(0, i1), g.coord(1, i2), g.coord(2, i3)));
    return f;
}

template <typename T, typename Fn>
VectorField<T> sample_vector(const Grid3& g, Fn&& fn) {
    VectorField<T> v(g);
    std::int64_t idx = 0;
    for (int i1 = 0; i1 < g.dims[0]; ++i1)
        for (int i2 = 0; i2 < g.dims[1]; ++i2)
            for (int i3 = 0; i3 < g.dims[2]; ++i3, ++idx) {
                auto val = fn(g.coord(0, i1), g.coord(1, i2), g.coord(2, i3));
                v[0][idx] = static_cast<T>(val[0]);
                v[1][idx] = static_cast<T>(val[1]);
                v[2][idx] = static_cast<T>(val[2]);
            }
    return v;
}

/// Band-limited random trigonometric polynomial: sum over |k_i| <= max_mode of
/// a_k cos(k.x) + b_k sin(k.x), rescaled to the requested max amplitude.
/// Fully reproducible from the seed and independent of the library's FFTs.
class SmoothFieldGen {
public:
    SmoothFieldGen(int max_mode, std::uint64_t seed) : rng_(seed) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k1 = 0; k1 <= max_mode; ++k1)
            for (int k2 = -max_mode; k2 <= max_mode; ++k2)
                for (int k3 = -max_mode; k3 <= max_mode; ++k3) {
                    if (k1 == 0 && (k2 < 0 || (k2 == 0 && k3 < 0))) continue; // half-space
                    if (k1 == 0 && k2 == 0 && k3 == 0) continue;              // zero mean
                    modes_.push_back({double(k1), double(k2), double(k3), u(rng_), u(rng_)});
                }
    }

    double operator()(double x1, double x2, double x3) const {
        double s = 0.0;
        for (const auto& m : modes_) {
            double ph = m.k1 * x1 + m.k2 * x2 + m.k3 * x3;
            s += m.a * std::cos(ph) + m.b * std::sin(ph);
        }
        return s;
    }

private:
    struct Mode {
        double k1, k2, k3, a, b;
    };
    std::mt19937_64 rng_;
    std::vector<Mode> modes_;
};

template <typename T>
ScalarField<T> random_smooth_scalar(const Grid3& g, int max_mode, std::uint64_t seed,
                                    double amplitude) {
    SmoothFieldGen gen(max_mode, seed);
    auto f = sample_scalar<T>(g, [&](double x, double y, double z) { return gen(x, y, z); });
    double m = 0.0;
    for (std::int64_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(double(f[i])));
    if (m > 0.0) {
        double s = amplitude / m;
        for (std::int64_t i = 0; i < f.size(); ++i) f[i] = static_cast<T>(f[i] * s);
    }
    return f;
}

template <typename T>
VectorField<T> random_smooth_vector(const Grid3& g, int max_mode, std::uint64_t seed,
                                    double amplitude) {
    VectorField<T> v(g);
    for (int c = 0; c < 3; ++c)
        v[c] = random_smooth_scalar<T>(g, max_mode, seed + 7919 * (c + 1), amplitude);
    return v;
}

/// White-noise field in [-1, 1] (rough content on every mode).
template <typename T>
ScalarField<T> random_rough_scalar(const Grid3& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField<T> f(g);
    for (std::int64_t i = 0; i < f.size(); ++i) f[i] = static_cast<T>(u(rng));
    return f;
}

template <typename T>
VectorField<T> random_rough_vector(const Grid3& g, std::uint64_t seed) {
    VectorField<T> v(g);
    for (int c = 0; c < 3; ++c) v[c] = random_rough_scalar<T>(g, seed + 31 * (c + 1));
    return v;
}

/// Least-squares slope of log(err) vs log(h): observed convergence order.
inline double observed_order(const std::vector<double>& hs, const std::vector<double>& errs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(hs.size());
    for (int i = 0; i < n; ++i) {
        double x = std::log(hs[i]), y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Tolerance scaling: unit tolerances are stated for f64; the f32 lane runs
/// the same checks at 1e4 x the tolerance, floored at f32 round-off.
template <typename T>
double tol(double base) {
    return std::is_same_v<T, float> ? std::max(base * 1e4, 5e-7) : base;
}

} // namespace veloreg::testing
