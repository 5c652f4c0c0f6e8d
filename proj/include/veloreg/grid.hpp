#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "veloreg/errors.hpp"

namespace veloreg {

inline constexpr double two_pi = 2.0 * std::numbers::pi_v<double>;

/// Periodic regular grid on Omega = (0, 2*pi)^3.
///
/// Values are stored row-major with axis 0 slowest and axis 2 fastest:
/// linear index = (i1 * n2 + i2) * n3 + i3. Grid points are
/// x_i = 2*pi * i / n_i, i = 0 .. n_i - 1, with periodic wrap.
struct Grid3 {
    std::array<int, 3> dims{0, 0, 0};

    Grid3() = default;
    Grid3(int n1, int n2, int n3) : dims{n1, n2, n3} {
        for (int d : dims) {
            if (d < 4)
                throw DimensionError("Grid3: every dimension must be >= 4, got " +
                                     std::to_string(n1) + "x" + std::to_string(n2) + "x" +
                                     std::to_string(n3));
        }
    }
    explicit Grid3(int n) : Grid3(n, n, n) {}

    std::int64_t size() const {
        return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
    }
    double spacing(int axis) const { return two_pi / dims[axis]; }
    std::array<double, 3> spacing() const {
        return {spacing(0), spacing(1), spacing(2)};
    }
    /// Quadrature weight of one cell, h1*h2*h3.
    double cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }

    std::int64_t index(int i1, int i2, int i3) const {
        return (static_cast<std::int64_t>(i1) * dims[1] + i2) * dims[2] + i3;
    }
    double coord(int axis, int i) const { return spacing(axis) * i; }

    bool operator==(const Grid3& o) const { return dims == o.dims; }
    bool operator!=(const Grid3& o) const { return !(*this == o); }

    std::string str() const {
        return std::to_string(dims[0]) + "x" + std::to_string(dims[1]) + "x" +
               std::to_string(dims[2]);
    }
};

/// Signed FFT frequency for index i on an axis of length n:
/// 0, 1, ..., n/2, -(n/2 - 1), ..., -1 (n even; n/2 is the Nyquist mode).
inline int fft_freq(int i, int n) { return (2 * i <= n) ? i : i - n; }

/// Frequency used for odd-order derivatives: the unmatched Nyquist mode of an
/// even axis gets a zero derivative coefficient (symmetric convention).
inline int deriv_freq(int i, int n) { return (n % 2 == 0 && 2 * i == n) ? 0 : fft_freq(i, n); }

/// Wrap a coordinate into [0, 2*pi), exact for negative inputs.
inline double wrap_coord(double x) {
    double y = x - two_pi * std::floor(x / two_pi);
    if (y >= two_pi) y -= two_pi; // floor rounding at the seam
    return y >= 0.0 ? y : 0.0;
}

} // namespace veloreg
