#pragma once

#include <cmath>

#include "veloreg/field.hpp"
#include "veloreg/parallel.hpp"

namespace veloreg {

/// Cubic Lagrange basis on nodes {-1, 0, 1, 2} at local coordinate s in [0,1).
/// At s = 0 the weights are exactly (0, 1, 0, 0), so grid points reproduce.
inline void cubic_weights(double s, double w[4]) {
    const double sm1 = s - 1.0, sm2 = s - 2.0, sp1 = s + 1.0;
    w[0] = -s * sm1 * sm2 * (1.0 / 6.0);
    w[1] = sp1 * sm1 * sm2 * 0.5;
    w[2] = -sp1 * s * sm2 * 0.5;
    w[3] = sp1 * s * sm1 * (1.0 / 6.0);
}

namespace detail {

/// Per-point stencil: wrapped indices and weights for the 4x4x4 neighborhood.
struct TricubicStencil {
    int idx[3][4];
    double w[3][4];

    template <typename T>
    TricubicStencil(const Grid3& g, const VectorField<T>& pts, std::int64_t p)
        : TricubicStencil(g, {static_cast<double>(pts[0][p]), static_cast<double>(pts[1][p]),
                              static_cast<double>(pts[2][p])}) {}

    TricubicStencil(const Grid3& g, const std::array<double, 3>& x) {
        for (int a = 0; a < 3; ++a) {
            const int n = g.dims[a];
            double u = x[a] / g.spacing(a);
            // snap to the node when within rounding distance, so queries at
            // grid points reproduce values bitwise
            const double r = std::nearbyint(u);
            if (std::abs(u - r) < 1e-12) u = r;
            double fl = std::floor(u);
            double s = u - fl;
            int i = static_cast<int>(fl);
            cubic_weights(s, w[a]);
            // wrap i-1 .. i+2 into [0, n)
            int base = i - 1;
            base %= n;
            if (base < 0) base += n;
            for (int t = 0; t < 4; ++t) {
                int j = base + t;
                idx[a][t] = j < n ? j : j - n;
            }
        }
    }

    template <typename T>
    double gather(const ScalarField<T>& f) const {
        const Grid3& g = f.grid();
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
            const std::int64_t o1 = static_cast<std::int64_t>(idx[0][a]) * g.dims[1];
            double acc1 = 0.0;
            for (int b = 0; b < 4; ++b) {
                const std::int64_t o2 = (o1 + idx[1][b]) * g.dims[2];
                double acc2 = 0.0;
                for (int c = 0; c < 4; ++c)
                    acc2 += w[2][c] * static_cast<double>(f[o2 + idx[2][c]]);
                acc1 += w[1][b] * acc2;
            }
            acc += w[0][a] * acc1;
        }
        return acc;
    }
};

} // namespace detail

/// Tensor-product cubic Lagrange interpolation on the periodic 4^3 stencil
/// around each query point (absolute coordinates; any real value is wrapped
/// by the index arithmetic).
template <typename T>
void tricubic_interpolate(const ScalarField<T>& f, const VectorField<T>& points,
                          ScalarField<T>& out) {
    const Grid3& g = f.grid();
    require_same_grid(f, points[0], "tricubic_interpolate");
    if (out.grid() != g) out = ScalarField<T>(g);
    par::for_each(points.size(), [&](std::int64_t p) {
        detail::TricubicStencil st(g, points, p);
        out[p] = static_cast<T>(st.gather(f));
    });
}

template <typename T>
ScalarField<T> tricubic_interpolate(const ScalarField<T>& f, const VectorField<T>& points) {
    ScalarField<T> out(f.grid());
    tricubic_interpolate(f, points, out);
    return out;
}

/// Two fields at the same query points, one weight computation.
template <typename T>
void tricubic_interpolate2(const ScalarField<T>& f1, const ScalarField<T>& f2,
                           const VectorField<T>& points, ScalarField<T>& o1, ScalarField<T>& o2) {
    const Grid3& g = f1.grid();
    require_same_grid(f1, f2, "tricubic_interpolate2");
    if (o1.grid() != g) o1 = ScalarField<T>(g);
    if (o2.grid() != g) o2 = ScalarField<T>(g);
    par::for_each(points.size(), [&](std::int64_t p) {
        detail::TricubicStencil st(g, points, p);
        o1[p] = static_cast<T>(st.gather(f1));
        o2[p] = static_cast<T>(st.gather(f2));
    });
}

/// All three components of a vector field at shared query points.
template <typename T>
void tricubic_interpolate3(const VectorField<T>& f, const VectorField<T>& points,
                           VectorField<T>& out) {
    const Grid3& g = f.grid();
    if (out.grid() != g) out = VectorField<T>(g);
    par::for_each(points.size(), [&](std::int64_t p) {
        detail::TricubicStencil st(g, points, p);
        out[0][p] = static_cast<T>(st.gather(f[0]));
        out[1][p] = static_cast<T>(st.gather(f[1]));
        out[2][p] = static_cast<T>(st.gather(f[2]));
    });
}

} // namespace veloreg
