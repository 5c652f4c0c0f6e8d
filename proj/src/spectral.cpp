#include "veloreg/spectral.hpp"

#include <cmath>

#include "veloreg/field_ops.hpp"
#include "veloreg/parallel.hpp"

namespace veloreg {
namespace {

using cplx = std::complex<double>;

// Iterates the r2c spectrum; fn(linear_index, i1, i2, i3).
template <typename Fn>
void for_each_bin(const Grid3& g, Fn&& fn) {
    auto sd = spectrum_dims(g);
    std::int64_t idx = 0;
    for (int i1 = 0; i1 < sd[0]; ++i1)
        for (int i2 = 0; i2 < sd[1]; ++i2)
            for (int i3 = 0; i3 < sd[2]; ++i3) fn(idx++, i1, i2, i3);
}

double k2_full(const Grid3& g, int i1, int i2, int i3) {
    double a = fft_freq(i1, g.dims[0]);
    double b = fft_freq(i2, g.dims[1]);
    double c = fft_freq(i3, g.dims[2]);
    return a * a + b * b + c * c;
}

// Scalar Fourier multiplier m(i1,i2,i3) applied through one transform pair.
template <typename T, typename Mult>
ScalarField<T> scalar_multiplier(const ScalarField<T>& f, Mult&& m) {
    Spectrum c;
    fft_forward(f, c);
    for_each_bin(f.grid(), [&](std::int64_t i, int i1, int i2, int i3) { c[i] *= m(i1, i2, i3); });
    ScalarField<T> out;
    fft_inverse(f.grid(), c, out);
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Quadrature / intensity
// ---------------------------------------------------------------------------

template <typename T>
double inner_product(const ScalarField<T>& a, const ScalarField<T>& b) {
    require_same_grid(a, b, "inner_product");
    double s = par::sum(a.size(), [&](std::int64_t i) {
        return static_cast<double>(a[i]) * static_cast<double>(b[i]);
    });
    return s * a.grid().cell_volume();
}

template <typename T>
double inner_product(const VectorField<T>& a, const VectorField<T>& b) {
    require_same_grid(a, b, "inner_product");
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += inner_product(a[c], b[c]);
    return s;
}

template <typename T>
RescaleResult<T> rescale_intensity(const ScalarField<T>& f) {
    RescaleResult<T> r;
    double lo = min_value(f), hi = max_value(f);
    if (hi <= lo) {
        r.field = ScalarField<T>(f.grid(), T(0));
        r.degenerate = true;
        return r;
    }
    r.field = ScalarField<T>(f.grid());
    const double s = 1.0 / (hi - lo);
    par::for_each(f.size(),
                  [&](std::int64_t i) { r.field[i] = static_cast<T>((f[i] - lo) * s); });
    return r;
}

// ---------------------------------------------------------------------------
// Smoothing and derivatives
// ---------------------------------------------------------------------------

template <typename T>
ScalarField<T> gaussian_smooth(const ScalarField<T>& f, std::array<double, 3> sigma) {
    for (double s : sigma)
        if (s < 0.0) throw ArgumentError("gaussian_smooth: sigma must be >= 0");
    const Grid3& g = f.grid();
    const std::array<double, 3> h = g.spacing();
    return scalar_multiplier(f, [&](int i1, int i2, int i3) {
        double k1 = fft_freq(i1, g.dims[0]);
        double k2 = fft_freq(i2, g.dims[1]);
        double k3 = fft_freq(i3, g.dims[2]);
        double e = sigma[0] * sigma[0] * h[0] * h[0] * k1 * k1 +
                   sigma[1] * sigma[1] * h[1] * h[1] * k2 * k2 +
                   sigma[2] * sigma[2] * h[2] * h[2] * k3 * k3;
        return std::exp(-0.5 * e);
    });
}

template <typename T>
VectorField<T> gaussian_smooth(const VectorField<T>& f, std::array<double, 3> sigma) {
    VectorField<T> out(f.grid());
    for (int c = 0; c < 3; ++c) out[c] = gaussian_smooth(f[c], sigma);
    return out;
}

template <typename T>
VectorField<T> gradient(const ScalarField<T>& f) {
    const Grid3& g = f.grid();
    Spectrum c, dc(static_cast<std::size_t>(spectrum_size(g)));
    fft_forward(f, c);
    VectorField<T> out(g);
    for (int axis = 0; axis < 3; ++axis) {
        for_each_bin(g, [&](std::int64_t i, int i1, int i2, int i3) {
            int idx[3] = {i1, i2, i3};
            double k = deriv_freq(idx[axis], g.dims[axis]);
            dc[i] = cplx(0.0, k) * c[i];
        });
        fft_inverse(g, dc, out[axis]);
    }
    return out;
}

template <typename T>
ScalarField<T> divergence(const VectorField<T>& v) {
    const Grid3& g = v.grid();
    Spectrum acc(static_cast<std::size_t>(spectrum_size(g)), cplx(0.0)), c;
    for (int axis = 0; axis < 3; ++axis) {
        fft_forward(v[axis], c);
        for_each_bin(g, [&](std::int64_t i, int i1, int i2, int i3) {
            int idx[3] = {i1, i2, i3};
            double k = deriv_freq(idx[axis], g.dims[axis]);
            acc[i] += cplx(0.0, k) * c[i];
        });
    }
    ScalarField<T> out;
    fft_inverse(g, acc, out);
    return out;
}

template <typename T>
ScalarField<T> laplacian(const ScalarField<T>& f) {
    const Grid3& g = f.grid();
    return scalar_multiplier(f, [&](int i1, int i2, int i3) { return -k2_full(g, i1, i2, i3); });
}

template <typename T>
VectorField<T> laplacian(const VectorField<T>& f) {
    VectorField<T> out(f.grid());
    for (int c = 0; c < 3; ++c) out[c] = laplacian(f[c]);
    return out;
}

template <typename T>
ScalarField<T> helmholtz1_apply(const ScalarField<T>& f) {
    const Grid3& g = f.grid();
    return scalar_multiplier(f,
                             [&](int i1, int i2, int i3) { return k2_full(g, i1, i2, i3) + 1.0; });
}

// ---------------------------------------------------------------------------
// Regularization operator
// ---------------------------------------------------------------------------

template <typename T>
VectorField<T> apply_reg_operator(const VectorField<T>& v, const RegNorm& norm, RegOpMode mode,
                                  double beta) {
    norm.validate();
    if (beta <= 0.0) throw ArgumentError("apply_reg_operator: beta must be > 0");
    const Grid3& g = v.grid();
    auto mult = [&](int i1, int i2, int i3) {
        double s = norm.symbol(k2_full(g, i1, i2, i3));
        switch (mode) {
            case RegOpMode::apply: return beta * s;
            case RegOpMode::inverse: return 1.0 / (beta * (s == 0.0 ? 1.0 : s));
            case RegOpMode::inverse_sqrt: return 1.0 / std::sqrt(beta * (s == 0.0 ? 1.0 : s));
        }
        return 1.0;
    };
    VectorField<T> out(g);
    for (int c = 0; c < 3; ++c) out[c] = scalar_multiplier(v[c], mult);
    return out;
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

template <typename T>
void apply_projection_inplace(VectorField<T>& f, ProjectionKind kind, double beta_v,
                              double beta_w) {
    if (kind == ProjectionKind::identity) return;
    if (kind == ProjectionKind::near_incompressible && (beta_v <= 0.0 || beta_w <= 0.0))
        throw ArgumentError("apply_projection: near-incompressible K needs beta_v, beta_w > 0");

    const Grid3& g = f.grid();
    std::array<Spectrum, 3> c;
    for (int a = 0; a < 3; ++a) fft_forward(f[a], c[a]);
    for_each_bin(g, [&](std::int64_t i, int i1, int i2, int i3) {
        double k[3] = {static_cast<double>(deriv_freq(i1, g.dims[0])),
                       static_cast<double>(deriv_freq(i2, g.dims[1])),
                       static_cast<double>(deriv_freq(i3, g.dims[2]))};
        double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (kk == 0.0) return; // zero (and pure-Nyquist) modes pass through
        double s = 1.0;
        if (kind == ProjectionKind::near_incompressible)
            s = beta_w * (kk + 1.0) / (beta_v + beta_w * (kk + 1.0));
        cplx kdotf = k[0] * c[0][i] + k[1] * c[1][i] + k[2] * c[2][i];
        cplx corr = kdotf * (s / kk);
        for (int a = 0; a < 3; ++a) c[a][i] -= k[a] * corr;
    });
    for (int a = 0; a < 3; ++a) fft_inverse(g, c[a], f[a]);
}

template <typename T>
VectorField<T> apply_projection(const VectorField<T>& f, ProjectionKind kind, double beta_v,
                                double beta_w) {
    VectorField<T> out = f;
    apply_projection_inplace(out, kind, beta_v, beta_w);
    return out;
}

// ---------------------------------------------------------------------------
// Grid transfer
// ---------------------------------------------------------------------------

namespace {

// Aliased source frequencies of a target mode q: band-interior modes map
// one-to-one; the Nyquist mode of an even target axis folds +-m/2.
struct AliasSet {
    int k[2];
    int count;
};
AliasSet alias_freqs(int q, int m, int n) {
    if (m != n && m % 2 == 0 && std::abs(q) == m / 2) return {{m / 2, -m / 2}, 2};
    return {{q, 0}, 1};
}

int wrap_index(int k, int n) { return k >= 0 ? k : k + n; }

std::int64_t bin_index(const Grid3& g, int i1, int i2, int i3) {
    auto sd = spectrum_dims(g);
    return (static_cast<std::int64_t>(i1) * sd[1] + i2) * sd[2] + i3;
}

// Fetches a mode with signed frequencies; negative k3 resolves through the
// Hermitian image conj(spec(-k1, -k2, -k3)).
cplx fetch_mode(const Grid3& g, const Spectrum& s, int k1, int k2, int k3) {
    if (k3 >= 0)
        return s[static_cast<std::size_t>(
            bin_index(g, wrap_index(k1, g.dims[0]), wrap_index(k2, g.dims[1]), k3))];
    return std::conj(s[static_cast<std::size_t>(
        bin_index(g, wrap_index(-k1, g.dims[0]), wrap_index(-k2, g.dims[1]), -k3))]);
}

// Deposits only into stored bins (k3 >= 0). A negative k3 alias is the
// Hermitian image of another stored source bin, which makes its own deposit;
// writing it here too would double-count the fold plane.
void deposit_mode(const Grid3& g, Spectrum& s, int k1, int k2, int k3, cplx v) {
    if (k3 < 0) return;
    s[static_cast<std::size_t>(
        bin_index(g, wrap_index(k1, g.dims[0]), wrap_index(k2, g.dims[1]), k3))] += v;
}

void check_transfer(const Grid3& lo, const Grid3& hi, const char* what) {
    for (int a = 0; a < 3; ++a) {
        if (lo.dims[a] > hi.dims[a])
            throw DimensionError(std::string(what) + ": target/cutoff axis " + std::to_string(a) +
                                 " exceeds source (" + lo.str() + " vs " + hi.str() + ")");
    }
}

} // namespace

void spectrum_restrict(const Grid3& src, const Spectrum& in, const Grid3& dst, Spectrum& out) {
    check_transfer(dst, src, "spectrum_restrict");
    out.assign(static_cast<std::size_t>(spectrum_size(dst)), cplx(0.0));
    const double scale = static_cast<double>(dst.size()) / static_cast<double>(src.size());
    auto sd = spectrum_dims(dst);
    std::int64_t idx = 0;
    for (int j1 = 0; j1 < sd[0]; ++j1) {
        AliasSet a1 = alias_freqs(fft_freq(j1, dst.dims[0]), dst.dims[0], src.dims[0]);
        for (int j2 = 0; j2 < sd[1]; ++j2) {
            AliasSet a2 = alias_freqs(fft_freq(j2, dst.dims[1]), dst.dims[1], src.dims[1]);
            for (int j3 = 0; j3 < sd[2]; ++j3, ++idx) {
                AliasSet a3 = alias_freqs(j3, dst.dims[2], src.dims[2]);
                cplx v(0.0);
                for (int p = 0; p < a1.count; ++p)
                    for (int q = 0; q < a2.count; ++q)
                        for (int r = 0; r < a3.count; ++r)
                            v += fetch_mode(src, in, a1.k[p], a2.k[q], a3.k[r]);
                out[static_cast<std::size_t>(idx)] = v * scale;
            }
        }
    }
}

void spectrum_prolong(const Grid3& src, const Spectrum& in, const Grid3& dst, Spectrum& out) {
    check_transfer(src, dst, "spectrum_prolong");
    out.assign(static_cast<std::size_t>(spectrum_size(dst)), cplx(0.0));
    const double scale = static_cast<double>(dst.size()) / static_cast<double>(src.size());
    auto sd = spectrum_dims(src);
    std::int64_t idx = 0;
    for (int j1 = 0; j1 < sd[0]; ++j1) {
        AliasSet a1 = alias_freqs(fft_freq(j1, src.dims[0]), src.dims[0], dst.dims[0]);
        for (int j2 = 0; j2 < sd[1]; ++j2) {
            AliasSet a2 = alias_freqs(fft_freq(j2, src.dims[1]), src.dims[1], dst.dims[1]);
            for (int j3 = 0; j3 < sd[2]; ++j3, ++idx) {
                AliasSet a3 = alias_freqs(j3, src.dims[2], dst.dims[2]);
                double w = scale / (a1.count * a2.count * a3.count);
                cplx v = in[static_cast<std::size_t>(idx)] * w;
                for (int p = 0; p < a1.count; ++p)
                    for (int q = 0; q < a2.count; ++q)
                        for (int r = 0; r < a3.count; ++r)
                            deposit_mode(dst, out, a1.k[p], a2.k[q], a3.k[r], v);
            }
        }
    }
}

template <typename T>
ScalarField<T> spectral_resample(const ScalarField<T>& f, const Grid3& target) {
    if (f.grid() == target) return f;
    Spectrum c, m;
    fft_forward(f, c);
    bool down = true;
    for (int a = 0; a < 3; ++a)
        if (target.dims[a] > f.grid().dims[a]) down = false;
    if (down)
        spectrum_restrict(f.grid(), c, target, m);
    else
        spectrum_prolong(f.grid(), c, target, m);
    ScalarField<T> out;
    fft_inverse(target, m, out);
    return out;
}

template <typename T>
VectorField<T> spectral_resample(const VectorField<T>& f, const Grid3& target) {
    VectorField<T> out(target);
    for (int c = 0; c < 3; ++c) out[c] = spectral_resample(f[c], target);
    return out;
}

template <typename T>
ScalarField<T> frequency_filter(const ScalarField<T>& f, FreqBand band, const Grid3& cutoff) {
    check_transfer(cutoff, f.grid(), "frequency_filter");
    if (cutoff == f.grid()) {
        if (band == FreqBand::low) return f;
        return ScalarField<T>(f.grid(), T(0));
    }
    Spectrum c, lo, back;
    fft_forward(f, c);
    spectrum_restrict(f.grid(), c, cutoff, lo);
    spectrum_prolong(cutoff, lo, f.grid(), back);
    ScalarField<T> low;
    fft_inverse(f.grid(), back, low);
    if (band == FreqBand::low) return low;
    ScalarField<T> high(f.grid());
    par::for_each(f.size(), [&](std::int64_t i) { high[i] = static_cast<T>(f[i] - low[i]); });
    return high;
}

template <typename T>
VectorField<T> frequency_filter(const VectorField<T>& f, FreqBand band, const Grid3& cutoff) {
    VectorField<T> out(f.grid());
    for (int c = 0; c < 3; ++c) out[c] = frequency_filter(f[c], band, cutoff);
    return out;
}

// ---------------------------------------------------------------------------

#define VELOREG_INSTANTIATE(T)                                                                     \
    template double inner_product<T>(const ScalarField<T>&, const ScalarField<T>&);                \
    template double inner_product<T>(const VectorField<T>&, const VectorField<T>&);                \
    template RescaleResult<T> rescale_intensity<T>(const ScalarField<T>&);                         \
    template ScalarField<T> gaussian_smooth<T>(const ScalarField<T>&, std::array<double, 3>);      \
    template VectorField<T> gaussian_smooth<T>(const VectorField<T>&, std::array<double, 3>);      \
    template VectorField<T> gradient<T>(const ScalarField<T>&);                                    \
    template ScalarField<T> divergence<T>(const VectorField<T>&);                                  \
    template ScalarField<T> laplacian<T>(const ScalarField<T>&);                                   \
    template VectorField<T> laplacian<T>(const VectorField<T>&);                                   \
    template ScalarField<T> helmholtz1_apply<T>(const ScalarField<T>&);                            \
    template VectorField<T> apply_reg_operator<T>(const VectorField<T>&, const RegNorm&,           \
                                                  RegOpMode, double);                              \
    template VectorField<T> apply_projection<T>(const VectorField<T>&, ProjectionKind, double,     \
                                                double);                                           \
    template void apply_projection_inplace<T>(VectorField<T>&, ProjectionKind, double, double);                                           \
    template ScalarField<T> spectral_resample<T>(const ScalarField<T>&, const Grid3&);             \
    template VectorField<T> spectral_resample<T>(const VectorField<T>&, const Grid3&);             \
    template ScalarField<T> frequency_filter<T>(const ScalarField<T>&, FreqBand, const Grid3&);    \
    template VectorField<T> frequency_filter<T>(const VectorField<T>&, FreqBand, const Grid3&);

VELOREG_INSTANTIATE(float)
VELOREG_INSTANTIATE(double)
#undef VELOREG_INSTANTIATE

} // namespace veloreg
