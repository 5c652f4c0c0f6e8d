#pragma once

#include <array>

#include "veloreg/fft.hpp"
#include "veloreg/field.hpp"

namespace veloreg {

// ---------------------------------------------------------------------------
// Quadrature and intensity normalization
// ---------------------------------------------------------------------------

/// Trapezoidal quadrature of the pointwise product (rectangle rule on a
/// periodic uniform grid): h1*h2*h3 * sum a*b. Symmetric and bilinear.
template <typename T>
double inner_product(const ScalarField<T>& a, const ScalarField<T>& b);
template <typename T>
double inner_product(const VectorField<T>& a, const VectorField<T>& b);

template <typename T>
double l2_norm(const ScalarField<T>& a) {
    return std::sqrt(inner_product(a, a));
}
template <typename T>
double l2_norm(const VectorField<T>& a) {
    return std::sqrt(inner_product(a, a));
}

template <typename T>
struct RescaleResult {
    ScalarField<T> field;
    bool degenerate = false; // constant input mapped to all zeros
};

/// Affine map of the intensity range onto [0, 1].
template <typename T>
RescaleResult<T> rescale_intensity(const ScalarField<T>& f);

// ---------------------------------------------------------------------------
// Spectral operators
// ---------------------------------------------------------------------------

/// Gaussian smoothing in the spectral domain with per-axis standard
/// deviations given in voxels; transfer exp(-1/2 sum sigma_d^2 h_d^2 k_d^2).
/// The mean (zero mode) is preserved exactly.
template <typename T>
ScalarField<T> gaussian_smooth(const ScalarField<T>& f, std::array<double, 3> sigma_voxels);
template <typename T>
VectorField<T> gaussian_smooth(const VectorField<T>& f, std::array<double, 3> sigma_voxels);

/// Exact derivatives of the trigonometric interpolant. Odd-order operators
/// zero the unmatched Nyquist coefficient of even axes.
template <typename T>
VectorField<T> gradient(const ScalarField<T>& f);
template <typename T>
ScalarField<T> divergence(const VectorField<T>& v);
template <typename T>
ScalarField<T> laplacian(const ScalarField<T>& f);
template <typename T>
VectorField<T> laplacian(const VectorField<T>& f);

/// (-lap + id) f, used by the divergence-penalty energy.
template <typename T>
ScalarField<T> helmholtz1_apply(const ScalarField<T>& f);

// ---------------------------------------------------------------------------
// Regularization operators A = B*B
// ---------------------------------------------------------------------------

enum class RegKind { h1_seminorm, h2_seminorm, h3_seminorm, helmholtz };

/// Regularization model for the velocity. The divergence penalty (beta_w)
/// rides along with the H1-seminorm in the "h1div" configuration.
struct RegNorm {
    RegKind kind = RegKind::h2_seminorm;
    double gamma = 1.0;            // Helmholtz shift, > 0
    bool helmholtz_squared = true; // A = (-lap + gamma)^2 when true, else single application
    bool div_penalty = false;
    double beta_w = 1e-4;

    void validate() const {
        if (kind == RegKind::helmholtz && gamma <= 0.0)
            throw ArgumentError("RegNorm: helmholtz gamma must be > 0");
        if (div_penalty && beta_w <= 0.0)
            throw ArgumentError("RegNorm: beta_w must be > 0 when the divergence penalty is on");
    }

    /// Fourier symbol of A at squared wavenumber |k|^2.
    double symbol(double k2) const {
        switch (kind) {
            case RegKind::h1_seminorm: return k2;
            case RegKind::h2_seminorm: return k2 * k2;
            case RegKind::h3_seminorm: return k2 * k2 * k2;
            case RegKind::helmholtz: {
                double s = k2 + gamma;
                return helmholtz_squared ? s * s : s;
            }
        }
        return 0.0;
    }
};

enum class RegOpMode { apply, inverse, inverse_sqrt };

/// Applies beta * A (or its inverse / inverse square root) as a Fourier
/// multiplier. For the inverse modes, zero singular values of A are replaced
/// by one before inversion, so constants come back scaled by 1/beta only.
template <typename T>
VectorField<T> apply_reg_operator(const VectorField<T>& v, const RegNorm& norm, RegOpMode mode,
                                  double beta = 1.0);

// ---------------------------------------------------------------------------
// Projection operators K
// ---------------------------------------------------------------------------

enum class ProjectionKind { identity, incompressible, near_incompressible };

/// identity: f. incompressible: Leray projection (id - grad lap^-1 div).
/// near_incompressible: id - grad (beta_v (beta_w(-lap+id))^-1 + id)^-1 lap^-1 div.
/// Wavenumbers follow the derivative convention (Nyquist zeroed); modes whose
/// effective wavenumber vanishes pass through unchanged.
template <typename T>
VectorField<T> apply_projection(const VectorField<T>& f, ProjectionKind kind, double beta_v = 0.0,
                                double beta_w = 0.0);
template <typename T>
void apply_projection_inplace(VectorField<T>& f, ProjectionKind kind, double beta_v = 0.0,
                              double beta_w = 0.0);

// ---------------------------------------------------------------------------
// Frequency filters and grid transfer
// ---------------------------------------------------------------------------

enum class FreqBand { low, high };

/// F_L keeps the modes representable on the cutoff grid (band-boundary modes
/// of even cutoffs are symmetrized exactly as spectral restriction +
/// prolongation would); F_H = id - F_L, so F_L + F_H = id to rounding.
template <typename T>
ScalarField<T> frequency_filter(const ScalarField<T>& f, FreqBand band, const Grid3& cutoff);
template <typename T>
VectorField<T> frequency_filter(const VectorField<T>& f, FreqBand band, const Grid3& cutoff);

/// Spectral restriction (coefficient truncation) / prolongation (zero
/// padding); function values are preserved, restrict(prolong(f)) == f.
template <typename T>
ScalarField<T> spectral_resample(const ScalarField<T>& f, const Grid3& target);
template <typename T>
VectorField<T> spectral_resample(const VectorField<T>& f, const Grid3& target);

/// Coefficient-space kernels behind resampling/filtering (exposed for reuse).
void spectrum_restrict(const Grid3& src, const Spectrum& in, const Grid3& dst, Spectrum& out);
void spectrum_prolong(const Grid3& src, const Spectrum& in, const Grid3& dst, Spectrum& out);

} // namespace veloreg
