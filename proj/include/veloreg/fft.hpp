#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "veloreg/field.hpp"
#include "veloreg/grid.hpp"

namespace veloreg {

/// Real-to-complex transform layout: for a grid (n1, n2, n3) the spectrum has
/// dims (n1, n2, n3/2 + 1), row-major like the real data, axis 2 halved by
/// Hermitian symmetry. Forward transforms are unnormalized; the inverse
/// applies the 1/(n1*n2*n3) factor. Transforms always run in f64 internally;
/// f32 fields are converted at the boundary.
inline std::array<std::int64_t, 3> spectrum_dims(const Grid3& g) {
    return {g.dims[0], g.dims[1], g.dims[2] / 2 + 1};
}
inline std::int64_t spectrum_size(const Grid3& g) {
    auto d = spectrum_dims(g);
    return d[0] * d[1] * d[2];
}

using Spectrum = std::vector<std::complex<double>>;

void fft_forward_raw(const Grid3& g, const double* in, std::complex<double>* out);
void fft_inverse_raw(const Grid3& g, const std::complex<double>* in, double* out);

template <typename T>
void fft_forward(const ScalarField<T>& f, Spectrum& out);

template <typename T>
void fft_inverse(const Grid3& g, const Spectrum& in, ScalarField<T>& out);

/// Releases cached FFTW plans (mainly for leak checkers).
void fft_clear_plan_cache();

} // namespace veloreg
