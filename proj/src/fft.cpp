#include "veloreg/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "veloreg/errors.hpp"

namespace veloreg {
namespace {

// One cached plan pair per grid size. Transforms execute through the plan's
// own buffers under a lock, so arbitrary caller arrays (and f32 fields) can
// be used without alignment constraints. FFTW_ESTIMATE keeps plan selection
// deterministic across runs.
struct PlanEntry {
    std::mutex mtx;
    std::int64_t n = 0;
    std::int64_t nc = 0;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    explicit PlanEntry(const Grid3& g) {
        n = g.size();
        nc = spectrum_size(g);
        real = fftw_alloc_real(static_cast<std::size_t>(n));
        cplx = fftw_alloc_complex(static_cast<std::size_t>(nc));
        if (!real || !cplx) throw ResourceError("fft: buffer allocation failed");
        fwd = fftw_plan_dft_r2c_3d(g.dims[0], g.dims[1], g.dims[2], real, cplx, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_3d(g.dims[0], g.dims[1], g.dims[2], cplx, real, FFTW_ESTIMATE);
        if (!fwd || !inv) throw ResourceError("fft: plan creation failed for grid " + g.str());
    }
    ~PlanEntry() {
        if (fwd) fftw_destroy_plan(fwd);
        if (inv) fftw_destroy_plan(inv);
        if (real) fftw_free(real);
        if (cplx) fftw_free(cplx);
    }
    PlanEntry(const PlanEntry&) = delete;
    PlanEntry& operator=(const PlanEntry&) = delete;
};

std::mutex& cache_mutex() {
    static std::mutex m;
    return m;
}
std::map<std::array<int, 3>, std::unique_ptr<PlanEntry>>& cache() {
    static std::map<std::array<int, 3>, std::unique_ptr<PlanEntry>> c;
    return c;
}

PlanEntry& entry_for(const Grid3& g) {
    std::lock_guard<std::mutex> lk(cache_mutex());
    auto& c = cache();
    auto it = c.find(g.dims);
    if (it == c.end()) it = c.emplace(g.dims, std::make_unique<PlanEntry>(g)).first;
    return *it->second;
}

} // namespace

void fft_forward_raw(const Grid3& g, const double* in, std::complex<double>* out) {
    PlanEntry& e = entry_for(g);
    std::lock_guard<std::mutex> lk(e.mtx);
    std::copy(in, in + e.n, e.real);
    fftw_execute(e.fwd);
    auto* src = reinterpret_cast<const std::complex<double>*>(e.cplx);
    std::copy(src, src + e.nc, out);
}

void fft_inverse_raw(const Grid3& g, const std::complex<double>* in, double* out) {
    PlanEntry& e = entry_for(g);
    std::lock_guard<std::mutex> lk(e.mtx);
    auto* dst = reinterpret_cast<std::complex<double>*>(e.cplx);
    std::copy(in, in + e.nc, dst);
    fftw_execute(e.inv);
    const double scale = 1.0 / static_cast<double>(e.n);
    for (std::int64_t i = 0; i < e.n; ++i) out[i] = e.real[i] * scale;
}

template <typename T>
void fft_forward(const ScalarField<T>& f, Spectrum& out) {
    const Grid3& g = f.grid();
    out.resize(static_cast<std::size_t>(spectrum_size(g)));
    if constexpr (std::is_same_v<T, double>) {
        fft_forward_raw(g, f.data(), out.data());
    } else {
        PlanEntry& e = entry_for(g);
        std::lock_guard<std::mutex> lk(e.mtx);
        for (std::int64_t i = 0; i < e.n; ++i) e.real[i] = static_cast<double>(f[i]);
        fftw_execute(e.fwd);
        auto* src = reinterpret_cast<const std::complex<double>*>(e.cplx);
        std::copy(src, src + e.nc, out.data());
    }
}

template <typename T>
void fft_inverse(const Grid3& g, const Spectrum& in, ScalarField<T>& out) {
    if (out.grid() != g) out = ScalarField<T>(g);
    if constexpr (std::is_same_v<T, double>) {
        fft_inverse_raw(g, in.data(), out.data());
    } else {
        PlanEntry& e = entry_for(g);
        std::lock_guard<std::mutex> lk(e.mtx);
        auto* dst = reinterpret_cast<std::complex<double>*>(e.cplx);
        std::copy(in.data(), in.data() + e.nc, dst);
        fftw_execute(e.inv);
        const double scale = 1.0 / static_cast<double>(e.n);
        for (std::int64_t i = 0; i < e.n; ++i) out[i] = static_cast<T>(e.real[i] * scale);
    }
}

void fft_clear_plan_cache() {
    std::lock_guard<std::mutex> lk(cache_mutex());
    cache().clear();
}

template void fft_forward<float>(const ScalarField<float>&, Spectrum&);
template void fft_forward<double>(const ScalarField<double>&, Spectrum&);
template void fft_inverse<float>(const Grid3&, const Spectrum&, ScalarField<float>&);
template void fft_inverse<double>(const Grid3&, const Spectrum&, ScalarField<double>&);

} // namespace veloreg
