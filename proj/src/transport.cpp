#include "veloreg/transport.hpp"

#include <cmath>

#include "veloreg/fft.hpp"
#include "veloreg/field_ops.hpp"
#include "veloreg/spectral.hpp"

namespace veloreg {

template <typename T>
Characteristics<T> trace_characteristics(const VectorField<T>& v, int nt, TraceDirection dir) {
    if (nt < 1) throw ArgumentError("trace_characteristics: n_t must be >= 1");
    if (!v.all_finite()) throw NumericError("trace_characteristics: velocity has non-finite values");
    const Grid3& g = v.grid();
    const double dt = 1.0 / nt;
    const double sign = (dir == TraceDirection::backward) ? -1.0 : 1.0;

    Characteristics<T> ch;
    ch.direction = dir;
    ch.dt = dt;
    ch.departure = VectorField<T>(g);

    // midpoint x + sign*(dt/2)*v(x) with v read at the grid point, then one
    // tricubic evaluation of v there; fully pointwise, no temporaries
    par::for_each(g.size(), [&](std::int64_t i) {
        std::int64_t r = i;
        const int i3 = static_cast<int>(r % g.dims[2]);
        r /= g.dims[2];
        const int i2 = static_cast<int>(r % g.dims[1]);
        const int i1 = static_cast<int>(r / g.dims[1]);
        const double x[3] = {g.coord(0, i1), g.coord(1, i2), g.coord(2, i3)};
        std::array<double, 3> mid;
        for (int c = 0; c < 3; ++c)
            mid[c] = wrap_coord(x[c] + sign * 0.5 * dt * static_cast<double>(v[c][i]));
        detail::TricubicStencil st(g, mid);
        for (int c = 0; c < 3; ++c)
            ch.departure[c][i] =
                static_cast<T>(wrap_coord(x[c] + sign * dt * st.gather(v[c])));
    });
    return ch;
}

template <typename T>
ScalarField<T> continuity_factor(const ScalarField<T>& div_v, const Characteristics<T>& chars) {
    ScalarField<T> at_dep;
    tricubic_interpolate(div_v, chars.departure, at_dep);
    ScalarField<T> factor(div_v.grid());
    const double half_dt = 0.5 * chars.dt;
    par::for_each(factor.size(), [&](std::int64_t i) {
        factor[i] = static_cast<T>(
            std::exp(half_dt * (static_cast<double>(div_v[i]) + static_cast<double>(at_dep[i]))));
    });
    return factor;
}

template <typename T>
void advect_step(const ScalarField<T>& f, const Characteristics<T>& chars, ScalarField<T>& out) {
    tricubic_interpolate(f, chars.departure, out);
}

template <typename T>
void continuity_step(const ScalarField<T>& f, const Characteristics<T>& chars,
                     const ScalarField<T>& factor, ScalarField<T>& out) {
    tricubic_interpolate(f, chars.departure, out);
    par::for_each(out.size(),
                  [&](std::int64_t i) { out[i] = static_cast<T>(out[i] * factor[i]); });
}

// ---------------------------------------------------------------------------

template <typename T>
TimeSeries<T> solve_state(const ScalarField<T>& m_T, const Characteristics<T>& bwd, int nt) {
    require_same_grid(m_T, bwd.departure[0], "solve_state");
    TimeSeries<T> hist(m_T.grid(), nt);
    hist.slice(0) = m_T;
    for (int j = 0; j < nt; ++j) advect_step(hist.slice(j), bwd, hist.slice(j + 1));
    return hist;
}

template <typename T>
TimeSeries<T> solve_state(const ScalarField<T>& m_T, const VectorField<T>& v, int nt) {
    require_same_grid(m_T, v[0], "solve_state");
    auto bwd = trace_characteristics(v, nt, TraceDirection::backward);
    return solve_state(m_T, bwd, nt);
}

template <typename T>
AdjointSolution<T> sweep_continuity(ScalarField<T> terminal, const Characteristics<T>& fwd,
                                    const ScalarField<T>& factor, int nt, bool needs_history,
                                    const SliceObserver<T>& observe) {
    AdjointSolution<T> sol;
    if (needs_history) {
        sol.history.emplace(terminal.grid(), nt);
        sol.history->slice(nt) = std::move(terminal);
        if (observe) observe(nt, sol.history->slice(nt));
        for (int j = nt - 1; j >= 0; --j) {
            continuity_step(sol.history->slice(j + 1), fwd, factor, sol.history->slice(j));
            if (observe) observe(j, sol.history->slice(j));
        }
        sol.initial = sol.history->slice(0);
        return sol;
    }
    ScalarField<T> cur = std::move(terminal), next(cur.grid());
    if (observe) observe(nt, cur);
    for (int j = nt - 1; j >= 0; --j) {
        continuity_step(cur, fwd, factor, next);
        std::swap(cur, next);
        if (observe) observe(j, cur);
    }
    sol.initial = std::move(cur);
    return sol;
}

template <typename T>
AdjointSolution<T> solve_adjoint(const ScalarField<T>& terminal, const VectorField<T>& v, int nt,
                                 bool needs_history, const SliceObserver<T>& observe) {
    require_same_grid(terminal, v[0], "solve_adjoint");
    auto fwd = trace_characteristics(v, nt, TraceDirection::forward);
    auto factor = continuity_factor(divergence(v), fwd);
    return sweep_continuity(terminal, fwd, factor, nt, needs_history, observe);
}

// ---------------------------------------------------------------------------

template <typename T>
ScalarField<T> gradient_dot(const ScalarField<T>& f, const VectorField<T>& w) {
    const Grid3& g = f.grid();
    Spectrum c, dc(static_cast<std::size_t>(spectrum_size(g)));
    fft_forward(f, c);
    ScalarField<T> out(g, T(0)), scratch(g);
    auto sd = spectrum_dims(g);
    for (int axis = 0; axis < 3; ++axis) {
        std::int64_t idx = 0;
        for (int i1 = 0; i1 < sd[0]; ++i1)
            for (int i2 = 0; i2 < sd[1]; ++i2)
                for (int i3 = 0; i3 < sd[2]; ++i3, ++idx) {
                    int iv[3] = {i1, i2, i3};
                    double k = deriv_freq(iv[axis], g.dims[axis]);
                    dc[idx] = std::complex<double>(0.0, k) * c[idx];
                }
        fft_inverse(g, dc, scratch);
        par::for_each(out.size(), [&](std::int64_t i) {
            out[i] = static_cast<T>(out[i] + scratch[i] * w[axis][i]);
        });
    }
    return out;
}

template <typename T>
TimeSeries<T> solve_inc_state(const TimeSeries<T>& m_history, const Characteristics<T>& bwd,
                              const VectorField<T>& v_tilde, int nt) {
    if (m_history.slice_count() != nt + 1)
        throw DimensionError("solve_inc_state: m_history has " +
                             std::to_string(m_history.slice_count()) + " slices, expected " +
                             std::to_string(nt + 1));
    require_same_grid(m_history.slice(0), v_tilde[0], "solve_inc_state");
    const Grid3& g = v_tilde.grid();
    const double half_dt = 0.5 / nt;

    TimeSeries<T> mt(g, nt);
    mt.slice(0).fill(T(0));
    ScalarField<T> q_prev = gradient_dot(m_history.slice(0), v_tilde);
    ScalarField<T> tmp(g);
    for (int j = 0; j < nt; ++j) {
        ScalarField<T> q_next = gradient_dot(m_history.slice(j + 1), v_tilde);
        lin_comb(tmp, 1.0, mt.slice(j), -half_dt, q_prev);
        advect_step(tmp, bwd, mt.slice(j + 1));
        add_scaled(mt.slice(j + 1), -half_dt, q_next);
        q_prev = std::move(q_next);
    }
    return mt;
}

template <typename T>
TimeSeries<T> solve_inc_state(const TimeSeries<T>& m_history, const VectorField<T>& v,
                              const VectorField<T>& v_tilde, int nt) {
    auto bwd = trace_characteristics(v, nt, TraceDirection::backward);
    return solve_inc_state(m_history, bwd, v_tilde, nt);
}

template <typename T>
AdjointSolution<T> solve_inc_adjoint(ScalarField<T> terminal,
                                     const TimeSeries<T>* lambda_history,
                                     const Characteristics<T>& fwd, const ScalarField<T>& factor,
                                     const VectorField<T>& v_tilde, int nt, bool gauss_newton,
                                     const SliceObserver<T>& observe) {
    if (gauss_newton)
        return sweep_continuity(std::move(terminal), fwd, factor, nt, /*needs_history=*/false,
                                observe);

    if (!lambda_history)
        throw ArgumentError("solve_inc_adjoint: full Newton mode requires the adjoint history");
    if (lambda_history->slice_count() != nt + 1)
        throw DimensionError("solve_inc_adjoint: lambda history slice count mismatch");

    const Grid3 g = terminal.grid();
    const double half_dt = 0.5 / nt;
    // source r_j = div(lambda_j * v_tilde)
    auto source = [&](int j) {
        VectorField<T> lv(g);
        const ScalarField<T>& lam = lambda_history->slice(j);
        for (int c = 0; c < 3; ++c)
            par::for_each(g.size(), [&](std::int64_t i) {
                lv[c][i] = static_cast<T>(lam[i] * v_tilde[c][i]);
            });
        return divergence(lv);
    };

    AdjointSolution<T> sol;
    ScalarField<T> cur = std::move(terminal), lam_interp(g), src_interp(g);
    ScalarField<T> r_next = source(nt);
    if (observe) observe(nt, cur);
    for (int j = nt - 1; j >= 0; --j) {
        ScalarField<T> r_cur = source(j);
        tricubic_interpolate2(cur, r_next, fwd.departure, lam_interp, src_interp);
        par::for_each(g.size(), [&](std::int64_t i) {
            cur[i] = static_cast<T>(lam_interp[i] * factor[i] +
                                    half_dt * (r_cur[i] + src_interp[i]));
        });
        r_next = std::move(r_cur);
        if (observe) observe(j, cur);
    }
    sol.initial = std::move(cur);
    return sol;
}

template <typename T>
AdjointSolution<T> solve_inc_adjoint(const ScalarField<T>& terminal,
                                     const TimeSeries<T>* lambda_history, const VectorField<T>& v,
                                     const VectorField<T>& v_tilde, int nt, bool gauss_newton,
                                     const SliceObserver<T>& observe) {
    auto fwd = trace_characteristics(v, nt, TraceDirection::forward);
    auto factor = continuity_factor(divergence(v), fwd);
    return solve_inc_adjoint(terminal, lambda_history, fwd, factor, v_tilde, nt, gauss_newton,
                             observe);
}

// ---------------------------------------------------------------------------

#define VELOREG_INSTANTIATE(T)                                                                     \
    template Characteristics<T> trace_characteristics<T>(const VectorField<T>&, int,               \
                                                         TraceDirection);                          \
    template ScalarField<T> continuity_factor<T>(const ScalarField<T>&,                            \
                                                 const Characteristics<T>&);                       \
    template void advect_step<T>(const ScalarField<T>&, const Characteristics<T>&,                 \
                                 ScalarField<T>&);                                                 \
    template void continuity_step<T>(const ScalarField<T>&, const Characteristics<T>&,             \
                                     const ScalarField<T>&, ScalarField<T>&);                      \
    template TimeSeries<T> solve_state<T>(const ScalarField<T>&, const Characteristics<T>&, int);  \
    template TimeSeries<T> solve_state<T>(const ScalarField<T>&, const VectorField<T>&, int);      \
    template AdjointSolution<T> sweep_continuity<T>(ScalarField<T>, const Characteristics<T>&,    \
                                                    const ScalarField<T>&, int, bool,              \
                                                    const SliceObserver<T>&);                      \
    template AdjointSolution<T> solve_adjoint<T>(const ScalarField<T>&, const VectorField<T>&,     \
                                                 int, bool, const SliceObserver<T>&);              \
    template ScalarField<T> gradient_dot<T>(const ScalarField<T>&, const VectorField<T>&);         \
    template TimeSeries<T> solve_inc_state<T>(const TimeSeries<T>&, const Characteristics<T>&,     \
                                              const VectorField<T>&, int);                         \
    template TimeSeries<T> solve_inc_state<T>(const TimeSeries<T>&, const VectorField<T>&,         \
                                              const VectorField<T>&, int);                         \
    template AdjointSolution<T> solve_inc_adjoint<T>(                                              \
        ScalarField<T>, const TimeSeries<T>*, const Characteristics<T>&, const ScalarField<T>&,    \
        const VectorField<T>&, int, bool, const SliceObserver<T>&);         \
    template AdjointSolution<T> solve_inc_adjoint<T>(const ScalarField<T>&, const TimeSeries<T>*,  \
                                                     const VectorField<T>&, const VectorField<T>&, \
                                                     int, bool, const SliceObserver<T>&);

VELOREG_INSTANTIATE(float)
VELOREG_INSTANTIATE(double)
#undef VELOREG_INSTANTIATE

} // namespace veloreg
