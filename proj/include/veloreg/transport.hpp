#pragma once

#include <functional>
#include <optional>

#include "veloreg/field.hpp"
#include "veloreg/interp.hpp"

namespace veloreg {

// Semi-Lagrangian solvers for the four transport problems: pure advection
// forward in time (state, incremental state with source) and the continuity
// equation backward in time (adjoint, incremental adjoint). Characteristics
// are traced once per velocity with an explicit RK2 midpoint step and reused
// across all time steps and solves, since v is stationary and dt uniform.

enum class TraceDirection { backward, forward };

template <typename T>
struct Characteristics {
    VectorField<T> departure; // absolute coordinates, wrapped into [0, 2*pi)
    TraceDirection direction = TraceDirection::backward;
    double dt = 0.0;

    const Grid3& grid() const { return departure.grid(); }
};

/// Departure points x -+ dt * v(x -+ dt/2 * v(x)); the midpoint velocity is
/// tricubic-interpolated. For v = 0 departure points equal grid points
/// exactly.
template <typename T>
Characteristics<T> trace_characteristics(const VectorField<T>& v, int nt, TraceDirection dir);

/// Reaction factor of the continuity equation, exp((dt/2)(div v + div v at
/// the departure point)): the trapezoid rule for the -lambda div v term along
/// the characteristic, applied multiplicatively (exact when div v = 0).
template <typename T>
ScalarField<T> continuity_factor(const ScalarField<T>& div_v, const Characteristics<T>& chars);

/// One advection step: out(x) = f(departure(x)).
template <typename T>
void advect_step(const ScalarField<T>& f, const Characteristics<T>& chars, ScalarField<T>& out);

/// One continuity step: out(x) = f(departure(x)) * factor(x).
template <typename T>
void continuity_step(const ScalarField<T>& f, const Characteristics<T>& chars,
                     const ScalarField<T>& factor, ScalarField<T>& out);

/// Called with slice index j and the slice, j = n_t down to 0 for backward
/// sweeps (the terminal slice included).
template <typename T>
using SliceObserver = std::function<void(int, const ScalarField<T>&)>;

template <typename T>
struct AdjointSolution {
    ScalarField<T> initial; // slice at t = 0
    std::optional<TimeSeries<T>> history;
};

// --- state equation: dm/dt + grad m . v = 0, m(0) = m_T, forward ---------

template <typename T>
TimeSeries<T> solve_state(const ScalarField<T>& m_T, const VectorField<T>& v, int nt);
template <typename T>
TimeSeries<T> solve_state(const ScalarField<T>& m_T, const Characteristics<T>& bwd, int nt);

// --- adjoint: -dl/dt - div(l v) = 0, terminal condition, backward --------

template <typename T>
AdjointSolution<T> solve_adjoint(const ScalarField<T>& terminal, const VectorField<T>& v, int nt,
                                 bool needs_history = false,
                                 const SliceObserver<T>& observe = {});
/// Context variant reusing forward characteristics and the reaction factor.
template <typename T>
AdjointSolution<T> sweep_continuity(ScalarField<T> terminal,
                                    const Characteristics<T>& fwd,
                                    const ScalarField<T>& factor, int nt, bool needs_history,
                                    const SliceObserver<T>& observe = {});

// --- incremental state: dmt/dt + grad mt . v + grad m . vt = 0, mt(0)=0 --

template <typename T>
TimeSeries<T> solve_inc_state(const TimeSeries<T>& m_history, const VectorField<T>& v,
                              const VectorField<T>& v_tilde, int nt);
template <typename T>
TimeSeries<T> solve_inc_state(const TimeSeries<T>& m_history, const Characteristics<T>& bwd,
                              const VectorField<T>& v_tilde, int nt);

// --- incremental adjoint: -dlt/dt - div(lt v + l vt) = 0, backward -------
// Gauss-Newton mode drops the lambda term (plain continuity sweep); full
// Newton integrates the -div(lambda vt) source and needs the adjoint history.

template <typename T>
AdjointSolution<T> solve_inc_adjoint(const ScalarField<T>& terminal,
                                     const TimeSeries<T>* lambda_history, const VectorField<T>& v,
                                     const VectorField<T>& v_tilde, int nt, bool gauss_newton,
                                     const SliceObserver<T>& observe = {});
template <typename T>
AdjointSolution<T> solve_inc_adjoint(ScalarField<T> terminal,
                                     const TimeSeries<T>* lambda_history,
                                     const Characteristics<T>& fwd, const ScalarField<T>& factor,
                                     const VectorField<T>& v_tilde, int nt, bool gauss_newton,
                                     const SliceObserver<T>& observe = {});

/// grad(f) . w through one forward transform and three inverse transforms.
template <typename T>
ScalarField<T> gradient_dot(const ScalarField<T>& f, const VectorField<T>& w);

} // namespace veloreg
