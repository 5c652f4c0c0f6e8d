#include "veloreg/objective.hpp"

#include "veloreg/fft.hpp"
#include "veloreg/field_ops.hpp"

namespace veloreg {
namespace {

/// b[c] += w * lam * d(f)/dx_c for all c, one scratch field.
template <typename T>
void accumulate_weighted_grad(VectorField<T>& b, const ScalarField<T>& f,
                              const ScalarField<T>& lam, double w) {
    const Grid3& g = f.grid();
    Spectrum c, dc(static_cast<std::size_t>(spectrum_size(g)));
    fft_forward(f, c);
    ScalarField<T> scratch(g);
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
        par::for_each(b.size(), [&](std::int64_t i) {
            b[axis][i] = static_cast<T>(b[axis][i] + w * lam[i] * scratch[i]);
        });
    }
}

} // namespace

template <typename T>
Objective<T>::Objective(const ScalarField<T>& m_R, const ScalarField<T>& m_T,
                        const RegModel& model, SolveCounters* counters)
    : m_R_(&m_R), m_T_(&m_T), model_(model), counters_(counters) {
    model_.validate();
    require_same_grid(m_R, m_T, "Objective");
    ScalarField<T> diff;
    lin_comb(diff, 1.0, m_T, -1.0, m_R);
    initial_mismatch_ = inner_product(diff, diff);
}

template <typename T>
EvalState<T> Objective<T>::evaluate(const VectorField<T>& v) const {
    if (!v.all_finite()) throw NumericError("evaluate_objective: non-finite velocity");
    require_same_grid(v[0], *m_R_, "evaluate_objective");

    EvalState<T> s;
    s.v = v;
    s.bwd = trace_characteristics(v, model_.nt, TraceDirection::backward);
    s.m_history = solve_state(*m_T_, s.bwd, model_.nt);
    if (counters_) counters_->pde_solves += 1;

    ScalarField<T> diff;
    lin_comb(diff, 1.0, s.m_history.final(), -1.0, *m_R_);
    s.mismatch = inner_product(diff, diff);
    s.mismatch_rel = initial_mismatch_ > 0.0 ? s.mismatch / initial_mismatch_ : 0.0;

    double reg = 0.5 * model_.beta_v *
                 inner_product(apply_reg_operator(v, model_.norm, RegOpMode::apply), v);
    double penalty = 0.0;
    if (model_.norm.div_penalty) {
        auto w = divergence(v);
        penalty = 0.5 * model_.norm.beta_w * inner_product(helmholtz1_apply(w), w);
    }
    s.objective = 0.5 * s.mismatch + reg + penalty;
    if (!std::isfinite(s.objective))
        throw NumericError("evaluate_objective: objective is not finite");
    if (counters_) counters_->objective_evals += 1;
    return s;
}

template <typename T>
void Objective<T>::prepare_adjoint_ctx(EvalState<T>& s) const {
    if (s.has_adjoint_ctx) return;
    s.fwd = trace_characteristics(s.v, model_.nt, TraceDirection::forward);
    auto div_v = divergence(s.v);
    s.factor_fwd = continuity_factor(div_v, s.fwd);
    s.has_adjoint_ctx = true;
}

template <typename T>
void Objective<T>::compute_gradient(EvalState<T>& s) const {
    prepare_adjoint_ctx(s);
    const int nt = model_.nt;
    const double dt = 1.0 / nt;

    ScalarField<T> terminal;
    lin_comb(terminal, 1.0, *m_R_, -1.0, s.m_history.final());

    VectorField<T> b(grid(), T(0));
    SliceObserver<T> accumulate = [&](int j, const ScalarField<T>& lam) {
        const double w = (j == 0 || j == nt) ? 0.5 * dt : dt;
        accumulate_weighted_grad(b, s.m_history.slice(j), lam, w);
    };
    const bool keep_hist = !model_.gauss_newton;
    auto sol = sweep_continuity(std::move(terminal), s.fwd, s.factor_fwd, nt, keep_hist,
                                accumulate);
    if (keep_hist) s.lambda_history = std::move(sol.history);
    if (counters_) counters_->pde_solves += 1;

    apply_projection_inplace(b, model_.projection, model_.beta_v, model_.norm.beta_w);
    s.gradient = std::move(b);
    auto reg = apply_reg_operator(s.v, model_.norm, RegOpMode::apply, model_.beta_v);
    add_scaled(s.gradient, 1.0, reg);
    s.has_gradient = true;
    if (counters_) counters_->gradient_evals += 1;
}

template <typename T>
VectorField<T> Objective<T>::hessian_matvec(const EvalState<T>& s,
                                            const VectorField<T>& v_tilde) const {
    auto out = hessian_data_matvec(s, v_tilde);
    auto reg = apply_reg_operator(v_tilde, model_.norm, RegOpMode::apply, model_.beta_v);
    add_scaled(out, 1.0, reg);
    return out;
}

template <typename T>
VectorField<T> Objective<T>::hessian_data_matvec(const EvalState<T>& s,
                                                 const VectorField<T>& v_tilde) const {
    if (!v_tilde.all_finite()) throw NumericError("hessian_matvec: non-finite direction");
    if (!s.has_adjoint_ctx)
        throw LogicError("hessian_matvec: evaluation context is missing the adjoint sweep data "
                         "(compute the gradient first)");
    if (!model_.gauss_newton && !s.lambda_history)
        throw LogicError("hessian_matvec: full Newton mode needs the adjoint history");
    const int nt = model_.nt;
    const double dt = 1.0 / nt;

    auto mt_history = solve_inc_state(s.m_history, s.bwd, v_tilde, nt);
    if (counters_) counters_->pde_solves += 1;

    ScalarField<T> terminal(grid());
    par::for_each(terminal.size(),
                  [&](std::int64_t i) { terminal[i] = static_cast<T>(-mt_history.final()[i]); });

    VectorField<T> b(grid(), T(0));
    SliceObserver<T> accumulate = [&](int j, const ScalarField<T>& lam_tilde) {
        const double w = (j == 0 || j == nt) ? 0.5 * dt : dt;
        accumulate_weighted_grad(b, s.m_history.slice(j), lam_tilde, w);
        if (!model_.gauss_newton)
            accumulate_weighted_grad(b, mt_history.slice(j), s.lambda_history->slice(j), w);
    };
    solve_inc_adjoint<T>(std::move(terminal), s.lambda_history ? &*s.lambda_history : nullptr,
                         s.fwd, s.factor_fwd, v_tilde, nt, model_.gauss_newton, accumulate);
    if (counters_) counters_->pde_solves += 1;

    apply_projection_inplace(b, model_.projection, model_.beta_v, model_.norm.beta_w);
    if (counters_) counters_->hessian_matvecs += 1;
    return b;
}

template <typename T>
VectorField<T> Objective<T>::split_matvec(const EvalState<T>& s, const VectorField<T>& w) const {
    auto u = apply_reg(w, RegOpMode::inverse_sqrt);
    auto du = hessian_data_matvec(s, u);
    auto out = apply_reg(du, RegOpMode::inverse_sqrt);
    add_scaled(out, 1.0, w);
    if (model_.norm.symbol(0.0) == 0.0) {
        const double n = static_cast<double>(w.size());
        for (int comp = 0; comp < 3; ++comp) {
            double mean = par::sum(w.size(), [&](std::int64_t i) {
                              return static_cast<double>(w[comp][i]);
                          }) / n;
            par::for_each(out.size(), [&](std::int64_t i) {
                out[comp][i] = static_cast<T>(out[comp][i] - mean);
            });
        }
    }
    return out;
}

template <typename T>
VectorField<T> Objective<T>::apply_reg(const VectorField<T>& u, RegOpMode mode) const {
    return apply_reg_operator(u, model_.norm, mode, model_.beta_v);
}

template <typename T>
VectorField<T> Objective<T>::apply_K(const VectorField<T>& u) const {
    return apply_projection(u, model_.projection, model_.beta_v, model_.norm.beta_w);
}

// ---------------------------------------------------------------------------

template <typename T>
ObjectiveValue<T> evaluate_objective(const VectorField<T>& v, const ScalarField<T>& m_R,
                                     const ScalarField<T>& m_T, const RegModel& model) {
    Objective<T> obj(m_R, m_T, model);
    auto s = obj.evaluate(v);
    return ObjectiveValue<T>{s.objective, s.mismatch, std::move(s.m_history)};
}

template <typename T>
VectorField<T> reduced_gradient(const Objective<T>& obj, EvalState<T>& s) {
    if (!s.has_gradient) obj.compute_gradient(s);
    return s.gradient;
}

template <typename T>
VectorField<T> hessian_matvec(const Objective<T>& obj, const EvalState<T>& s,
                              const VectorField<T>& v_tilde, bool gauss_newton) {
    if (gauss_newton != obj.model().gauss_newton)
        throw ArgumentError("hessian_matvec: mode does not match the evaluation context");
    return obj.hessian_matvec(s, v_tilde);
}

#define VELOREG_INSTANTIATE(T)                                                                     \
    template class Objective<T>;                                                                   \
    template ObjectiveValue<T> evaluate_objective<T>(const VectorField<T>&, const ScalarField<T>&, \
                                                     const ScalarField<T>&, const RegModel&);      \
    template VectorField<T> reduced_gradient<T>(const Objective<T>&, EvalState<T>&);               \
    template VectorField<T> hessian_matvec<T>(const Objective<T>&, const EvalState<T>&,            \
                                              const VectorField<T>&, bool);

VELOREG_INSTANTIATE(float)
VELOREG_INSTANTIATE(double)
#undef VELOREG_INSTANTIATE

} // namespace veloreg
