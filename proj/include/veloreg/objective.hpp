#pragma once

#include <optional>

#include "veloreg/spectral.hpp"
#include "veloreg/transport.hpp"

namespace veloreg {

/// Distilled model parameters the objective/gradient/Hessian need.
struct RegModel {
    RegNorm norm;
    ProjectionKind projection = ProjectionKind::identity;
    double beta_v = 1e-2;
    int nt = 4;
    bool gauss_newton = true;

    void validate() const {
        norm.validate();
        if (beta_v <= 0.0) throw ArgumentError("RegModel: beta_v must be > 0");
        if (nt < 1) throw ArgumentError("RegModel: n_t must be >= 1");
    }
};

/// Work counters, kept separately for the fine and the coarse grid.
struct SolveCounters {
    long objective_evals = 0;
    long gradient_evals = 0;
    long hessian_matvecs = 0;
    long pde_solves = 0;
};

/// Everything frozen at one iterate v: characteristics, state history,
/// objective value, and (once computed) the reduced gradient. Immutable
/// after construction as far as concurrent matvecs are concerned.
template <typename T>
struct EvalState {
    VectorField<T> v;
    Characteristics<T> bwd;
    Characteristics<T> fwd;
    ScalarField<T> factor_fwd; // continuity reaction factor along fwd characteristics
    TimeSeries<T> m_history;
    std::optional<TimeSeries<T>> lambda_history; // kept in full-Newton mode

    double objective = 0.0;
    double mismatch = 0.0;     // |m1 - m_R|^2_L2
    double mismatch_rel = 0.0; // relative to |m_T - m_R|^2_L2
    VectorField<T> gradient;
    bool has_gradient = false;
    bool has_adjoint_ctx = false;
};

/// Reduced-space objective J(v), gradient, and Gauss-Newton Hessian matvec
/// for a fixed image pair. Time integrals are accumulated during the
/// backward sweeps; no adjoint history is stored in Gauss-Newton mode.
template <typename T>
class Objective {
public:
    Objective(const ScalarField<T>& m_R, const ScalarField<T>& m_T, const RegModel& model,
              SolveCounters* counters = nullptr);

    /// State solve + objective value (no gradient yet). 1 PDE solve.
    EvalState<T> evaluate(const VectorField<T>& v) const;

    /// Adjoint sweep with fused gradient accumulation. 1 PDE solve.
    void compute_gradient(EvalState<T>& s) const;

    /// H v~ = beta_v A v~ + K[int lambda~ grad m (+ lambda grad m~) dt].
    /// Exactly 2 PDE solves (incremental state + incremental adjoint).
    VectorField<T> hessian_matvec(const EvalState<T>& s, const VectorField<T>& v_tilde) const;

    /// The data block H_data alone (no beta_v A term); same 2 PDE solves,
    /// used by the split-preconditioned system.
    VectorField<T> hessian_data_matvec(const EvalState<T>& s, const VectorField<T>& v_tilde) const;

    /// Split-preconditioned operator w + R H_data R w (R = (beta_v A)^-1/2
    /// with the zero-singular-value convention). For seminorms the null-space
    /// correction -P0 w is included, which makes the split system exactly
    /// equivalent to H v~ = -g with v~ = R w.
    VectorField<T> split_matvec(const EvalState<T>& s, const VectorField<T>& w) const;

    /// Applies (beta_v A)^{+-1,+-1/2} of the model (regularization part).
    VectorField<T> apply_reg(const VectorField<T>& u, RegOpMode mode) const;
    /// Applies the model's projection K.
    VectorField<T> apply_K(const VectorField<T>& u) const;

    const RegModel& model() const { return model_; }
    const ScalarField<T>& m_R() const { return *m_R_; }
    const ScalarField<T>& m_T() const { return *m_T_; }
    const Grid3& grid() const { return m_R_->grid(); }
    double initial_mismatch() const { return initial_mismatch_; }
    SolveCounters* counters() const { return counters_; }

private:
    void prepare_adjoint_ctx(EvalState<T>& s) const;

    const ScalarField<T>* m_R_;
    const ScalarField<T>* m_T_;
    RegModel model_;
    SolveCounters* counters_;
    double initial_mismatch_;
};

// Free-function surface mirroring the per-operation contracts.

template <typename T>
struct ObjectiveValue {
    double value;
    double mismatch;
    TimeSeries<T> m_history;
};

template <typename T>
ObjectiveValue<T> evaluate_objective(const VectorField<T>& v, const ScalarField<T>& m_R,
                                     const ScalarField<T>& m_T, const RegModel& model);

template <typename T>
VectorField<T> reduced_gradient(const Objective<T>& obj, EvalState<T>& s);

template <typename T>
VectorField<T> hessian_matvec(const Objective<T>& obj, const EvalState<T>& s,
                              const VectorField<T>& v_tilde, bool gauss_newton);

} // namespace veloreg
