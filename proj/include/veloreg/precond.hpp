#pragma once

#include <cstdint>
#include <memory>
#include <utility>

#include "veloreg/solver.hpp"

namespace veloreg {

/// The inverse regularization operator as a standalone operation:
/// (beta_v A)^-1 r, or its square root (the split smoother) when split=true.
/// Zero singular values of A are replaced by one before inversion, then the
/// beta_v scaling is applied.
template <typename T>
VectorField<T> apply_spectral_precond(const VectorField<T>& r, const RegNorm& norm, double beta_v,
                                      bool split = false);

/// Split-preconditioned operator (I + R H_data R) w with R = (beta_v A)^-1/2.
template <typename T>
VectorField<T> split_system_matvec(const Objective<T>& obj, const EvalState<T>& state,
                                   const VectorField<T>& w);

// ---------------------------------------------------------------------------
// Eigenvalue estimation and the Chebyshev semi-iteration
// ---------------------------------------------------------------------------

/// Extremal Ritz values of a symmetric operator from `iterations` Lanczos
/// steps with a seeded random start vector, deflated/inflated by 5% margins.
/// On breakdown the bounds from the completed steps are returned.
template <typename T>
std::pair<double, double> lanczos_bounds(const LinearOp<T>& op, const Grid3& grid, int iterations,
                                         std::uint64_t seed);

/// k steps of the classical three-term Chebyshev semi-iteration for an SPD
/// operator with spectrum inside [bounds.first, bounds.second].
template <typename T>
VectorField<T> cheb_solve(const LinearOp<T>& op, const VectorField<T>& rhs, int k,
                          std::pair<double, double> bounds);

// ---------------------------------------------------------------------------
// Two-level preconditioner
// ---------------------------------------------------------------------------

struct TwoLevelOptions {
    enum class Inner { pcg, cheb };
    Inner inner = Inner::pcg;
    double kappa = 0.1;       // PCG(kappa): eps_M = kappa * eps_H
    int cheb_iterations = 10; // CHEB(k)
    int max_inner_iterations = 500;
    int lanczos_iterations = 10;
    std::uint64_t lanczos_seed = 1234;
};

/// Coarse-grid (half resolution per axis) approximation of the split
/// Hessian: restrictions of v and the state history, coarse characteristics,
/// and the inner solver configuration. Rebuilt once per outer iteration.
template <typename T>
class TwoLevelContext {
public:
    TwoLevelContext(const TwoLevelOptions& opts, SolveCounters* coarse_counters);

    void rebuild(const Objective<T>& fine_obj, const EvalState<T>& fine_state, double eps_H);
    bool ready() const { return static_cast<bool>(coarse_obj_); }

    /// Split-form Gauss-Newton matvec discretized directly on the coarse grid.
    VectorField<T> coarse_matvec(const VectorField<T>& u_bar) const;

    /// u = Q_P u_bar + F_H s, where H_bar u_bar ~ Q_R F_L s via the inner solver.
    VectorField<T> apply(const VectorField<T>& s) const;

    const Grid3& coarse_grid() const { return coarse_grid_; }
    int lanczos_runs() const { return lanczos_runs_; }
    bool inner_diverged() const { return inner_diverged_; }
    std::pair<double, double> eig_bounds() const { return bounds_; }

private:
    TwoLevelOptions opts_;
    SolveCounters* counters_;
    Grid3 coarse_grid_;
    ScalarField<T> m_R_c_, m_T_c_;
    std::unique_ptr<Objective<T>> coarse_obj_;
    EvalState<T> coarse_state_;
    double eps_M_ = 0.1;
    std::pair<double, double> bounds_{0.0, 0.0};
    int lanczos_runs_ = 0;
    mutable bool inner_diverged_ = false;
};

/// KrylovPreconditioner adapter: outer PCG runs on the split system and this
/// object supplies the approximate inverse.
template <typename T>
class TwoLevelPreconditioner final : public KrylovPreconditioner<T> {
public:
    explicit TwoLevelPreconditioner(const TwoLevelOptions& opts = {})
        : ctx_(opts, &coarse_counters_) {}

    void rebuild(const Objective<T>& obj, const EvalState<T>& state, double eps_H) override {
        ctx_.rebuild(obj, state, eps_H);
    }
    bool split_system() const override { return true; }
    void apply(const VectorField<T>& r, VectorField<T>& z) override { z = ctx_.apply(r); }

    TwoLevelContext<T>& context() { return ctx_; }
    SolveCounters* coarse_counters() { return &coarse_counters_; }

private:
    SolveCounters coarse_counters_;
    TwoLevelContext<T> ctx_;
};

} // namespace veloreg
