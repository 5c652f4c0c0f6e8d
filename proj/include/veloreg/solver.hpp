#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "veloreg/objective.hpp"

namespace veloreg {

struct SolverParams {
    double eps_opt = 5e-2;     // relative gradient tolerance
    double abs_grad_tol = 1e-6;
    int max_newton = 50;
    int max_krylov = 100;
    double armijo_c1 = 1e-4;
    double armijo_backtrack = 0.5;
    int armijo_max_trials = 20;
    // ||g_k||^2 <= eps_opt ||g_0||^2 when true (the outer-iteration form);
    // ||g_k|| <= eps_opt ||g_0|| when false.
    bool squared_norm_stop = true;

    void validate() const {
        if (eps_opt <= 0 || abs_grad_tol <= 0 || armijo_c1 <= 0)
            throw ArgumentError("SolverParams: tolerances must be > 0");
        if (max_newton < 1 || max_krylov < 1 || armijo_max_trials < 1)
            throw ArgumentError("SolverParams: iteration limits must be >= 1");
        if (armijo_backtrack <= 0 || armijo_backtrack >= 1)
            throw ArgumentError("SolverParams: backtracking factor must be in (0,1)");
    }
};

enum class StopReason {
    zero_gradient,       // g_0 == 0, nothing to do
    converged_rel,       // relative gradient criterion
    converged_abs,       // absolute gradient lower bound
    max_iterations,
    line_search_failure,
};

const char* to_string(StopReason r);

struct IterationRecord {
    int k = 0;
    double objective = 0.0;
    double mismatch_rel = 0.0;
    double grad_norm = 0.0;
    double grad_rel = 0.0;
    double step_length = 0.0;
    double forcing = 0.0;
    int inner_iterations = 0;
    long fine_matvecs = 0;   // cumulative
    long coarse_matvecs = 0; // cumulative
    long pde_solves = 0;     // cumulative, fine grid
    double wall_time_s = 0.0;
};

struct SolveReport {
    std::vector<IterationRecord> iterations;
    StopReason stop = StopReason::max_iterations;
    bool success = false;
    int outer_iterations = 0;
    double grad0 = 0.0;
    double final_grad_rel = 0.0;
    double final_mismatch_rel = 0.0;
    double final_objective = 0.0;
    double wall_time_s = 0.0;
    SolveCounters fine;
    SolveCounters coarse;

    static std::string csv_header();
    void write_csv(std::ostream& os, const std::vector<std::string>& comment_lines = {}) const;
};

/// Superlinear forcing sequence, min(0.5, sqrt(|g_k| / |g_0|)).
double compute_forcing(double grad_norm, double grad0_norm);

// ---------------------------------------------------------------------------
// Preconditioned conjugate gradients (inner iterations)
// ---------------------------------------------------------------------------

template <typename T>
using LinearOp = std::function<void(const VectorField<T>&, VectorField<T>&)>;

struct PcgStats {
    int iterations = 0;
    double rel_residual = 1.0;
    bool converged = false;
    bool negative_curvature = false;
    bool hit_max_iterations = false;
};

/// Standard PCG with the residual recurrence; terminates when the residual
/// norm drops below rel_tol * |rhs| (the forcing tolerance is interpreted
/// relative to the initial residual). On indefiniteness the current iterate
/// is returned with a flag (the preconditioned residual when no step has
/// been taken yet).
template <typename T>
VectorField<T> pcg_solve(const LinearOp<T>& apply, const VectorField<T>& rhs, double rel_tol,
                         int max_iter, const LinearOp<T>& precond, PcgStats& stats);

// ---------------------------------------------------------------------------
// Line search
// ---------------------------------------------------------------------------

template <typename T>
struct LineSearchResult {
    bool success = false;
    double alpha = 0.0;
    int trials = 0;
    EvalState<T> state; // evaluation at the accepted point
};

/// Backtracking Armijo search from alpha = 1. Requires a descent direction.
template <typename T>
LineSearchResult<T> armijo_search(const Objective<T>& obj, const EvalState<T>& current,
                                  const VectorField<T>& direction, const SolverParams& params);

// ---------------------------------------------------------------------------
// Outer Gauss-Newton iteration
// ---------------------------------------------------------------------------

/// Inner-solve preconditioner strategy. rebuild() is called once per outer
/// iteration with the frozen evaluation context and the forcing tolerance;
/// apply() must then be a fixed (up to inner-solver nonlinearity) SPD
/// operation. When split_system() is true the outer PCG runs on the
/// regularization split-preconditioned system.
template <typename T>
class KrylovPreconditioner {
public:
    virtual ~KrylovPreconditioner() = default;
    virtual void rebuild(const Objective<T>& obj, const EvalState<T>& state, double eps_H) = 0;
    virtual bool split_system() const { return false; }
    virtual void apply(const VectorField<T>& r, VectorField<T>& z) = 0;
};

/// Inverse regularization operator (beta_v A)^-1, applied spectrally.
template <typename T>
class SpectralPreconditioner final : public KrylovPreconditioner<T> {
public:
    void rebuild(const Objective<T>& obj, const EvalState<T>&, double) override { obj_ = &obj; }
    void apply(const VectorField<T>& r, VectorField<T>& z) override {
        z = obj_->apply_reg(r, RegOpMode::inverse);
    }

private:
    const Objective<T>* obj_ = nullptr;
};

template <typename T>
struct GnSolveResult {
    VectorField<T> v;
    SolveReport report;
    EvalState<T> state; // final evaluation (gradient included)
};

template <typename T>
GnSolveResult<T> gauss_newton_solve(const ScalarField<T>& m_R, const ScalarField<T>& m_T,
                                    const VectorField<T>& v0, const RegModel& model,
                                    const SolverParams& params,
                                    KrylovPreconditioner<T>& precond,
                                    SolveCounters* coarse_counters = nullptr);

} // namespace veloreg
