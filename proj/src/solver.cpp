#include "veloreg/solver.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "veloreg/field_ops.hpp"
#include "veloreg/log.hpp"

namespace veloreg {

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::zero_gradient: return "zero_gradient";
        case StopReason::converged_rel: return "converged_rel";
        case StopReason::converged_abs: return "converged_abs";
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

double compute_forcing(double grad_norm, double grad0_norm) {
    if (grad0_norm <= 0.0)
        throw LogicError("compute_forcing: |g_0| = 0, the solver should have terminated");
    return std::min(0.5, std::sqrt(grad_norm / grad0_norm));
}

std::string SolveReport::csv_header() {
    return "iter,objective,mismatch_rel,grad_norm,grad_rel,step_length,forcing,"
           "inner_iterations,fine_matvecs,coarse_matvecs,pde_solves,wall_time_s";
}

void SolveReport::write_csv(std::ostream& os, const std::vector<std::string>& comments) const {
    for (const auto& line : comments) os << "# " << line << "\n";
    os << csv_header() << "\n";
    std::ostringstream buf;
    buf.precision(17);
    for (const auto& r : iterations) {
        buf.str("");
        buf << r.k << ',' << r.objective << ',' << r.mismatch_rel << ',' << r.grad_norm << ','
            << r.grad_rel << ',' << r.step_length << ',' << r.forcing << ','
            << r.inner_iterations << ',' << r.fine_matvecs << ',' << r.coarse_matvecs << ','
            << r.pde_solves << ',' << r.wall_time_s;
        os << buf.str() << "\n";
    }
}

// ---------------------------------------------------------------------------

template <typename T>
VectorField<T> pcg_solve(const LinearOp<T>& apply, const VectorField<T>& rhs, double rel_tol,
                         int max_iter, const LinearOp<T>& precond, PcgStats& stats) {
    stats = PcgStats{};
    VectorField<T> x(rhs.grid(), T(0));
    const double r0 = norm_l2(rhs);
    if (r0 == 0.0) {
        stats.converged = true;
        stats.rel_residual = 0.0;
        return x;
    }
    const double target = rel_tol * r0;

    VectorField<T> r = rhs;
    VectorField<T> z(rhs.grid());
    precond(r, z);
    VectorField<T> s = z;
    VectorField<T> Hs(rhs.grid());
    double rz = dot_l2(r, z);

    for (int it = 0; it < max_iter; ++it) {
        apply(s, Hs);
        const double sHs = dot_l2(s, Hs);
        if (sHs <= 0.0) {
            stats.negative_curvature = true;
            if (it == 0) x = z; // preconditioned steepest descent, keeps the search usable
            stats.iterations = it + 1;
            stats.rel_residual = norm_l2(r) / r0;
            return x;
        }
        const double kappa = rz / sHs;
        add_scaled(x, kappa, s);
        add_scaled(r, -kappa, Hs);
        stats.iterations = it + 1;
        const double rn = norm_l2(r);
        stats.rel_residual = rn / r0;
        if (rn < target) {
            stats.converged = true;
            return x;
        }
        precond(r, z);
        const double rz_new = dot_l2(r, z);
        const double mu = rz_new / rz;
        rz = rz_new;
        // s = z + mu s
        lin_comb(s, 1.0, z, mu, s);
    }
    stats.hit_max_iterations = true;
    return x;
}

// ---------------------------------------------------------------------------

template <typename T>
LineSearchResult<T> armijo_search(const Objective<T>& obj, const EvalState<T>& current,
                                  const VectorField<T>& direction, const SolverParams& params) {
    if (!current.has_gradient)
        throw LogicError("armijo_search: current state has no gradient");
    const double slope = inner_product(current.gradient, direction);
    if (slope >= 0.0)
        throw ArgumentError("armijo_search: not a descent direction (slope = " +
                            std::to_string(slope) + ")");
    LineSearchResult<T> res;
    double alpha = 1.0;
    for (int t = 0; t < params.armijo_max_trials; ++t) {
        VectorField<T> trial_v;
        lin_comb(trial_v, 1.0, current.v, alpha, direction);
        auto trial = obj.evaluate(trial_v);
        res.trials = t + 1;
        if (trial.objective <= current.objective + params.armijo_c1 * alpha * slope) {
            res.success = true;
            res.alpha = alpha;
            res.state = std::move(trial);
            return res;
        }
        alpha *= params.armijo_backtrack;
    }
    return res; // failure, caller keeps the current iterate
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
IterationRecord make_record(int k, const EvalState<T>& s, double grad_norm, double grad0,
                            const SolveCounters& fine, const SolveCounters* coarse,
                            double elapsed) {
    IterationRecord r;
    r.k = k;
    r.objective = s.objective;
    r.mismatch_rel = s.mismatch_rel;
    r.grad_norm = grad_norm;
    r.grad_rel = grad0 > 0 ? grad_norm / grad0 : 0.0;
    r.fine_matvecs = fine.hessian_matvecs;
    r.coarse_matvecs = coarse ? coarse->hessian_matvecs : 0;
    r.pde_solves = fine.pde_solves;
    r.wall_time_s = elapsed;
    return r;
}

} // namespace

template <typename T>
GnSolveResult<T> gauss_newton_solve(const ScalarField<T>& m_R, const ScalarField<T>& m_T,
                                    const VectorField<T>& v0, const RegModel& model,
                                    const SolverParams& params, KrylovPreconditioner<T>& precond,
                                    SolveCounters* coarse_counters) {
    params.validate();
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    GnSolveResult<T> res;
    SolveReport& rep = res.report;
    SolveCounters& fine = rep.fine;
    Objective<T> obj(m_R, m_T, model, &fine);

    auto state = obj.evaluate(v0);
    obj.compute_gradient(state);
    const double g0 = norm_l2(state.gradient);
    rep.grad0 = g0;
    rep.iterations.push_back(make_record(0, state, g0, g0, fine, coarse_counters, elapsed()));

    if (g0 == 0.0) {
        rep.stop = StopReason::zero_gradient;
        rep.success = true;
    } else {
        double gk = g0;
        int k = 0;
        for (;;) {
            const bool rel_ok = params.squared_norm_stop
                                    ? (gk * gk <= params.eps_opt * g0 * g0)
                                    : (gk <= params.eps_opt * g0);
            if (rel_ok) {
                rep.stop = StopReason::converged_rel;
                rep.success = true;
                break;
            }
            if (gk <= params.abs_grad_tol) {
                rep.stop = StopReason::converged_abs;
                rep.success = true;
                break;
            }
            if (k >= params.max_newton) {
                rep.stop = StopReason::max_iterations;
                break;
            }

            const double eps_H = compute_forcing(gk, g0);
            precond.rebuild(obj, state, eps_H);

            PcgStats pcg;
            VectorField<T> direction;
            if (precond.split_system()) {
                // (I + R H_data R) w = -R g,  v~ = R w,  R = (beta_v A)^(-1/2)
                LinearOp<T> op = [&](const VectorField<T>& w, VectorField<T>& out) {
                    out = obj.split_matvec(state, w);
                };
                LinearOp<T> pc = [&](const VectorField<T>& r, VectorField<T>& z) {
                    precond.apply(r, z);
                };
                auto rhs = obj.apply_reg(state.gradient, RegOpMode::inverse_sqrt);
                scale(rhs, -1.0);
                auto w = pcg_solve<T>(op, rhs, eps_H, params.max_krylov, pc, pcg);
                direction = obj.apply_reg(w, RegOpMode::inverse_sqrt);
            } else {
                LinearOp<T> op = [&](const VectorField<T>& u, VectorField<T>& out) {
                    out = obj.hessian_matvec(state, u);
                };
                LinearOp<T> pc = [&](const VectorField<T>& r, VectorField<T>& z) {
                    precond.apply(r, z);
                };
                VectorField<T> rhs = state.gradient;
                scale(rhs, -1.0);
                direction = pcg_solve<T>(op, rhs, eps_H, params.max_krylov, pc, pcg);
            }

            const double slope = inner_product(state.gradient, direction);
            if (slope >= 0.0) {
                log_line(LogLevel::info, "solver: inner solve returned a non-descent direction");
                rep.stop = StopReason::line_search_failure;
                break;
            }
            auto ls = armijo_search(obj, state, direction, params);
            if (!ls.success) {
                rep.stop = StopReason::line_search_failure;
                break;
            }
            state = std::move(ls.state);
            obj.compute_gradient(state);
            gk = norm_l2(state.gradient);
            ++k;

            auto row = make_record(k, state, gk, g0, fine, coarse_counters, elapsed());
            row.step_length = ls.alpha;
            row.forcing = eps_H;
            row.inner_iterations = pcg.iterations;
            rep.iterations.push_back(row);
            log_line(LogLevel::info, "solver: k=" + std::to_string(k) +
                                         " J=" + std::to_string(state.objective) +
                                         " |g|rel=" + std::to_string(gk / g0) +
                                         " alpha=" + std::to_string(ls.alpha) +
                                         " pcg=" + std::to_string(pcg.iterations));
        }
        rep.outer_iterations = k;
    }

    if (coarse_counters) rep.coarse = *coarse_counters;
    rep.final_objective = state.objective;
    rep.final_mismatch_rel = state.mismatch_rel;
    const double gfin = norm_l2(state.gradient);
    rep.final_grad_rel = g0 > 0 ? gfin / g0 : 0.0;
    rep.wall_time_s = elapsed();
    res.v = state.v;
    res.state = std::move(state);
    return res;
}

#define VELOREG_INSTANTIATE(T)                                                                     \
    template VectorField<T> pcg_solve<T>(const LinearOp<T>&, const VectorField<T>&, double, int,   \
                                         const LinearOp<T>&, PcgStats&);                           \
    template LineSearchResult<T> armijo_search<T>(const Objective<T>&, const EvalState<T>&,        \
                                                  const VectorField<T>&, const SolverParams&);     \
    template GnSolveResult<T> gauss_newton_solve<T>(const ScalarField<T>&, const ScalarField<T>&,  \
                                                    const VectorField<T>&, const RegModel&,        \
                                                    const SolverParams&,                           \
                                                    KrylovPreconditioner<T>&, SolveCounters*);

VELOREG_INSTANTIATE(float)
VELOREG_INSTANTIATE(double)
#undef VELOREG_INSTANTIATE

} // namespace veloreg
