#include "veloreg/precond.hpp"

#include <cmath>
#include <random>

#include "veloreg/field_ops.hpp"
#include "veloreg/log.hpp"

namespace veloreg {

template <typename T>
VectorField<T> apply_spectral_precond(const VectorField<T>& r, const RegNorm& norm, double beta_v,
                                      bool split) {
    return apply_reg_operator(r, norm, split ? RegOpMode::inverse_sqrt : RegOpMode::inverse,
                              beta_v);
}

template <typename T>
VectorField<T> split_system_matvec(const Objective<T>& obj, const EvalState<T>& state,
                                   const VectorField<T>& w) {
    return obj.split_matvec(state, w);
}

// ---------------------------------------------------------------------------
// Lanczos bounds
// ---------------------------------------------------------------------------

namespace {

// Eigenvalues of a symmetric tridiagonal matrix outside [lo, hi] cannot
// exist by Gershgorin; bisection with the Sturm sequence count.
int sturm_count_below(const std::vector<double>& alpha, const std::vector<double>& beta,
                      double x) {
    int count = 0;
    double q = 1.0;
    const std::size_t m = alpha.size();
    for (std::size_t i = 0; i < m; ++i) {
        double b2 = i == 0 ? 0.0 : beta[i - 1] * beta[i - 1];
        q = alpha[i] - x - (q == 0.0 ? b2 / 1e-300 : b2 / q);
        if (q < 0.0) ++count;
    }
    return count;
}

double tridiag_extreme(const std::vector<double>& alpha, const std::vector<double>& beta,
                       bool largest) {
    double lo = alpha[0], hi = alpha[0];
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(beta[i - 1]);
        if (i + 1 < alpha.size()) r += std::abs(beta[i]);
        lo = std::min(lo, alpha[i] - r);
        hi = std::max(hi, alpha[i] + r);
    }
    const int m = static_cast<int>(alpha.size());
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        int below = sturm_count_below(alpha, beta, mid);
        if (largest ? (below >= m) : (below >= 1))
            hi = mid;
        else
            lo = mid;
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

template <typename T>
std::pair<double, double> lanczos_bounds(const LinearOp<T>& op, const Grid3& grid, int iterations,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VectorField<T> q(grid);
    for (int c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < q.size(); ++i) q[c][i] = static_cast<T>(dist(rng));
    double nrm = norm_l2(q);
    scale(q, 1.0 / nrm);

    VectorField<T> q_prev(grid, T(0)), w(grid);
    std::vector<double> alpha, beta;
    for (int j = 0; j < iterations; ++j) {
        op(q, w);
        double a = dot_l2(q, w);
        alpha.push_back(a);
        // w = w - a q - b q_prev
        add_scaled(w, -a, q);
        if (j > 0) add_scaled(w, -beta.back(), q_prev);
        double b = norm_l2(w);
        if (b < 1e-12) break; // breakdown: Krylov space exhausted
        if (j + 1 < iterations) beta.push_back(b);
        q_prev = q;
        q = w;
        scale(q, 1.0 / b);
    }
    beta.resize(alpha.size() > 0 ? alpha.size() - 1 : 0);
    double lo = tridiag_extreme(alpha, beta, false);
    double hi = tridiag_extreme(alpha, beta, true);
    return {0.95 * lo, 1.05 * hi};
}

// ---------------------------------------------------------------------------
// Chebyshev semi-iteration
// ---------------------------------------------------------------------------

template <typename T>
VectorField<T> cheb_solve(const LinearOp<T>& op, const VectorField<T>& rhs, int k,
                          std::pair<double, double> bounds) {
    const double lo = bounds.first, hi = bounds.second;
    if (lo <= 0.0) throw ArgumentError("cheb_solve: lower eigenvalue bound must be > 0");
    if (hi < lo) throw ArgumentError("cheb_solve: invalid eigenvalue bounds");
    const double theta = 0.5 * (hi + lo);
    const double delta = 0.5 * (hi - lo);

    VectorField<T> x(rhs.grid(), T(0));
    if (norm_l2(rhs) == 0.0) return x;
    VectorField<T> r = rhs, Ad(rhs.grid());

    if (delta <= 1e-14 * theta) { // spectrum collapsed to a point: Richardson is exact
        for (int j = 0; j < k; ++j) {
            add_scaled(x, 1.0 / theta, r);
            op(x, Ad);
            lin_comb(r, 1.0, rhs, -1.0, Ad);
            if (norm_l2(r) == 0.0) break;
        }
        return x;
    }

    const double sigma1 = theta / delta;
    double rho = 1.0 / sigma1;
    VectorField<T> d = r;
    scale(d, 1.0 / theta);
    add_scaled(x, 1.0, d);
    for (int j = 1; j < k; ++j) {
        op(d, Ad);
        add_scaled(r, -1.0, Ad);
        const double rho_next = 1.0 / (2.0 * sigma1 - rho);
        // d = rho_next*rho*d + (2*rho_next/delta) r
        lin_comb(d, rho_next * rho, d, 2.0 * rho_next / delta, r);
        add_scaled(x, 1.0, d);
        rho = rho_next;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Two-level context
// ---------------------------------------------------------------------------

namespace {

Grid3 half_grid(const Grid3& g) {
    for (int a = 0; a < 3; ++a) {
        if (g.dims[a] % 2 != 0 || g.dims[a] / 2 < 4)
            throw DimensionError("two-level preconditioner: fine grid " + g.str() +
                                 " does not halve to a valid coarse grid");
    }
    return Grid3(g.dims[0] / 2, g.dims[1] / 2, g.dims[2] / 2);
}

} // namespace

template <typename T>
TwoLevelContext<T>::TwoLevelContext(const TwoLevelOptions& opts, SolveCounters* coarse_counters)
    : opts_(opts), counters_(coarse_counters) {}

template <typename T>
void TwoLevelContext<T>::rebuild(const Objective<T>& fine_obj, const EvalState<T>& fine_state,
                                 double eps_H) {
    const Grid3& fine = fine_obj.grid();
    coarse_grid_ = half_grid(fine);
    const RegModel& model = fine_obj.model();

    m_R_c_ = spectral_resample(fine_obj.m_R(), coarse_grid_);
    m_T_c_ = spectral_resample(fine_obj.m_T(), coarse_grid_);
    coarse_obj_ = std::make_unique<Objective<T>>(m_R_c_, m_T_c_, model, counters_);

    // Coarse evaluation context from restrictions: restricted velocity and
    // state history, freshly traced coarse characteristics.
    EvalState<T>& cs = coarse_state_;
    cs = EvalState<T>();
    cs.v = spectral_resample(fine_state.v, coarse_grid_);
    cs.bwd = trace_characteristics(cs.v, model.nt, TraceDirection::backward);
    cs.fwd = trace_characteristics(cs.v, model.nt, TraceDirection::forward);
    auto div_v = divergence(cs.v);
    cs.factor_fwd = continuity_factor(div_v, cs.fwd);
    cs.has_adjoint_ctx = true;
    cs.m_history = TimeSeries<T>(coarse_grid_, model.nt);
    for (int j = 0; j <= model.nt; ++j)
        cs.m_history.slice(j) = spectral_resample(fine_state.m_history.slice(j), coarse_grid_);
    if (!model.gauss_newton) {
        if (!fine_state.lambda_history)
            throw LogicError("two-level rebuild: full Newton needs the fine adjoint history");
        cs.lambda_history.emplace(coarse_grid_, model.nt);
        for (int j = 0; j <= model.nt; ++j)
            cs.lambda_history->slice(j) =
                spectral_resample(fine_state.lambda_history->slice(j), coarse_grid_);
    }

    eps_M_ = opts_.kappa * eps_H;
    inner_diverged_ = false;

    if (opts_.inner == TwoLevelOptions::Inner::cheb) {
        LinearOp<T> op = [this](const VectorField<T>& u, VectorField<T>& out) {
            out = coarse_matvec(u);
        };
        bounds_ = lanczos_bounds(op, coarse_grid_, opts_.lanczos_iterations, opts_.lanczos_seed);
        ++lanczos_runs_;
    }
}

template <typename T>
VectorField<T> TwoLevelContext<T>::coarse_matvec(const VectorField<T>& u_bar) const {
    return split_system_matvec(*coarse_obj_, coarse_state_, u_bar);
}

template <typename T>
VectorField<T> TwoLevelContext<T>::apply(const VectorField<T>& s) const {
    if (!coarse_obj_) throw LogicError("two-level preconditioner applied before rebuild");
    // low/high split through the coarse band: F_L = Q_P Q_R
    auto s_low_c = spectral_resample(s, coarse_grid_);         // Q_R s (= Q_R F_L s)
    auto s_low = spectral_resample(s_low_c, s.grid());         // F_L s
    VectorField<T> s_high(s.grid());
    lin_comb(s_high, 1.0, s, -1.0, s_low);

    LinearOp<T> op = [this](const VectorField<T>& u, VectorField<T>& out) {
        out = coarse_matvec(u);
    };
    VectorField<T> u_bar;
    if (norm_l2(s_low_c) <= 1e-14 * std::max(1.0, norm_l2(s))) {
        // nothing representable on the coarse band; skip the inner solve
        u_bar = VectorField<T>(coarse_grid_, T(0));
    } else if (opts_.inner == TwoLevelOptions::Inner::cheb) {
        u_bar = cheb_solve(op, s_low_c, opts_.cheb_iterations, bounds_);
    } else {
        PcgStats st;
        LinearOp<T> ident = [](const VectorField<T>& r, VectorField<T>& z) { z = r; };
        u_bar = pcg_solve(op, s_low_c, eps_M_, opts_.max_inner_iterations, ident, st);
        if (!st.converged && !st.negative_curvature) {
            inner_diverged_ = true;
            log_line(LogLevel::info, "two-level: nested PCG hit the iteration cap, using the "
                                     "best coarse iterate");
        }
    }
    auto u = spectral_resample(u_bar, s.grid());
    add_scaled(u, 1.0, s_high);
    return u;
}

#define VELOREG_INSTANTIATE(T)                                                                     \
    template VectorField<T> apply_spectral_precond<T>(const VectorField<T>&, const RegNorm&,       \
                                                      double, bool);                               \
    template VectorField<T> split_system_matvec<T>(const Objective<T>&, const EvalState<T>&,       \
                                                   const VectorField<T>&);                         \
    template std::pair<double, double> lanczos_bounds<T>(const LinearOp<T>&, const Grid3&, int,    \
                                                         std::uint64_t);                           \
    template VectorField<T> cheb_solve<T>(const LinearOp<T>&, const VectorField<T>&, int,          \
                                          std::pair<double, double>);                              \
    template class TwoLevelContext<T>;                                                             \
    template class TwoLevelPreconditioner<T>;

VELOREG_INSTANTIATE(float)
VELOREG_INSTANTIATE(double)
#undef VELOREG_INSTANTIATE

} // namespace veloreg
