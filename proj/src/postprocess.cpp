#include "veloreg/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "veloreg/field_ops.hpp"
#include "veloreg/spectral.hpp"
#include "veloreg/transport.hpp"

namespace veloreg {

template <typename T>
ScalarField<T> det_deformation_gradient(const VectorField<T>& v, int nt) {
    // det grad y for the pullback map y = x + u solves the continuity
    // equation: D(det)/Dt = -(div v) det along forward characteristics, so
    // the advected value is scaled by exp(-trapezoid of div v).
    const Grid3& g = v.grid();
    auto bwd = trace_characteristics(v, nt, TraceDirection::backward);
    auto div_v = divergence(v);
    scale(div_v, -1.0);
    auto factor = continuity_factor(div_v, bwd);
    ScalarField<T> det(g, T(1)), next(g);
    for (int j = 0; j < nt; ++j) {
        continuity_step(det, bwd, factor, next);
        std::swap(det, next);
    }
    return det;
}

template <typename T>
VectorField<T> deformation_map(const VectorField<T>& v, int nt, bool absolute) {
    const Grid3& g = v.grid();
    const double half_dt = 0.5 / nt;
    auto bwd = trace_characteristics(v, nt, TraceDirection::backward);
    VectorField<T> v_dep(g);
    tricubic_interpolate3(v, bwd.departure, v_dep); // v along the characteristic foot

    VectorField<T> u(g, T(0)), u_dep(g);
    for (int j = 0; j < nt; ++j) {
        tricubic_interpolate3(u, bwd.departure, u_dep);
        for (int c = 0; c < 3; ++c)
            par::for_each(g.size(), [&](std::int64_t i) {
                u[c][i] = static_cast<T>(u_dep[c][i] - half_dt * (v_dep[c][i] + v[c][i]));
            });
    }
    if (!absolute) return u;

    VectorField<T> y(g);
    par::for_each(g.size(), [&](std::int64_t i) {
        std::int64_t r = i;
        const int i3 = static_cast<int>(r % g.dims[2]);
        r /= g.dims[2];
        const int i2 = static_cast<int>(r % g.dims[1]);
        const int i1 = static_cast<int>(r / g.dims[1]);
        const double x[3] = {g.coord(0, i1), g.coord(1, i2), g.coord(2, i3)};
        for (int c = 0; c < 3; ++c)
            y[c][i] = static_cast<T>(wrap_coord(x[c] + static_cast<double>(u[c][i])));
    });
    return y;
}

template <typename T>
DetStats det_stats(const ScalarField<T>& det, const ScalarField<T>* foreground_of,
                   double threshold) {
    DetStats st;
    st.min = 1e300;
    st.max = -1e300;
    double sum = 0.0;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < det.size(); ++i) {
        if (foreground_of && static_cast<double>((*foreground_of)[i]) < threshold) continue;
        double d = det[i];
        st.min = std::min(st.min, d);
        st.max = std::max(st.max, d);
        sum += d;
        ++count;
    }
    if (count == 0) return DetStats{};
    st.mean = sum / count;
    return st;
}

template <typename T>
ScalarField<T> transport_labels(const ScalarField<T>& labels, const VectorField<T>& v, int nt) {
    require_same_grid(labels, v[0], "transport_labels");
    const Grid3& g = labels.grid();

    std::set<int> codes;
    for (std::int64_t i = 0; i < labels.size(); ++i) {
        int code = static_cast<int>(std::lround(static_cast<double>(labels[i])));
        if (code != 0) codes.insert(code);
    }
    if (codes.size() > 64)
        throw ResourceError("transport_labels: more than 64 distinct labels (" +
                            std::to_string(codes.size()) + ")");

    auto bwd = trace_characteristics(v, nt, TraceDirection::backward);
    ScalarField<T> out(g, T(0));
    ScalarField<T> best(g, T(0));
    ScalarField<T> mask(g), next(g);
    for (int code : codes) {
        par::for_each(g.size(), [&](std::int64_t i) {
            int c = static_cast<int>(std::lround(static_cast<double>(labels[i])));
            mask[i] = (c == code) ? T(1) : T(0);
        });
        mask = gaussian_smooth(mask, {1.0, 1.0, 1.0});
        for (int j = 0; j < nt; ++j) {
            advect_step(mask, bwd, next);
            std::swap(mask, next);
        }
        par::for_each(g.size(), [&](std::int64_t i) {
            // codes ascend, so keeping strict > on ties leaves the lowest code
            if (mask[i] >= T(0.5) && (out[i] == T(0) || mask[i] > best[i])) {
                best[i] = mask[i];
                out[i] = static_cast<T>(code);
            }
        });
    }
    return out;
}

template <typename T>
OverlapReport overlap_scores(const ScalarField<T>& reference, const ScalarField<T>& test,
                             const ScalarField<T>* mask) {
    require_same_grid(reference, test, "overlap_scores");
    if (mask) require_same_grid(reference, *mask, "overlap_scores");

    auto code_at = [](const ScalarField<T>& f, std::int64_t i) {
        return static_cast<int>(std::lround(static_cast<double>(f[i])));
    };
    std::set<int> codes;
    for (std::int64_t i = 0; i < reference.size(); ++i) {
        int a = code_at(reference, i), b = code_at(test, i);
        if (a != 0) codes.insert(a);
        if (b != 0) codes.insert(b);
    }

    struct Counts {
        std::int64_t a = 0, b = 0, both = 0;
    };
    std::map<int, Counts> per;
    Counts uni;
    for (std::int64_t i = 0; i < reference.size(); ++i) {
        if (mask && static_cast<double>((*mask)[i]) < 0.5) continue;
        int a = code_at(reference, i), b = code_at(test, i);
        if (a != 0) ++per[a].a;
        if (b != 0) ++per[b].b;
        if (a != 0 && a == b) ++per[a].both;
        if (a != 0) ++uni.a;
        if (b != 0) ++uni.b;
        if (a != 0 && b != 0) ++uni.both;
    }

    auto score = [](const Counts& c) {
        OverlapScores s;
        s.dice = (c.a + c.b) == 0 ? 1.0 : 2.0 * c.both / static_cast<double>(c.a + c.b);
        s.false_positive_rate = c.b == 0 ? 0.0 : static_cast<double>(c.b - c.both) / c.b;
        s.false_negative_rate = c.a == 0 ? 0.0 : static_cast<double>(c.a - c.both) / c.a;
        return s;
    };

    OverlapReport rep;
    for (int code : codes) rep.per_label[code] = score(per[code]);
    rep.union_scores = score(uni);
    return rep;
}

#define VELOREG_INSTANTIATE(T)                                                                     \
    template ScalarField<T> det_deformation_gradient<T>(const VectorField<T>&, int);               \
    template VectorField<T> deformation_map<T>(const VectorField<T>&, int, bool);                  \
    template DetStats det_stats<T>(const ScalarField<T>&, const ScalarField<T>*, double);          \
    template ScalarField<T> transport_labels<T>(const ScalarField<T>&, const VectorField<T>&,      \
                                                int);                                              \
    template OverlapReport overlap_scores<T>(const ScalarField<T>&, const ScalarField<T>&,         \
                                             const ScalarField<T>*);

VELOREG_INSTANTIATE(float)
VELOREG_INSTANTIATE(double)
#undef VELOREG_INSTANTIATE

} // namespace veloreg
