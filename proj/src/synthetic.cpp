#include "veloreg/synthetic.hpp"

#include <cmath>

#include "veloreg/parallel.hpp"
#include "veloreg/transport.hpp"

namespace veloreg {

std::array<double, 3> synthetic_velocity(double x1, double x2, double x3) {
    return {std::sin(x3) * std::cos(x2) * std::sin(x2),
            std::sin(x1) * std::cos(x3) * std::sin(x3),
            std::sin(x2) * std::cos(x1) * std::sin(x1)};
}

template <typename T>
SyntheticProblem<T> generate_synthetic(const Grid3& g, int nt, double amplitude) {
    SyntheticProblem<T> p;
    p.m_T = ScalarField<T>(g);
    p.v_star = VectorField<T>(g);
    std::int64_t idx = 0;
    for (int i1 = 0; i1 < g.dims[0]; ++i1)
        for (int i2 = 0; i2 < g.dims[1]; ++i2)
            for (int i3 = 0; i3 < g.dims[2]; ++i3, ++idx) {
                const double x1 = g.coord(0, i1), x2 = g.coord(1, i2), x3 = g.coord(2, i3);
                const double s1 = std::sin(x1), s2 = std::sin(x2), s3 = std::sin(x3);
                p.m_T[idx] = static_cast<T>((s1 * s1 + s2 * s2 + s3 * s3) / 3.0);
                auto v = synthetic_velocity(x1, x2, x3);
                for (int c = 0; c < 3; ++c)
                    p.v_star[c][idx] = static_cast<T>(amplitude * v[c]);
            }
    p.m_R = solve_state(p.m_T, p.v_star, nt).final();
    return p;
}

template <typename T>
ScalarField<T> make_ball_labels(const Grid3& g, int count) {
    ScalarField<T> labels(g, T(0));
    // ball centers on a diagonal line, radii small enough to stay disjoint
    const double radius = two_pi / 10.0;
    std::int64_t idx = 0;
    for (int i1 = 0; i1 < g.dims[0]; ++i1)
        for (int i2 = 0; i2 < g.dims[1]; ++i2)
            for (int i3 = 0; i3 < g.dims[2]; ++i3, ++idx) {
                const double x[3] = {g.coord(0, i1), g.coord(1, i2), g.coord(2, i3)};
                for (int c = 0; c < count; ++c) {
                    const double t = (c + 1.0) / (count + 1.0);
                    const double ctr[3] = {two_pi * t, two_pi * t, two_pi * 0.5};
                    double d2 = 0.0;
                    for (int a = 0; a < 3; ++a) {
                        double d = x[a] - ctr[a];
                        if (d > two_pi / 2) d -= two_pi;
                        if (d < -two_pi / 2) d += two_pi;
                        d2 += d * d;
                    }
                    if (d2 <= radius * radius) {
                        labels[idx] = static_cast<T>(c + 1);
                        break;
                    }
                }
            }
    return labels;
}

template SyntheticProblem<float> generate_synthetic<float>(const Grid3&, int, double);
template SyntheticProblem<double> generate_synthetic<double>(const Grid3&, int, double);
template ScalarField<float> make_ball_labels<float>(const Grid3&, int);
template ScalarField<double> make_ball_labels<double>(const Grid3&, int);

} // namespace veloreg
