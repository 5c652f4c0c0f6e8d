#pragma once

#include "veloreg/field.hpp"

namespace veloreg {

/// Smooth synthetic registration pair: the template image is
/// (sin^2 x1 + sin^2 x2 + sin^2 x3)/3 and the reference image is the template
/// transported by the closed-form velocity
///   v = (sin x3 cos x2 sin x2, sin x1 cos x3 sin x3, sin x2 cos x1 sin x1),
/// so the truth velocity is known and divergence-free.
template <typename T>
struct SyntheticProblem {
    ScalarField<T> m_R;
    ScalarField<T> m_T;
    VectorField<T> v_star;
};

/// amplitude scales the velocity (1 = the standard problem); larger values
/// produce more aggressive deformations for stress tests.
template <typename T>
SyntheticProblem<T> generate_synthetic(const Grid3& grid, int nt, double amplitude = 1.0);

/// Closed-form evaluation of the synthetic velocity at an arbitrary point.
std::array<double, 3> synthetic_velocity(double x1, double x2, double x3);

/// Label map with `count` disjoint balls (codes 1..count) on background 0.
template <typename T>
ScalarField<T> make_ball_labels(const Grid3& grid, int count);

} // namespace veloreg
