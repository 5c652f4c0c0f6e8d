#pragma once

#include <map>

#include "veloreg/field.hpp"

namespace veloreg {

/// det grad y via the transport equation dJ/dt + v . grad J = (div v) J,
/// J(.,0) = 1: semi-Lagrangian advection with the div v reaction integrated
/// as exp(trapezoid) along each characteristic, so J(.,1) > 0 by
/// construction. The map orientation is the one consistent with the state
/// solver's pullback m_T(y).
template <typename T>
ScalarField<T> det_deformation_gradient(const VectorField<T>& v, int nt);

/// Deformation map from the coordinate transport du/dt + v . grad u = -v,
/// u(.,0) = 0. Returns the displacement u(.,1) by default; with
/// absolute=true returns y = x + u wrapped into [0, 2*pi).
template <typename T>
VectorField<T> deformation_map(const VectorField<T>& v, int nt, bool absolute = false);

struct DetStats {
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

/// Extremal/mean values of det grad y, optionally restricted to the
/// foreground of a reference image (threshold 0.05).
template <typename T>
DetStats det_stats(const ScalarField<T>& det, const ScalarField<T>* foreground_of = nullptr,
                   double threshold = 0.05);

/// Per-code transport of a label map: binarize, smooth (sigma = 1 voxel),
/// advect, threshold at 0.5; voxels claimed by several codes go to the
/// strongest response, exact ties to the lowest code. Code 0 is background.
template <typename T>
ScalarField<T> transport_labels(const ScalarField<T>& labels, const VectorField<T>& v, int nt);

struct OverlapScores {
    double dice = 0.0;
    double false_positive_rate = 0.0; // |B \ A| / |B|, B = test labels
    double false_negative_rate = 0.0; // |A \ B| / |A|, A = reference labels
};

struct OverlapReport {
    std::map<int, OverlapScores> per_label;
    OverlapScores union_scores; // on the union of all nonzero labels
};

/// Dice and error rates per label and for the union. Empty-on-both-sides
/// sets score dice = 1 and rates = 0.
template <typename T>
OverlapReport overlap_scores(const ScalarField<T>& reference, const ScalarField<T>& test,
                             const ScalarField<T>* mask = nullptr);

} // namespace veloreg
