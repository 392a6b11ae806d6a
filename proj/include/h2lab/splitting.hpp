#pragma once
/*
 * Connected-sum data (L1, L2, v): two lattices and a slit vector v that is
 * primitive in one lattice and meets the other lattice only at 0.
 */
#include "h2lab/lattice.hpp"

#include <string>
#include <vector>

namespace h2lab {

enum class PrimitiveIn { First, Second };

template <class T>
struct SplittingTriple {
    LatticeBasis<T> lambda1, lambda2;
    Vec2<T> v;
    PrimitiveIn primitive_in = PrimitiveIn::Second;
};

template <class T>
struct SegmentPoints {
    std::vector<Vec2<T>> points;  ///< lattice points on [0, v], ordered from 0
    bool contains_v = false;
};

struct ValidationReport {
    bool valid = false;
    PrimitiveIn primitive_in = PrimitiveIn::Second;
    std::string reason;                    ///< empty when valid
    std::vector<Vec2d> witness;            ///< offending lattice points
    std::vector<std::string> warnings;     ///< near-degenerate configurations (floats only)
};

/// Lattice points of L on the closed segment [0, v].
template <class T> SegmentPoints<T> segment_lattice_points(const LatticeBasis<T>& L, const Vec2<T>& v,
                                                          std::vector<std::string>* warnings = nullptr);

/// Checks [0,v] meets one lattice only at 0 and the other exactly at {0, v}.
template <class T> ValidationReport validate_splitting(const SplittingTriple<T>& t);

template <class T> SplittingTriple<T> act_splitting(const Mat2<T>& g, const SplittingTriple<T>& t) {
    return {act(g, t.lambda1), act(g, t.lambda2), g * t.v, t.primitive_in};
}

template <class T> T area_ratio(const SplittingTriple<T>& t) { return t.lambda1.area() / t.lambda2.area(); }
template <class T> T total_area(const SplittingTriple<T>& t) { return t.lambda1.area() + t.lambda2.area(); }

template <class T> SplittingTriple<double> to_double(const SplittingTriple<T>& t) {
    return {to_double(t.lambda1), to_double(t.lambda2), to_double(t.v), t.primitive_in};
}

/// ((1+eps)^{1/2} L1, (1+eps)^{-1/2} L2, (1+eps)^{-1/2} v).  Areas scale
/// quadratically, so Area(L1)/Area(L2) is multiplied by (1+eps)^2 and
/// sqrt(Area(L1)/Area(L2)) by (1+eps).  Usually applied to area-1 triples,
/// but defined for any triple so that deformations compose.  Throws if the
/// result is not a valid splitting.
SplittingTriple<double> deform_area(const SplittingTriple<double>& t, double eps);

/// Uniform scaling to total area 1.  For exact scalars this requires the
/// square root of the total area to lie in the same field.
template <class T> SplittingTriple<T> normalize_area(const SplittingTriple<T>& t);

}  // namespace h2lab
