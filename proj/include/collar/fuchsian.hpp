#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "collar/surface.hpp"

namespace collar {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

// Fenchel-Nielsen coordinates for the fixed chain pants decomposition.
// Curve order: waists a_1..a_g, then the chain curves ("c" for genus 2;
// "c1".."cg" followed by "d1".."d(g-3)" for genus >= 3).
struct FNCoordinates {
  int genus = 2;
  std::vector<double> lengths;
  std::vector<double> twists;

  int curve_count() const { return 3 * genus - 3; }
};

std::vector<std::string> pants_curve_labels(int genus);

// Boundary words of one pants adjacent to a curve, with c*b*a = identity and
// a equal to the curve word (side 1) or to its inverse in the surface group
// (side 2).
struct PantsSideTriple {
  Word a, b, c;
};

struct PantsCurve {
  std::string label;
  Word word;
  bool separating = false;
  int crossing_generator = -1;      // generator index of b_i for waist curves
  Word suggested_crossing;          // a word whose axis crosses this curve
  std::vector<int> far_generators;  // generators conjugated by a separating-curve deformation
  // orients the deformation flow so a positive parameter matches a positive
  // Fenchel-Nielsen twist of this curve
  int twist_sign = 1;
  PantsSideTriple side1, side2;
};

struct FuchsianRep {
  int genus = 2;
  std::vector<Mat2> generators;  // images of a1, b1, ..., ag, bg
  // Entrywise rounding remainders of the construction: the generator as
  // computed is generators[i] + generator_corrections[i]. Everything here
  // works off the plain generators; the corrections let later stages
  // (symmetric-power lifts, long word products) start from roughly twice the
  // double precision, which they need because their conditioning multiplies
  // any input rounding by the product of factor norms.
  std::vector<Mat2> generator_corrections;
  FNCoordinates coords;
  std::vector<PantsCurve> curves;

  Mat2 evaluate(const Word& w) const;
  // Backward-style residual: min over signs of ||rho(relator) -+ I||_F,
  // divided by the first-order sensitivity of the word map to relative
  // perturbations of the generators (sum over letters of |prefix| * |letter|
  // * |suffix|). Generators of handles far from the base frame have large
  // entries, so this is the meaningful notion: ~1e-15 when the generators are
  // correct to rounding, O(1) for a broken construction.
  double relator_residual() const;
  const PantsCurve& curve(const std::string& label) const;
};

// Explicit hyperbolic construction; throws ConstructionFailure if the relator
// residual exceeds 1e-8 or inputs are out of range (lengths in (0, 50],
// finite twists).
FuchsianRep build_fuchsian(const FNCoordinates& coords);

// Fixed points of a hyperbolic Moebius transformation on the boundary of the
// upper half-plane, as projective points (x : y) representing z = x / y.
// Matrices act projectively: any positive-determinant matrix is accepted and
// treated as its det-1 normalization. Long words evaluated in doubles drift
// away from det 1 in proportion to their conditioning, so gating on the
// determinant would reject honest data.
struct AxisEndpoints {
  Vec2 attracting, repelling;
};
AxisEndpoints mobius_fixed_points(const Mat2& m);

bool is_hyperbolic(const Mat2& m, double tol = 1e-9);

// Translation length on the upper half-plane: 2 * acosh(|tr| / (2 * sqrt(det))).
double translation_length(const Mat2& m);

// Time-t unit-speed flow along the axis of a hyperbolic element (t = full
// translation length reproduces the element up to sign).
Mat2 axis_flow(const Mat2& m, double t);

// det-1 frame sending (repelling, attracting) to (0, infinity).
Mat2 standardizing_frame(const Mat2& m);

// Inverse of a det-1 matrix via the adjugate. Skipping the determinant
// division avoids the cancellation Eigen's cofactor inverse hits when the
// entries are large, which matters for long gluing chains.
inline Mat2 unimodular_inverse(const Mat2& m) {
  Mat2 inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv;
}

// Angle of a boundary point of the upper half-plane after the Cayley map to
// the disk, in [0, 2*pi); increasing real axis direction is counterclockwise.
double disk_angle(const Vec2& projective_point);

inline Vec2 apply_mobius(const Mat2& m, const Vec2& p) { return m * p; }

// True iff the angles are met in counterclockwise order starting anywhere.
// Throws DuplicatePoint when two angles are closer than min_gap.
bool cyclic_order_check(const std::vector<double>& angles, double min_gap = 1e-10);

bool cyclically_ordered_either_way(const std::vector<double>& angles, double min_gap = 1e-10);

}  // namespace collar
