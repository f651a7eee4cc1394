#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "collar/fuchsian.hpp"
#include "collar/projlin.hpp"
#include "collar/report.hpp"

namespace collar {

// Image of a 2x2 matrix under the unique irreducible n-dimensional
// representation of SL(2,R), written in the binomially normalized monomial
// basis (so orthogonal matrices map to orthogonal matrices).
Mat irreducible_lift(const Mat2& m, int n);

struct BulgeRecord {
  std::string curve;
  Vec t;
  // Result of the post-deformation spot checks (curve-word spectrum
  // positivity and flag transversality): "ok" or a description of the first
  // failure. Deformed representations are kept either way; the checks are
  // advisory because they cannot certify membership in the component.
  std::string spot_checks = "ok";
};

struct Provenance {
  std::string kind = "external";  // "fuchsian_lift" or "external"
  std::optional<FNCoordinates> fn;
  int lift_rank = 0;
  std::vector<BulgeRecord> deformations;
};

// A representation of the genus-g surface group into SL(n,R), stored as the
// images of the standard generators a1, b1, ..., ag, bg.  Representations
// built from Fenchel-Nielsen data keep the underlying 2x2 holonomy ("seed"),
// which supplies the boundary-circle positions of axis endpoints; bulge
// deformations change the generators but not the seed.
struct Representation {
  int n = 2;
  int genus = 2;
  std::vector<Mat> generators;
  std::vector<Mat2> seed;
  std::vector<PantsCurve> curves;
  Provenance provenance;

  Mat evaluate(const Word& w) const;
  Mat2 seed_evaluate(const Word& w) const;
  bool has_seed() const { return !seed.empty(); }
  // Backward-style residual, as in FuchsianRep::relator_residual: min over
  // signs of ||rho(relator) -+ I||_F over the first-order sensitivity of the
  // word map to relative perturbations of the generators.
  double relator_residual() const;
  const PantsCurve& curve(const std::string& label) const;
};

// Lift every generator with irreducible_lift; throws ConstructionFailure if
// the rank-n relator residual exceeds 1e-7.
Representation lift_representation(const FuchsianRep& base, int n);

// Shape, determinant and relator checks; with pants-curve metadata present
// also demands a real spectrum of distinct moduli for every curve word.
void validate_representation(const Representation& rep, double relator_tol = 1e-7);

// log of the ratio of the extreme eigenvalue moduli.
double length(const Mat& holonomy);
double length(const Representation& rep, const Word& w);

// sqrt(2 * sum_i log(|lambda_i|)^2); bounded below by length().
double symmetric_space_length(const Mat& holonomy);
double symmetric_space_length(const Representation& rep, const Word& w);

// Matrix of A -> g A g^T on symmetric matrices, basis E_ii and E_ij + E_ji.
Mat symmetric_square(const Mat& g);

// log of the ratio of the extreme eigenvalue moduli of the induced action on
// symmetric matrices (twice length() for diagonalizable holonomies).
double hilbert_length(const Mat& holonomy);
double hilbert_length(const Representation& rep, const Word& w);

// True iff the sorted eigenvalue moduli pair off into reciprocals:
// |m_k * m_{n-1-k} - 1| <= tol for all k.
bool is_self_dual_spectrum(const Mat& holonomy, double tol = 1e-6);
// Applies the spectrum test to every generator and to consecutive products
// a_i * b_i (products detect deformations that single generators miss).
bool is_self_dual_locus(const Representation& rep, double tol = 1e-6);

// Throws NonRealSpectrum unless the spectrum is real, of one sign, and
// positive after at most a global sign flip (allowed only for even n).
void require_positive_spectrum(const Mat& holonomy);

// Eigenvector flags of rho(w): the attracting flag spans eigenvectors in
// descending modulus order, the repelling flag in ascending order.
Flag attracting_flag(const Representation& rep, const Word& w);
Flag repelling_flag(const Representation& rep, const Word& w);

// Twist-bulge deformation along a pants curve.  t holds the n-1 increments
// of the log-eigenvalue gaps; the inserted diagonal element d commutes with
// the curve holonomy, so the relator is preserved exactly.  For n = 2 the
// single parameter reproduces the Fenchel-Nielsen twist flow.  Separating
// curves conjugate the far-side generators by d; waist curves multiply the
// crossing generator by d on the right.
Representation bulge_deform(const Representation& rep, const std::string& curve_label, const Vec& t);

std::string representation_to_json(const Representation& rep);
Representation representation_from_json(const std::string& text);
void save_representation(const Representation& rep, const std::string& path);
Representation load_representation(const std::string& path);

}  // namespace collar
