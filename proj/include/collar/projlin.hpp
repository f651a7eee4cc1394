#pragma once

#include <Eigen/Dense>
#include <vector>

#include "collar/errors.hpp"

namespace collar {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Real spectrum of a square matrix, sorted by ascending modulus.
// `values` keeps the signs; `vectors` columns are unit eigenvectors in the
// same order, with a deterministic sign convention (largest component > 0).
struct Eigendecomposition {
  Vec values;
  Mat vectors;
  double min_gap_ratio = 0.0;  // min over i of |v_{i+1}|/|v_i| - 1

  int n() const { return static_cast<int>(values.size()); }
  double modulus(int i) const { return std::abs(values[i]); }
  Vec moduli() const { return values.cwiseAbs(); }
};

// Throws NonRealSpectrum if any eigenvalue has a non-negligible imaginary
// part, ModulusCollision if two moduli agree to within gap_tol (relative),
// NumericalFailure if the eigenpair residual exceeds 1e-8 * ||A||_F.
// Internally the matrix is balanced and every eigenvalue is polished in
// extended precision, so the result is accurate for the matrix as stored
// even when its entries span many orders of magnitude.
Eigendecomposition eigendecompose(const Mat& a, double gap_tol = 1e-6);

// A matrix plus an entrywise correction at the rounding floor of the stored
// value: value + correction carries roughly twice the precision of a plain
// Mat. The word routines below accept and produce such pairs, so chains of
// products can hand precision from one stage to the next instead of rounding
// at every step. A correction of all zeros (or an empty correction list) is
// always valid.
struct CorrectedMat {
  Mat value, correction;
};

// Eigendecomposition of factors[0]^e0 * ... * factors[m-1]^e(m-1) with the
// product, any inverses, the balancing and the eigenvalue refinement all
// carried in extended precision; exponents must be +1 or -1. Use this for
// words in badly conditioned generators: forming the product in double and
// calling eigendecompose would lose eps * (intermediate norm) before the
// solver ever runs. The eigenpair residual is checked against the balanced
// product, which stays representable even when the raw product does not.
Eigendecomposition eigendecompose_word(const std::vector<Mat>& factors,
                                       const std::vector<int>& exponents,
                                       double gap_tol = 1e-6);

// As above, with per-factor corrections: factor k enters the product as
// factors[k] + corrections[k]. Pass an empty corrections vector for none.
Eigendecomposition eigendecompose_word(const std::vector<Mat>& factors,
                                       const std::vector<Mat>& corrections,
                                       const std::vector<int>& exponents,
                                       double gap_tol = 1e-6);

// The word product itself, accumulated in extended precision and rounded to
// double once at the end.
Mat product_of(const std::vector<Mat>& factors, const std::vector<int>& exponents);

// Corrected-input, corrected-output form of the word product.
CorrectedMat product_of(const std::vector<Mat>& factors, const std::vector<Mat>& corrections,
                        const std::vector<int>& exponents);

// The matrix acting as the given scalars on the eigenlines of a word product
// (multipliers indexed in ascending-modulus order): V diag(m) V^-1 with the
// product, the eigenbasis V and the sandwich all at extended precision, so
// the result commutes with the word product to the double rounding floor.
// Multipliers must be finite and nonzero; the spectrum must be real with
// distinct moduli, as for eigendecompose_word.
Mat spectral_multiplier(const std::vector<Mat>& factors, const std::vector<int>& exponents,
                        const Vec& multipliers);

CorrectedMat spectral_multiplier(const std::vector<Mat>& factors,
                                 const std::vector<Mat>& corrections,
                                 const std::vector<int>& exponents, const Vec& multipliers);

// Determinant via extended-precision LU. Sign-correct and accurate for the
// matrix as stored even when cancellation makes the double-precision
// determinant pure noise (entries ~1e5 already lose every digit of a
// unit determinant in double).
double stable_det(const Mat& a);

// Frobenius condition number ||A||_F * ||A^-1||_F via extended-precision LU;
// +inf when A is singular at working precision.
double condition_number(const Mat& a);

// Complete flag V_1 c V_2 c ... c V_{n-1} stored as one n x (n-1) matrix
// whose first k columns are an orthonormal basis of V_k.
struct Flag {
  Mat chain;

  int n() const { return static_cast<int>(chain.rows()); }
  Mat subspace(int k) const;  // n x k, 0 <= k <= n-1 (k = 0 gives n x 0)
  Vec line() const { return chain.col(0); }
};

// Flag of eigenspaces: attracting uses descending modulus (V_1 = top
// eigenline), repelling uses ascending.
Flag eigenflag(const Eigendecomposition& eig, bool attracting);

// Generalized cross ratio of four hyperplanes P_i = span(M, l_i) through the
// common codimension-2 subspace M (n x (n-2), possibly n x 0 when n = 2):
//   (P1,P2,P3,P4) = det[M l1 l3] det[M l4 l2] / (det[M l1 l2] det[M l4 l3]).
// Scale-invariant in every argument. Throws DegeneratePencil when a
// denominator determinant vanishes below deg_tol after column normalization.
double cross_ratio(const Mat& m, const Vec& l1, const Vec& l2, const Vec& l3, const Vec& l4,
                   double deg_tol = 1e-10);

// Cross ratio of four lines through the origin of a common 2-plane inside
// R^n. Throws NotCoplanar unless the four vectors span exactly two
// dimensions, DuplicatePoint if a denominator pair of lines coincides.
double planar_cross_ratio(const Vec& l1, const Vec& l2, const Vec& l3, const Vec& l4,
                          double rank_tol = 1e-10);

// Numeric dimension of V_1 + ... + V_k given by stacked bases.
int sum_dim(const std::vector<Mat>& subspaces, double rel_tol = 1e-8);

// Orthonormalize columns (full column rank expected).
Mat orthonormal_basis(const Mat& b);

// Largest principal angle between equal-dimension subspaces (radians).
double max_principal_angle(const Mat& a, const Mat& b);

bool subspaces_equal(const Mat& a, const Mat& b, double angle_tol = 1e-8);

// Distance of unit-normalized v from the span of orthonormal basis a.
double off_subspace_residual(const Mat& a, const Vec& v);

}  // namespace collar
