#pragma once

// Test-side reference implementations, kept independent of the library code
// paths they are used to verify.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracles {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Coefficients of det(xI - A) in descending powers (monic), computed with the
// Faddeev-LeVerrier recurrence.
inline std::vector<double> charpoly(const Mat& a) {
  const int n = int(a.rows());
  std::vector<double> c(size_t(n) + 1, 0.0);
  c[0] = 1.0;
  Mat m = Mat::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    m = a * (m + c[size_t(k) - 1] * Mat::Identity(n, n));
    c[size_t(k)] = -m.trace() / k;
  }
  return c;
}

inline double polyval(const std::vector<double>& p, double x) {
  double v = 0.0;
  for (double c : p) v = v * x + c;
  return v;
}

inline std::vector<double> polyder(const std::vector<double>& p) {
  const int deg = int(p.size()) - 1;
  if (deg <= 0) return {0.0};
  std::vector<double> d(static_cast<size_t>(deg));
  for (int i = 0; i < deg; ++i) d[size_t(i)] = p[size_t(i)] * (deg - i);
  return d;
}

inline std::vector<double> polytrim(std::vector<double> p) {
  size_t lead = 0;
  while (lead + 1 < p.size() && p[lead] == 0.0) ++lead;
  return std::vector<double>(p.begin() + long(lead), p.end());
}

// All real roots of a polynomial whose roots are all real and simple,
// ascending.  Critical points (computed recursively: the derivative of a
// real-rooted polynomial is real-rooted) split the line into monotone
// segments, each holding at most one root found by bisection.
inline std::vector<double> real_roots(const std::vector<double>& p) {
  const std::vector<double> q = polytrim(p);
  const int deg = int(q.size()) - 1;
  if (deg <= 0) return {};
  if (deg == 1) return {-q[1] / q[0]};

  double bound = 0.0;
  for (size_t i = 1; i < q.size(); ++i) bound = std::max(bound, std::abs(q[i] / q[0]));
  bound += 1.0;

  std::vector<double> pts = real_roots(polyder(q));
  pts.push_back(-bound);
  pts.push_back(bound);
  std::sort(pts.begin(), pts.end());

  std::vector<double> roots;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double lo = pts[i], hi = pts[i + 1];
    double flo = polyval(q, lo), fhi = polyval(q, hi);
    if (flo == 0.0) {
      if (roots.empty() || roots.back() != lo) roots.push_back(lo);
      continue;
    }
    if (fhi == 0.0 || (flo < 0.0) == (fhi < 0.0)) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = polyval(q, mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((flo < 0.0) == (fm < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

inline std::vector<double> real_eigenvalues(const Mat& a) { return real_roots(charpoly(a)); }

// Same index pattern as the projective cross ratio: (13)(42) / ((12)(43)).
inline double classical_cross_ratio(double z1, double z2, double z3, double z4) {
  return ((z1 - z3) * (z4 - z2)) / ((z1 - z2) * (z4 - z3));
}

// Hyperbolic translation length from the trace of an SL(2,R) matrix.
inline double trace_length(const Eigen::Matrix2d& m) {
  return 2.0 * std::acosh(std::abs(m.trace()) / 2.0);
}

// Eigenvalue moduli of the rank-n irreducible image of a rank-2 element of
// translation length l, ascending.
inline std::vector<double> lift_ladder(double l, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(std::exp((2 * k - (n - 1)) * l / 2.0));
  return out;
}

inline double delta2_closed_form() { return std::log(2.0); }
inline double delta3_closed_form() { return 2.0 * std::log((1.0 + std::sqrt(5.0)) / 2.0); }

// Products lambda_i * lambda_j over i <= j, ascending: the spectrum of the
// induced action on symmetric matrices.
inline std::vector<double> sym_square_spectrum(std::vector<double> eigs) {
  std::vector<double> out;
  for (size_t i = 0; i < eigs.size(); ++i)
    for (size_t j = i; j < eigs.size(); ++j) out.push_back(eigs[i] * eigs[j]);
  std::sort(out.begin(), out.end());
  return out;
}

// Well-conditioned random conjugator: identity plus a small random
// perturbation, so constructed spectra stay accurate.
inline Mat random_conjugator(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Mat p = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) += u(rng);
  return p;
}

inline Mat with_spectrum(const std::vector<double>& values, std::mt19937_64& rng) {
  const int n = int(values.size());
  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = values[size_t(i)];
  const Mat p = random_conjugator(n, rng);
  return p * d.asDiagonal() * p.inverse();
}

inline Eigen::Matrix2d random_sl2(std::mt19937_64& rng, double spread = 1.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Eigen::Matrix2d m;
  double det = 0.0;
  do {
    m << u(rng), u(rng), u(rng), u(rng);
    det = m.determinant();
  } while (std::abs(det) < 1e-3);
  if (det < 0.0) m.col(0) *= -1.0;
  return m / std::sqrt(std::abs(m.determinant()));
}

}  // namespace oracles
