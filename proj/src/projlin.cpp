#include "collar/projlin.hpp"

#include <quadmath.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

namespace collar {

namespace {

std::string dim_str(const Mat& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

Vec unit(const Vec& v, const char* what) {
  double nrm = v.norm();
  if (!(nrm > 1e-300) || !std::isfinite(nrm)) fail(ErrorCode::BadInput, std::string(what) + " is zero or non-finite");
  return v / nrm;
}

// ---- extended-precision kernel -------------------------------------------
//
// Everything spectral below runs on a __float128 copy of the matrix: the
// double image of a conditioned generator is the data we are given, and 113
// mantissa bits are enough to factor it, polish its eigenvalues and run
// inverse iteration without adding noise of our own. Double precision is
// only used for the QR solver that supplies starting guesses.

using Quad = __float128;

Quad qabs(Quad x) { return x < 0 ? -x : x; }

struct QM {
  int n = 0;
  std::vector<Quad> e;
  QM() = default;
  explicit QM(int dim) : n(dim), e(size_t(dim) * size_t(dim), Quad(0)) {}
  Quad& at(int i, int j) { return e[size_t(i) * size_t(n) + size_t(j)]; }
  Quad at(int i, int j) const { return e[size_t(i) * size_t(n) + size_t(j)]; }
};

QM qm_from(const Mat& a) {
  QM m(int(a.rows()));
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) m.at(i, j) = a(i, j);
  return m;
}

QM qm_identity(int n) {
  QM m(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

QM qm_mul(const QM& x, const QM& y) {
  QM out(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int k = 0; k < x.n; ++k) {
      const Quad v = x.at(i, k);
      if (v == 0) continue;
      for (int j = 0; j < x.n; ++j) out.at(i, j) += v * y.at(k, j);
    }
  return out;
}

Quad qm_frobenius(const QM& m) {
  Quad s = 0;
  for (const Quad& v : m.e) s += v * v;
  return sqrtq(s);
}

// LU factorization with partial pivoting of (m - shift * I).
struct QLU {
  QM lu;
  std::vector<int> perm;
  int sign = 1;
  bool singular = false;  // an exactly zero pivot
  Quad min_pivot = 0;
};

QLU qlu_factor(const QM& m, Quad shift) {
  QLU f;
  f.lu = m;
  const int n = m.n;
  for (int i = 0; i < n; ++i) f.lu.at(i, i) -= shift;
  f.perm.resize(size_t(n));
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    Quad best = qabs(f.lu.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      const Quad v = qabs(f.lu.at(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    f.perm[size_t(col)] = pivot;
    if (pivot != col) {
      f.sign = -f.sign;
      for (int j = 0; j < n; ++j) std::swap(f.lu.at(col, j), f.lu.at(pivot, j));
    }
    if (col == 0 || best < f.min_pivot) f.min_pivot = best;
    if (best == 0) {
      f.singular = true;
      continue;
    }
    const Quad den = f.lu.at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const Quad l = f.lu.at(r, col) / den;
      f.lu.at(r, col) = l;
      if (l == 0) continue;
      for (int j = col + 1; j < n; ++j) f.lu.at(r, j) -= l * f.lu.at(col, j);
    }
  }
  return f;
}

void qlu_solve(const QLU& f, std::vector<Quad>& x) {
  const int n = f.lu.n;
  for (int i = 0; i < n; ++i) {
    const int p = f.perm[size_t(i)];
    if (p != i) std::swap(x[size_t(i)], x[size_t(p)]);
  }
  for (int i = 1; i < n; ++i) {
    Quad s = x[size_t(i)];
    for (int j = 0; j < i; ++j) s -= f.lu.at(i, j) * x[size_t(j)];
    x[size_t(i)] = s;
  }
  for (int i = n; i-- > 0;) {
    Quad s = x[size_t(i)];
    for (int j = i + 1; j < n; ++j) s -= f.lu.at(i, j) * x[size_t(j)];
    const Quad den = f.lu.at(i, i);
    x[size_t(i)] = den == 0 ? Quad(0) : s / den;
  }
}

Quad qlu_trace_inverse(const QLU& f) {
  const int n = f.lu.n;
  Quad tr = 0;
  std::vector<Quad> x(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    std::fill(x.begin(), x.end(), Quad(0));
    x[size_t(k)] = 1;
    qlu_solve(f, x);
    tr += x[size_t(k)];
  }
  return tr;
}

QM qm_inverse(const QM& m, const char* what) {
  QLU f = qlu_factor(m, 0);
  if (f.singular) fail(ErrorCode::BadInput, std::string(what) + " is singular at working precision");
  QM inv(m.n);
  std::vector<Quad> x(size_t(m.n));
  for (int k = 0; k < m.n; ++k) {
    std::fill(x.begin(), x.end(), Quad(0));
    x[size_t(k)] = 1;
    qlu_solve(f, x);
    for (int i = 0; i < m.n; ++i) inv.at(i, k) = x[size_t(i)];
  }
  return inv;
}

// log2 |det| and the sign, so huge and tiny determinants never overflow.
struct DetParts {
  double log2_abs = 0.0;
  int sign = 0;
};

DetParts qlu_det_parts(const QLU& f) {
  DetParts d;
  d.sign = f.singular ? 0 : f.sign;
  if (d.sign == 0) return d;
  for (int i = 0; i < f.lu.n; ++i) {
    const Quad p = f.lu.at(i, i);
    if (p < 0) d.sign = -d.sign;
    int e = 0;
    const double mant = double(frexpq(qabs(p), &e));
    d.log2_abs += double(e) + std::log2(mant);
  }
  return d;
}

// Parlett-Reinsch balancing restricted to powers of two, so the similarity
// transform is exact. Returns D with (input overwritten) B = D^-1 A D.
std::vector<double> qbalance(QM& m) {
  const int n = m.n;
  std::vector<double> d(size_t(n), 1.0);
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (int i = 0; i < n; ++i) {
      Quad c = 0, r = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += qabs(m.at(j, i));
        r += qabs(m.at(i, j));
      }
      if (c == 0 || r == 0) continue;
      const Quad s = c + r;
      Quad f = 1;
      Quad g = r / 2;
      while (c < g) {
        f *= 2;
        c *= 4;
      }
      g = r * 2;
      while (c >= g) {
        f /= 2;
        c /= 4;
      }
      if ((c + r) / f < Quad(0.95) * s && std::isfinite(d[size_t(i)] * double(f))) {
        converged = false;
        d[size_t(i)] *= double(f);
        const Quad inv_f = 1 / f;
        for (int j = 0; j < n; ++j) m.at(i, j) *= inv_f;
        for (int j = 0; j < n; ++j) m.at(j, i) *= f;
      }
    }
  }
  return d;
}

// Hessenberg reduction by stabilized elimination, in place. The entries
// below the subdiagonal are zeroed afterwards (the eliminations store their
// multipliers there).
void qhessenberg(QM& a) {
  const int n = a.n;
  for (int m = 1; m + 1 < n; ++m) {
    Quad x = 0;
    int piv = m;
    for (int j = m; j < n; ++j) {
      if (qabs(a.at(j, m - 1)) > qabs(x)) {
        x = a.at(j, m - 1);
        piv = j;
      }
    }
    if (piv != m) {
      for (int j = m - 1; j < n; ++j) std::swap(a.at(piv, j), a.at(m, j));
      for (int j = 0; j < n; ++j) std::swap(a.at(j, piv), a.at(j, m));
    }
    if (x != 0) {
      for (int i = m + 1; i < n; ++i) {
        Quad y = a.at(i, m - 1);
        if (y == 0) continue;
        y /= x;
        a.at(i, m - 1) = y;
        for (int j = m; j < n; ++j) a.at(i, j) -= y * a.at(m, j);
        for (int j = 0; j < n; ++j) a.at(j, m) += y * a.at(j, i);
      }
    }
  }
  for (int i = 2; i < n; ++i)
    for (int j = 0; j + 2 <= i; ++j) a.at(i, j) = 0;
}

struct QComplex {
  Quad re = 0, im = 0;
};

// Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
// This replaces the double-precision solver as the seed source: a word in
// conditioned generators can be so far from normal that its balanced image
// rounds to double with its small eigenvalues scrambled, while 113 mantissa
// bits keep them. Ported from the classic EISPACK hqr shape.
std::vector<QComplex> qhqr(QM& a) {
  const int n = a.n;
  const Quad EPS = Quad(1e-33);
  std::vector<QComplex> out(static_cast<size_t>(n));
  Quad anorm = 0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += qabs(a.at(i, j));
  if (anorm == 0) return out;
  int nn = n - 1;
  Quad t = 0;
  int its = 0;
  while (nn >= 0) {
    int l = 0;
    for (int k = nn; k >= 1; --k) {
      Quad s = qabs(a.at(k - 1, k - 1)) + qabs(a.at(k, k));
      if (s == 0) s = anorm;
      if (qabs(a.at(k, k - 1)) <= EPS * s) {
        a.at(k, k - 1) = 0;
        l = k;
        break;
      }
    }
    Quad x = a.at(nn, nn);
    if (l == nn) {
      out[size_t(nn)] = {x + t, 0};
      --nn;
      its = 0;
      continue;
    }
    Quad y = a.at(nn - 1, nn - 1);
    Quad w = a.at(nn, nn - 1) * a.at(nn - 1, nn);
    if (l == nn - 1) {
      Quad p = (y - x) / 2;
      Quad q = p * p + w;
      Quad z = sqrtq(qabs(q));
      x += t;
      if (q >= 0) {
        z = p + (p >= 0 ? z : -z);
        out[size_t(nn) - 1] = out[size_t(nn)] = {x + z, 0};
        if (z != 0) out[size_t(nn)] = {x - w / z, 0};
      } else {
        out[size_t(nn) - 1] = {x + p, -z};
        out[size_t(nn)] = {x + p, z};
      }
      nn -= 2;
      its = 0;
      continue;
    }
    if (its == 100) fail(ErrorCode::NumericalFailure, "eigensolver did not converge");
    if (its > 0 && its % 10 == 0) {
      // exceptional shift to break symmetry-induced cycling
      t += x;
      for (int i = 0; i <= nn; ++i) a.at(i, i) -= x;
      const Quad s = qabs(a.at(nn, nn - 1)) + qabs(a.at(nn - 1, nn - 2));
      y = x = Quad(0.75) * s;
      w = Quad(-0.4375) * s * s;
    }
    ++its;
    int m = nn - 2;
    Quad p = 0, q = 0, r = 0;
    for (; m >= l; --m) {
      const Quad z = a.at(m, m);
      const Quad rr = x - z;
      const Quad ss = y - z;
      p = (rr * ss - w) / a.at(m + 1, m) + a.at(m, m + 1);
      q = a.at(m + 1, m + 1) - z - rr - ss;
      r = a.at(m + 2, m + 1);
      const Quad scale = qabs(p) + qabs(q) + qabs(r);
      p /= scale;
      q /= scale;
      r /= scale;
      if (m == l) break;
      const Quad u = qabs(a.at(m, m - 1)) * (qabs(q) + qabs(r));
      const Quad v = qabs(p) * (qabs(a.at(m - 1, m - 1)) + qabs(z) + qabs(a.at(m + 1, m + 1)));
      if (u <= EPS * v) break;
    }
    for (int i = m + 2; i <= nn; ++i) {
      a.at(i, i - 2) = 0;
      if (i != m + 2) a.at(i, i - 3) = 0;
    }
    for (int k = m; k <= nn - 1; ++k) {
      if (k != m) {
        p = a.at(k, k - 1);
        q = a.at(k + 1, k - 1);
        r = (k != nn - 1) ? a.at(k + 2, k - 1) : Quad(0);
        x = qabs(p) + qabs(q) + qabs(r);
        if (x != 0) {
          p /= x;
          q /= x;
          r /= x;
        }
      }
      Quad s = sqrtq(p * p + q * q + r * r);
      if (p < 0) s = -s;
      if (s == 0) continue;
      if (k == m) {
        if (l != m) a.at(k, k - 1) = -a.at(k, k - 1);
      } else {
        a.at(k, k - 1) = -s * x;
      }
      p += s;
      x = p / s;
      y = q / s;
      const Quad z = r / s;
      q /= p;
      r /= p;
      for (int j = k; j <= nn; ++j) {
        Quad pp = a.at(k, j) + q * a.at(k + 1, j);
        if (k != nn - 1) {
          pp += r * a.at(k + 2, j);
          a.at(k + 2, j) -= pp * z;
        }
        a.at(k + 1, j) -= pp * y;
        a.at(k, j) -= pp * x;
      }
      const int mmin = nn < k + 3 ? nn : k + 3;
      for (int i = l; i <= mmin; ++i) {
        Quad pp = x * a.at(i, k) + y * a.at(i, k + 1);
        if (k != nn - 1) {
          pp += z * a.at(i, k + 2);
          a.at(i, k + 2) -= pp * r;
        }
        a.at(i, k + 1) -= pp * q;
        a.at(i, k) -= pp;
      }
    }
  }
  return out;
}

// Spectral data kept at working precision, before any rounding to double.
// vectors holds the unbalanced eigenvectors columnwise, max-normalized.
struct QuadSpectral {
  std::vector<Quad> values;  // ascending modulus
  QM vectors;
  double min_gap_ratio = 0.0;
};

// Shared spectral core: balance, seed with the double QR solver, polish each
// eigenvalue with Maehly-deflated Newton on det(B - xI), then run inverse
// iteration for the eigenvectors.
QuadSpectral quad_spectral(QM p, double gap_tol) {
  const int n = p.n;
  const std::vector<double> d = qbalance(p);

  QM h = p;
  qhessenberg(h);
  const std::vector<QComplex> seeds = qhqr(h);
  double radius = 0.0;
  for (const QComplex& v : seeds)
    radius = std::max(radius, double(sqrtq(v.re * v.re + v.im * v.im)));

  // A genuinely rotational part cannot be a merged pair of real roots; only
  // small imaginary parts (nearly multiple real roots) are worth pushing
  // through the refinement below.
  const double imag_gate = 0.02 * std::max(1.0, radius);
  for (const QComplex& v : seeds) {
    if (double(qabs(v.im)) > imag_gate) {
      std::ostringstream os;
      os << "eigenvalue " << double(v.re) << (v.im < 0 ? "-" : "+") << double(qabs(v.im)) << "i";
      fail(ErrorCode::NonRealSpectrum, os.str());
    }
  }
  std::vector<QComplex> ordered = seeds;
  std::sort(ordered.begin(), ordered.end(), [](const QComplex& x, const QComplex& y) {
    return x.re != y.re ? x.re < y.re : x.im < y.im;
  });

  const Quad bnorm = qm_frobenius(p) + 1;
  std::vector<Quad> roots;
  roots.reserve(size_t(n));
  for (const QComplex& seed : ordered) {
    Quad x = seed.re;
    bool ok = false;
    int weak = 0;
    for (int iter = 0; iter < 140; ++iter) {
      const QLU f = qlu_factor(p, x);
      if (f.singular || f.min_pivot <= bnorm * Quad(1e-33)) {
        ok = true;  // x is an eigenvalue at working resolution
        break;
      }
      Quad g = -qlu_trace_inverse(f);
      bool clash = false;
      for (const Quad& r : roots) {
        if (x == r) {
          clash = true;
          break;
        }
        g -= 1 / (x - r);
      }
      if (clash) {
        // landed exactly on a found root: step off it and keep going
        x = x == 0 ? Quad(1e-30) : x * (1 + Quad(1e-25));
        continue;
      }
      if (g == 0) break;
      const Quad dx = Quad(-1) / g;
      x += dx;
      if (!(qabs(x) <= 4 * bnorm)) break;  // wandered out of the spectral disc
      const Quad scale = qabs(x) + 1;
      if (qabs(dx) <= scale * Quad(1e-30)) {
        ok = true;
        break;
      }
      // multiple roots only converge linearly; accept a stalled tail, the
      // modulus-collision gate below rejects them anyway
      if (qabs(dx) <= scale * Quad(1e-14) && ++weak >= 8) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      std::ostringstream os;
      os << "eigenvalue " << double(seed.re) << (seed.im < 0 ? "-" : "+") << double(qabs(seed.im))
         << "i could not be refined to a real root";
      fail(ErrorCode::NonRealSpectrum, os.str());
    }
    roots.push_back(x);
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return qabs(roots[size_t(i)]) < qabs(roots[size_t(j)]); });

  QuadSpectral out;
  out.values.resize(size_t(n));
  for (int i = 0; i < n; ++i) out.values[size_t(i)] = roots[size_t(order[size_t(i)])];

  for (int i = 0; i < n; ++i) {
    if (!(double(qabs(out.values[size_t(i)])) > 1e-300))
      fail(ErrorCode::NumericalFailure, "eigenvalue modulus underflow");
  }
  out.min_gap_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i) {
    const double lo = double(qabs(out.values[size_t(i)]));
    const double hi = double(qabs(out.values[size_t(i) + 1]));
    const double ratio = hi / lo - 1.0;
    out.min_gap_ratio = std::min(out.min_gap_ratio, ratio);
    if (ratio < gap_tol) {
      std::ostringstream os;
      os << "moduli " << lo << " and " << hi << " within relative gap " << ratio;
      fail(ErrorCode::ModulusCollision, os.str());
    }
  }

  out.vectors = QM(n);
  const Quad res_budget = Quad(1e-8) * std::max(Quad(1), qm_frobenius(p));
  for (int i = 0; i < n; ++i) {
    const Quad lambda = out.values[size_t(i)];
    QLU f = qlu_factor(p, lambda);
    for (int bump = 0; f.singular && bump < 4; ++bump) {
      const Quad off = (qabs(lambda) + Quad(1e-30)) * Quad(3e-28) * Quad(1 << bump);
      f = qlu_factor(p, lambda + off);
    }
    if (f.singular) fail(ErrorCode::NumericalFailure, "inverse iteration could not factor the shifted matrix");
    std::vector<Quad> x(size_t(n), 1);
    for (int pass = 0; pass < 2; ++pass) {
      qlu_solve(f, x);
      Quad big = 0;
      for (const Quad& v : x) big = std::max(big, qabs(v));
      if (big == 0) fail(ErrorCode::NumericalFailure, "inverse iteration collapsed to zero");
      for (Quad& v : x) v /= big;
    }
    // residual of the pair against the balanced matrix, still at working
    // precision, scaled to a unit vector
    Quad rnorm = 0, xnorm = 0;
    for (int row = 0; row < n; ++row) {
      Quad s = -lambda * x[size_t(row)];
      for (int c = 0; c < n; ++c) s += p.at(row, c) * x[size_t(c)];
      rnorm += s * s;
      xnorm += x[size_t(row)] * x[size_t(row)];
    }
    if (!(sqrtq(rnorm) <= res_budget * sqrtq(xnorm))) {
      std::ostringstream os;
      os << "eigenpair residual " << double(sqrtq(rnorm / xnorm)) << " exceeds " << double(res_budget);
      fail(ErrorCode::NumericalFailure, os.str());
    }
    // undo the balancing similarity, renormalizing in quad to dodge overflow
    Quad big = 0;
    for (int k = 0; k < n; ++k) big = std::max(big, qabs(x[size_t(k)] * Quad(d[size_t(k)])));
    for (int k = 0; k < n; ++k) out.vectors.at(k, i) = x[size_t(k)] * Quad(d[size_t(k)]) / big;
  }
  return out;
}

// Round a QuadSpectral down to the public double struct. residual_target,
// when given, is the original double matrix the 1e-8 * ||A||_F eigenpair
// budget is checked against (the balanced image was already checked).
Eigendecomposition decompose_core(QM p, const Mat* residual_target, double gap_tol) {
  const int n = p.n;
  const QuadSpectral qs = quad_spectral(std::move(p), gap_tol);
  Eigendecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.min_gap_ratio = qs.min_gap_ratio;
  for (int i = 0; i < n; ++i) out.values[i] = double(qs.values[size_t(i)]);
  for (int i = 0; i < n; ++i) {
    Vec col(n);
    for (int k = 0; k < n; ++k) col(k) = double(qs.vectors.at(k, i));
    col.normalize();
    int sign_pivot = 0;
    col.cwiseAbs().maxCoeff(&sign_pivot);
    if (col[sign_pivot] < 0) col = -col;
    out.vectors.col(i) = col;
  }
  if (residual_target) {
    const double residual_budget = 1e-8 * std::max(1.0, residual_target->norm());
    for (int i = 0; i < n; ++i) {
      const double res =
          (*residual_target * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
      if (res > residual_budget) {
        std::ostringstream os;
        os << "eigenpair residual " << res << " exceeds " << residual_budget;
        fail(ErrorCode::NumericalFailure, os.str());
      }
    }
  }
  return out;
}

// Word-product accumulation shared by the public word entry points: validate
// the factor list and multiply it out at working precision. corrections may
// be empty; when present, factor k enters as factors[k] + corrections[k].
QM qm_word(const std::vector<Mat>& factors, const std::vector<Mat>& corrections,
           const std::vector<int>& exponents, const char* who) {
  if (factors.empty()) fail(ErrorCode::BadInput, std::string(who) + ": empty factor list");
  if (factors.size() != exponents.size()) fail(ErrorCode::BadInput, std::string(who) + ": one exponent per factor");
  if (!corrections.empty() && corrections.size() != factors.size())
    fail(ErrorCode::BadInput, std::string(who) + ": one correction per factor, or none");
  const int n = static_cast<int>(factors.front().rows());
  QM acc = qm_identity(n);
  for (size_t k = 0; k < factors.size(); ++k) {
    const Mat& m = factors[k];
    if (m.rows() != n || m.cols() != n)
      fail(ErrorCode::BadInput, std::string(who) + ": factor shape mismatch, got " + dim_str(m));
    if (!m.allFinite()) fail(ErrorCode::BadInput, std::string(who) + ": non-finite entries");
    if (exponents[k] != 1 && exponents[k] != -1) fail(ErrorCode::BadInput, std::string(who) + ": exponents must be +-1");
    QM f = qm_from(m);
    if (!corrections.empty()) {
      const Mat& c = corrections[k];
      if (c.rows() != n || c.cols() != n)
        fail(ErrorCode::BadInput, std::string(who) + ": correction shape mismatch, got " + dim_str(c));
      if (!c.allFinite()) fail(ErrorCode::BadInput, std::string(who) + ": non-finite correction");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) f.at(i, j) += Quad(c(i, j));
    }
    if (exponents[k] == -1) f = qm_inverse(f, "factor");
    acc = qm_mul(acc, f);
  }
  return acc;
}

QM qm_word(const std::vector<Mat>& factors, const std::vector<int>& exponents, const char* who) {
  return qm_word(factors, {}, exponents, who);
}

Mat qm_round(const QM& m, const char* who) {
  Mat out(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      const double v = double(m.at(i, j));
      if (!std::isfinite(v)) fail(ErrorCode::NumericalFailure, std::string(who) + " exceeds double range");
      out(i, j) = v;
    }
  return out;
}

// Split into a double matrix plus the entrywise rounding remainder.
CorrectedMat qm_split(const QM& m, const char* who) {
  CorrectedMat out;
  out.value = qm_round(m, who);
  out.correction.resize(m.n, m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out.correction(i, j) = double(m.at(i, j) - Quad(out.value(i, j)));
  return out;
}

}  // namespace

Eigendecomposition eigendecompose(const Mat& a, double gap_tol) {
  const int n = static_cast<int>(a.rows());
  if (n == 0 || a.cols() != n) fail(ErrorCode::BadInput, "eigendecompose needs a nonempty square matrix, got " + dim_str(a));
  if (!a.allFinite()) fail(ErrorCode::BadInput, "eigendecompose: non-finite entries");
  return decompose_core(qm_from(a), &a, gap_tol);
}

Eigendecomposition eigendecompose_word(const std::vector<Mat>& factors, const std::vector<int>& exponents,
                                       double gap_tol) {
  return decompose_core(qm_word(factors, exponents, "eigendecompose_word"), nullptr, gap_tol);
}

Eigendecomposition eigendecompose_word(const std::vector<Mat>& factors, const std::vector<Mat>& corrections,
                                       const std::vector<int>& exponents, double gap_tol) {
  return decompose_core(qm_word(factors, corrections, exponents, "eigendecompose_word"), nullptr, gap_tol);
}

Mat product_of(const std::vector<Mat>& factors, const std::vector<int>& exponents) {
  return qm_round(qm_word(factors, exponents, "product_of"), "word product");
}

CorrectedMat product_of(const std::vector<Mat>& factors, const std::vector<Mat>& corrections,
                        const std::vector<int>& exponents) {
  return qm_split(qm_word(factors, corrections, exponents, "product_of"), "word product");
}

namespace {

QM multiplier_core(QM acc, const Vec& multipliers) {
  const int n = acc.n;
  if (int(multipliers.size()) != n)
    fail(ErrorCode::BadInput, "spectral_multiplier: one multiplier per eigenvalue");
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(multipliers(i)) || multipliers(i) == 0.0)
      fail(ErrorCode::BadInput, "spectral_multiplier: multipliers must be finite and nonzero");
  const QuadSpectral qs = quad_spectral(std::move(acc), 1e-6);
  // V diag(m) V^-1 carried at working precision end to end, so the result
  // commutes with the word product down at the double rounding floor.
  QM scaled = qs.vectors;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) scaled.at(k, i) *= Quad(multipliers(i));
  return qm_mul(scaled, qm_inverse(qs.vectors, "eigenvector basis"));
}

}  // namespace

Mat spectral_multiplier(const std::vector<Mat>& factors, const std::vector<int>& exponents,
                        const Vec& multipliers) {
  return qm_round(multiplier_core(qm_word(factors, exponents, "spectral_multiplier"), multipliers),
                  "multiplier matrix");
}

CorrectedMat spectral_multiplier(const std::vector<Mat>& factors, const std::vector<Mat>& corrections,
                                 const std::vector<int>& exponents, const Vec& multipliers) {
  return qm_split(
      multiplier_core(qm_word(factors, corrections, exponents, "spectral_multiplier"), multipliers),
      "multiplier matrix");
}

double stable_det(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0 || a.cols() != n) fail(ErrorCode::BadInput, "stable_det needs a nonempty square matrix, got " + dim_str(a));
  if (!a.allFinite()) fail(ErrorCode::BadInput, "stable_det: non-finite entries");
  const DetParts parts = qlu_det_parts(qlu_factor(qm_from(a), 0));
  if (parts.sign == 0) return 0.0;
  return double(parts.sign) * std::exp2(parts.log2_abs);
}

double condition_number(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0 || a.cols() != n) fail(ErrorCode::BadInput, "condition_number needs a nonempty square matrix, got " + dim_str(a));
  if (!a.allFinite()) fail(ErrorCode::BadInput, "condition_number: non-finite entries");
  const QM m = qm_from(a);
  const QLU f = qlu_factor(m, 0);
  if (f.singular) return std::numeric_limits<double>::infinity();
  QM inv(n);
  std::vector<Quad> x(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    std::fill(x.begin(), x.end(), Quad(0));
    x[size_t(k)] = 1;
    qlu_solve(f, x);
    for (int i = 0; i < n; ++i) inv.at(i, k) = x[size_t(i)];
  }
  return double(qm_frobenius(m) * qm_frobenius(inv));
}

Mat Flag::subspace(int k) const {
  const int limit = static_cast<int>(chain.cols());
  if (k < 0 || k > limit) fail(ErrorCode::BadInput, "flag subspace index out of range");
  return chain.leftCols(k);
}

Flag eigenflag(const Eigendecomposition& eig, bool attracting) {
  const int n = eig.n();
  if (n < 2) fail(ErrorCode::BadInput, "eigenflag needs n >= 2");
  Mat ordered(n, n - 1);
  for (int k = 0; k < n - 1; ++k) ordered.col(k) = attracting ? eig.vectors.col(n - 1 - k) : eig.vectors.col(k);
  Flag flag;
  flag.chain = orthonormal_basis(ordered);
  // QR can flip column signs; keep the first column pointing along the
  // eigenvector so eigenline directions stay deterministic.
  for (int k = 0; k < n - 1; ++k) {
    if (flag.chain.col(k).dot(ordered.col(k)) < 0) flag.chain.col(k) = -flag.chain.col(k);
  }
  return flag;
}

double cross_ratio(const Mat& m, const Vec& l1, const Vec& l2, const Vec& l3, const Vec& l4,
                   double deg_tol) {
  const int n = static_cast<int>(l1.size());
  if (n < 2) fail(ErrorCode::BadInput, "cross_ratio needs dimension >= 2");
  if (m.cols() != n - 2 || (m.cols() > 0 && m.rows() != n))
    fail(ErrorCode::BadInput, "cross_ratio: common subspace must be n x (n-2), got " + dim_str(m));
  for (const Vec* l : {&l2, &l3, &l4}) {
    if (l->size() != n) fail(ErrorCode::BadInput, "cross_ratio: mixed vector dimensions");
  }

  Mat frame(n, n);
  for (int c = 0; c < n - 2; ++c) frame.col(c) = unit(m.col(c), "pencil axis column");

  auto det_with = [&](const Vec& a, const Vec& b) {
    frame.col(n - 2) = unit(a, "pencil line");
    frame.col(n - 1) = unit(b, "pencil line");
    return frame.determinant();
  };

  const double d13 = det_with(l1, l3);
  const double d42 = det_with(l4, l2);
  const double d12 = det_with(l1, l2);
  const double d43 = det_with(l4, l3);
  if (std::abs(d12) < deg_tol || std::abs(d43) < deg_tol) {
    std::ostringstream os;
    os << "pencil denominators " << d12 << ", " << d43 << " below tolerance " << deg_tol;
    fail(ErrorCode::DegeneratePencil, os.str());
  }
  return (d13 * d42) / (d12 * d43);
}

double planar_cross_ratio(const Vec& l1, const Vec& l2, const Vec& l3, const Vec& l4,
                          double rank_tol) {
  const int n = static_cast<int>(l1.size());
  Mat stacked(n, 4);
  const Vec* ls[4] = {&l1, &l2, &l3, &l4};
  for (int i = 0; i < 4; ++i) {
    if (ls[i]->size() != n) fail(ErrorCode::BadInput, "planar_cross_ratio: mixed vector dimensions");
    stacked.col(i) = unit(*ls[i], "line");
  }
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  if (sigma[0] <= 0 || sigma[1] < rank_tol * sigma[0])
    fail(ErrorCode::NotCoplanar, "lines span fewer than two dimensions");
  if (sigma.size() > 2 && sigma[2] > 1e-8 * sigma[0])
    fail(ErrorCode::NotCoplanar, "lines do not lie in a common 2-plane");

  const Mat plane = svd.matrixU().leftCols(2);  // n x 2
  Eigen::Vector2d p[4];
  for (int i = 0; i < 4; ++i) p[i] = plane.transpose() * stacked.col(i);
  auto wedge = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a[0] * b[1] - a[1] * b[0];
  };
  const double d13 = wedge(p[0], p[2]);
  const double d42 = wedge(p[3], p[1]);
  const double d12 = wedge(p[0], p[1]);
  const double d43 = wedge(p[3], p[2]);
  if (std::abs(d12) < 1e-12 || std::abs(d43) < 1e-12)
    fail(ErrorCode::DuplicatePoint, "two of the four lines coincide");
  return (d13 * d42) / (d12 * d43);
}

int sum_dim(const std::vector<Mat>& subspaces, double rel_tol) {
  if (subspaces.empty()) return 0;
  const int n = static_cast<int>(subspaces.front().rows());
  int total = 0;
  for (const Mat& s : subspaces) {
    if (s.rows() != n) fail(ErrorCode::BadInput, "sum_dim: mixed ambient dimensions");
    total += static_cast<int>(s.cols());
  }
  if (total == 0) return 0;
  Mat stacked(n, total);
  int at = 0;
  for (const Mat& s : subspaces) {
    for (int c = 0; c < s.cols(); ++c) stacked.col(at++) = unit(s.col(c), "sum_dim basis column");
  }
  Eigen::JacobiSVD<Mat> svd(stacked);
  const auto& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma[0] <= 0) return 0;
  int rank = 0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > rel_tol * sigma[0]) ++rank;
  }
  return rank;
}

Mat orthonormal_basis(const Mat& b) {
  if (b.cols() == 0) return b;
  Eigen::HouseholderQR<Mat> qr(b);
  Mat q = qr.householderQ() * Mat::Identity(b.rows(), b.cols());
  Mat r = qr.matrixQR().topRows(b.cols()).triangularView<Eigen::Upper>();
  for (int i = 0; i < b.cols(); ++i) {
    if (std::abs(r(i, i)) < 1e-12 * std::max(1.0, b.col(i).norm()))
      fail(ErrorCode::NumericalFailure, "orthonormal_basis: rank-deficient input");
  }
  return q;
}

double max_principal_angle(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) fail(ErrorCode::BadInput, "principal angles need equal dimensions");
  if (a.cols() == 0) return 0.0;
  Mat qa = orthonormal_basis(a), qb = orthonormal_basis(b);
  const double c = std::clamp(Eigen::JacobiSVD<Mat>(qa.transpose() * qb).singularValues().minCoeff(), -1.0, 1.0);
  if (c < M_SQRT1_2) return std::acos(c);
  // small angles: the sine route keeps full precision where acos flattens out
  const Mat residual = qb - qa * (qa.transpose() * qb);
  const double s = std::clamp(Eigen::JacobiSVD<Mat>(residual).singularValues().maxCoeff(), 0.0, 1.0);
  return std::asin(s);
}

bool subspaces_equal(const Mat& a, const Mat& b, double angle_tol) {
  return a.cols() == b.cols() && max_principal_angle(a, b) < angle_tol;
}

double off_subspace_residual(const Mat& a, const Vec& v) {
  const Vec u = unit(v, "vector");
  if (a.cols() == 0) return 1.0;
  Mat qa = orthonormal_basis(a);
  return (u - qa * (qa.transpose() * u)).norm();
}

}  // namespace collar
