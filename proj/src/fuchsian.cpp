#include "collar/fuchsian.hpp"

#include <quadmath.h>

#include <array>
#include <cmath>
#include <sstream>

namespace collar {

namespace {

// The gluing chain multiplies condition numbers, so generators of handles far
// from the base frame are only as accurate as (accumulated conditioning) *
// (working epsilon). Assembling in quad precision and rounding at the end
// leaves the doubles limited by representation alone.
using Quad = __float128;

struct QMat {
  Quad m00, m01, m10, m11;
};

QMat operator*(const QMat& x, const QMat& y) {
  return {x.m00 * y.m00 + x.m01 * y.m10, x.m00 * y.m01 + x.m01 * y.m11,
          x.m10 * y.m00 + x.m11 * y.m10, x.m10 * y.m01 + x.m11 * y.m11};
}

// adjugate = inverse for det-1 matrices
QMat qinv(const QMat& m) { return {m.m11, -m.m01, -m.m10, m.m00}; }

Quad qnorm(const QMat& m) {
  return sqrtq(m.m00 * m.m00 + m.m01 * m.m01 + m.m10 * m.m10 + m.m11 * m.m11);
}

Mat2 to_double(const QMat& m) {
  Mat2 r;
  r << double(m.m00), double(m.m01), double(m.m10), double(m.m11);
  return r;
}

QMat from_double(const Mat2& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

QMat qdiag_flow(Quad t) { return {expq(t / 2), 0, 0, expq(-t / 2)}; }

const QMat qJ = {0, -1, 1, 0};

// det-1 frame sending (repelling, attracting) fixed points to (0, infinity);
// quad twin of standardizing_frame.
QMat qstd_frame(const QMat& m) {
  const Quad tr = m.m00 + m.m11;
  const Quad disc = tr * tr - 4;
  if (!(disc > 0)) fail(ErrorCode::NotHyperbolic, "pants boundary is not hyperbolic");
  const Quad root = sqrtq(disc);
  const Quad lam_att = (tr >= 0) ? (tr + root) / 2 : (tr - root) / 2;
  const Quad lam_rep = (tr >= 0) ? (tr - root) / 2 : (tr + root) / 2;
  auto eigvec = [&](Quad lam, Quad& vx, Quad& vy) {
    // (m - lam) v = 0; take the better-conditioned row.
    const Quad ax = m.m01, ay = lam - m.m00;
    const Quad bx = lam - m.m11, by = m.m10;
    Quad x = ax, y = ay;
    if (bx * bx + by * by > ax * ax + ay * ay) {
      x = bx;
      y = by;
    }
    const Quad n = sqrtq(x * x + y * y);
    if (!(n > 0)) fail(ErrorCode::NumericalFailure, "degenerate eigenvector");
    vx = x / n;
    vy = y / n;
  };
  Quad ax, ay, rx, ry;
  eigvec(lam_att, ax, ay);
  eigvec(lam_rep, rx, ry);
  QMat frame{ry, -rx, ay, -ax};
  Quad det = frame.m00 * frame.m11 - frame.m01 * frame.m10;
  if (det < 0) {
    frame.m00 = -frame.m00;
    frame.m01 = -frame.m01;
    det = -det;
  }
  if (!(det > 0)) fail(ErrorCode::NumericalFailure, "axis endpoints coincide");
  const Quad s = sqrtq(det);
  return {frame.m00 / s, frame.m01 / s, frame.m10 / s, frame.m11 / s};
}

// One pair of pants from three seam reflections. Boundary holonomies
// w[0] = X, w[1] = Y, w[2] = (XY)^-1 satisfy X*Y*w[2] = I exactly; boundary k
// has translation length boundary_length[k] and the pants interior lies to
// the left of each oriented axis. to_std[k] maps boundary k's axis to
// (0, infinity) with the attracting point at infinity.
struct Pants {
  QMat w[3];
  QMat to_std[3];
};

Pants make_pants(double l1, double l2, double l3) {
  const Quad q = expq(Quad(l1) / 2);
  const Quad ch2 = coshq(Quad(l2) / 2);
  const Quad ch3 = coshq(Quad(l3) / 2);
  // Third seam: half-circle (center c0 < 0, radius r) at inversive distance
  // cosh(l2/2) from the unit circle and cosh(l3/2) from the radius-q circle.
  const Quad r = (q * q - 1) / (2 * (ch2 + q * ch3));
  if (!(r > 0)) fail(ErrorCode::ConstructionFailure, "curve length too short to resolve");
  const Quad usq = 2 * r * ch2 + 1;  // c0^2 - r^2
  const Quad c0 = -sqrtq(usq + r * r);

  const QMat refl1{c0 / r, (r * r - c0 * c0) / r, 1 / r, -c0 / r};
  const QMat refl2{0, q, 1 / q, 0};
  const QMat refl3{0, 1, 1, 0};

  Pants p;
  p.w[0] = refl2 * refl3;
  p.w[1] = refl3 * refl1;
  p.w[2] = refl1 * refl2;
  for (int k = 0; k < 3; ++k) p.to_std[k] = qstd_frame(p.w[k]);
  return p;
}

struct PlacedPants {
  Pants local;
  QMat conj{1, 0, 0, 1};  // global element = conj * local * conj^-1

  QMat holonomy(int k) const { return conj * local.w[k] * qinv(conj); }
  // Standardizing frame of the placed boundary-k holonomy.
  QMat frame(int k) const { return local.to_std[k] * qinv(conj); }
};

// Conjugator placing `next` so that its boundary `slot` holonomy becomes the
// inverse of the already-placed boundary held by `target_frame`, with a twist
// of `t` along the common axis.
QMat glue_frame(const QMat& target_frame, const Pants& next, int slot, double t) {
  return qinv(target_frame) * qdiag_flow(t) * qJ * next.to_std[slot];
}

// Conjugator C minimizing sum ||C^-1 g C||_F^2 over the generators. Writing
// P = C C^T, the cost is sum tr(g P g^T P^-1), a geodesically convex function
// of the positive definite det-1 matrix P, so a pattern search over its two
// parameters lands on the global minimum. Small generator entries are not
// cosmetic: the symmetric-power lift raises the entry scale to the (n-1)-th
// power, and the double rounding of the lifted generators is what limits
// every spectral computation downstream.
QMat norm_center(const std::vector<QMat>& gens) {
  std::vector<Mat2> gd;
  gd.reserve(gens.size());
  for (const QMat& q : gens) gd.push_back(to_double(q));
  auto cost = [&](double u, double w) {
    const double a = std::exp(u);
    Mat2 p, pinv;
    p << a, w, w, (1.0 + w * w) / a;
    pinv << (1.0 + w * w) / a, -w, -w, a;
    double s = 0.0;
    for (const Mat2& m : gd) s += (m * p * m.transpose() * pinv).trace();
    return s;
  };
  double u = 0.0, w = 0.0, best = cost(u, w), step = 1.0;
  while (step > 1e-9) {
    bool moved = false;
    const double du[8] = {step, -step, 0, 0, step, step, -step, -step};
    const double dw[8] = {0, 0, step, -step, step, -step, step, -step};
    for (int k = 0; k < 8; ++k) {
      const double c = cost(u + du[k], w + dw[k]);
      if (c < best) {
        best = c;
        u += du[k];
        w += dw[k];
        moved = true;
        break;
      }
    }
    if (!moved) step /= 2;
  }
  // C = P^(1/2) = (P + I) / sqrt(tr P + 2) for det-1 positive definite P;
  // its determinant is exactly 1 again by the characteristic polynomial.
  const Quad a = expq(Quad(u));
  const Quad b = Quad(w);
  const QMat p{a, b, b, (1 + b * b) / a};
  const Quad den = sqrtq(p.m00 + p.m11 + 2);
  return {(p.m00 + 1) / den, p.m01 / den, p.m10 / den, (p.m11 + 1) / den};
}

void check_fn(const FNCoordinates& c) {
  if (c.genus < 2) fail(ErrorCode::ConstructionFailure, "genus must be at least 2");
  const size_t want = static_cast<size_t>(c.curve_count());
  if (c.lengths.size() != want || c.twists.size() != want)
    fail(ErrorCode::ConstructionFailure, "expected " + std::to_string(want) + " lengths and twists");
  for (double l : c.lengths) {
    if (!(l > 0.0) || l > 50.0 || !std::isfinite(l))
      fail(ErrorCode::ConstructionFailure, "curve lengths must lie in (0, 50]");
  }
  for (double t : c.twists) {
    if (!std::isfinite(t) || std::abs(t) > 1000.0)
      fail(ErrorCode::ConstructionFailure, "twists must be finite and moderate");
  }
}

Word gen_word(int index, bool inverse = false) { return Word::generator(index, inverse); }

// Boundary triple rules: for pants boundary words (w0, w1, w2) with
// w0*w1*w2 = 1, the triple anchored at slot t is (A,B,C) = (wt, wt+2, wt+1)
// (direct) or (wt^-1, wt+1^-1, wt+2^-1) (inverted); both satisfy C*B*A = 1.
PantsSideTriple direct_triple(const Word w[3], int t) {
  return {w[t], w[(t + 2) % 3], w[(t + 1) % 3]};
}
PantsSideTriple inverted_triple(const Word w[3], int t) {
  return {w[t].inverse(), w[(t + 1) % 3].inverse(), w[(t + 2) % 3].inverse()};
}
PantsSideTriple conjugate_triple(const PantsSideTriple& s, const Word& h) {
  return {s.a.conjugated_by(h), s.b.conjugated_by(h), s.c.conjugated_by(h)};
}

}  // namespace

std::vector<std::string> pants_curve_labels(int genus) {
  std::vector<std::string> labels;
  for (int i = 1; i <= genus; ++i) labels.push_back("a" + std::to_string(i));
  if (genus == 2) {
    labels.push_back("c");
  } else {
    for (int i = 1; i <= genus; ++i) labels.push_back("c" + std::to_string(i));
    for (int j = 1; j <= genus - 3; ++j) labels.push_back("d" + std::to_string(j));
  }
  return labels;
}

Mat2 FuchsianRep::evaluate(const Word& w) const {
  // Carry the product in quad: the result is then limited by the rounding of
  // the generators, not by double arithmetic through large intermediates.
  QMat m{1, 0, 0, 1};
  for (int l : w.letters()) {
    const int idx = std::abs(l) - 1;
    if (idx >= static_cast<int>(generators.size())) fail(ErrorCode::BadInput, "word letter out of range");
    const QMat q = from_double(generators[size_t(idx)]);
    m = m * (l > 0 ? q : qinv(q));
  }
  return to_double(m);
}

double FuchsianRep::relator_residual() const {
  const Word rel = surface_relator(genus);
  const std::vector<int>& ls = rel.letters();
  const size_t m = ls.size();
  std::vector<Mat2> factor(m);
  for (size_t i = 0; i < m; ++i) {
    const int idx = std::abs(ls[i]) - 1;
    factor[i] = ls[i] > 0 ? generators[size_t(idx)] : unimodular_inverse(generators[size_t(idx)]);
  }
  std::vector<double> prefix(m + 1, 1.0), suffix(m + 2, 1.0);
  Mat2 p = Mat2::Identity();
  for (size_t i = 0; i < m; ++i) {
    p = p * factor[i];
    prefix[i + 1] = p.norm();
  }
  Mat2 s = Mat2::Identity();
  for (size_t i = m; i-- > 0;) {
    s = factor[i] * s;
    suffix[i + 1] = s.norm();
  }
  // First-order sensitivity of the word map to relative perturbations of the
  // factors. Dividing by it gives a backward-style residual: a few eps when
  // the generators are correct to rounding, no matter how large the
  // intermediate products get, and O(1) for a broken construction.
  double sens = 0.0;
  for (size_t i = 0; i < m; ++i) sens += prefix[i] * factor[i].norm() * suffix[i + 2];
  const double num = std::min((p - Mat2::Identity()).norm(), (p + Mat2::Identity()).norm());
  return num / std::max(1.0, sens);
}

const PantsCurve& FuchsianRep::curve(const std::string& label) const {
  for (const PantsCurve& c : curves) {
    if (c.label == label) return c;
  }
  fail(ErrorCode::NotPantsCurve, "no pants curve labelled '" + label + "'");
}

FuchsianRep build_fuchsian(const FNCoordinates& coords) {
  check_fn(coords);
  const int g = coords.genus;
  FuchsianRep rep;
  rep.genus = g;
  rep.coords = coords;
  rep.generators.assign(2 * g, Mat2::Identity());

  const auto labels = pants_curve_labels(g);
  auto length_of = [&](int curve_idx) { return coords.lengths[curve_idx]; };
  auto twist_of = [&](int curve_idx) { return coords.twists[curve_idx]; };
  // chain curve index: genus 2 has the single "c" at index g; genus >= 3 has
  // c_i at g + (i-1) and d_j at 2g + (j-1).
  auto c_idx = [&](int i) { return g == 2 ? g : g + (i - 1); };
  auto d_idx = [&](int j) { return 2 * g + (j - 1); };

  // Handle pants H_i with boundary words a_i, b_i a_i^-1 b_i^-1, [a_i,b_i]^-1.
  std::vector<PlacedPants> handles(g);
  std::vector<std::array<Word, 3>> handle_words(g);
  for (int i = 0; i < g; ++i) {
    handles[i].local = make_pants(length_of(i), length_of(i), length_of(c_idx(i + 1)));
    const Word a = gen_word(2 * i), b = gen_word(2 * i + 1);
    handle_words[i] = {a, b * a.inverse() * b.inverse(), (a * b * a.inverse() * b.inverse()).inverse()};
  }

  // Stable letter of handle i: b_i glues the two waist boundaries.
  auto stable_letter = [&](const Pants& p, double t) {
    return qinv(p.to_std[1]) * qdiag_flow(t) * qJ * p.to_std[0];
  };
  std::vector<QMat> qgen(size_t(2 * g));
  // Zero-twist shadow of the whole generator set. The gauge choices below
  // (anchor and norm centering) are computed from the shadow, never from the
  // twisted generators, so a twist deformation moves exactly the generators
  // downstream of its curve and the gauge stays put.
  std::vector<QMat> shadow(size_t(2 * g));

  // Place handle 1 at the identity; its HNN stable letter is b_1.
  qgen[0] = handles[0].local.w[0];
  qgen[1] = stable_letter(handles[0].local, twist_of(0));
  shadow[0] = qgen[0];
  shadow[1] = stable_letter(handles[0].local, 0.0);

  if (g == 2) {
    const QMat conj = glue_frame(handles[0].frame(2), handles[1].local, 2, twist_of(c_idx(1)));
    handles[1].conj = conj;
    qgen[2] = conj * handles[1].local.w[0] * qinv(conj);
    qgen[3] = conj * stable_letter(handles[1].local, twist_of(1)) * qinv(conj);
    const QMat conj0 = glue_frame(handles[0].frame(2), handles[1].local, 2, 0.0);
    shadow[2] = conj0 * handles[1].local.w[0] * qinv(conj0);
    shadow[3] = conj0 * stable_letter(handles[1].local, 0.0) * qinv(conj0);
  } else {
    // Body pants B_j along the partial products D_j = [a1,b1]...[aj,bj]:
    // boundary words D_j, [a_{j+1}, b_{j+1}], D_{j+1}^-1.
    std::vector<PlacedPants> body(g - 2);
    std::vector<std::array<Word, 3>> body_words(g - 2);
    std::vector<QMat> shadow_conj(size_t(g - 2));
    QMat shadow_frame = handles[0].local.to_std[2];
    Word partial = handle_words[0][2].inverse();  // D_1
    for (int j = 0; j < g - 2; ++j) {
      const int prev_len_idx = (j == 0) ? c_idx(1) : d_idx(j);
      const int next_len_idx = (j == g - 3) ? c_idx(g) : d_idx(j + 1);
      body[j].local = make_pants(length_of(prev_len_idx), length_of(c_idx(j + 2)), length_of(next_len_idx));
      const Word commutator = handle_words[j + 1][2].inverse();
      body_words[j] = {partial, commutator, (partial * commutator).inverse()};
      partial = partial * commutator;

      const QMat target = (j == 0) ? handles[0].frame(2) : body[j - 1].frame(2);
      const double tw = (j == 0) ? twist_of(c_idx(1)) : twist_of(d_idx(j));
      body[j].conj = glue_frame(target, body[j].local, 0, tw);
      shadow_conj[size_t(j)] = glue_frame(shadow_frame, body[j].local, 0, 0.0);

      // Handle j+2 hangs off this body pants' middle boundary.
      const int hi = j + 1;
      handles[hi].conj = glue_frame(body[j].frame(1), handles[hi].local, 2, twist_of(c_idx(hi + 1)));
      qgen[2 * hi] = handles[hi].conj * handles[hi].local.w[0] * qinv(handles[hi].conj);
      qgen[2 * hi + 1] = handles[hi].conj * stable_letter(handles[hi].local, twist_of(hi)) * qinv(handles[hi].conj);
      const QMat sframe1 = body[j].local.to_std[1] * qinv(shadow_conj[size_t(j)]);
      const QMat sconj = glue_frame(sframe1, handles[hi].local, 2, 0.0);
      shadow[2 * hi] = sconj * handles[hi].local.w[0] * qinv(sconj);
      shadow[2 * hi + 1] = sconj * stable_letter(handles[hi].local, 0.0) * qinv(sconj);
      shadow_frame = body[j].local.to_std[2] * qinv(shadow_conj[size_t(j)]);
    }
    // Last handle glues to the final body boundary.
    const int hi = g - 1;
    handles[hi].conj = glue_frame(body[g - 3].frame(2), handles[hi].local, 2, twist_of(c_idx(g)));
    qgen[2 * hi] = handles[hi].conj * handles[hi].local.w[0] * qinv(handles[hi].conj);
    qgen[2 * hi + 1] = handles[hi].conj * stable_letter(handles[hi].local, twist_of(hi)) * qinv(handles[hi].conj);
    const QMat sconj = glue_frame(shadow_frame, handles[hi].local, 2, 0.0);
    shadow[2 * hi] = sconj * handles[hi].local.w[0] * qinv(sconj);
    shadow[2 * hi + 1] = sconj * stable_letter(handles[hi].local, 0.0) * qinv(sconj);

    // Re-anchor the gauge at the middle of the body chain. Conjugator norms
    // multiply along the chain, so anchoring at one end gives the far
    // generators entries ~ (chain conditioning)^2; anchoring in the middle
    // halves the exponent. The norm centering below would fix this on its own
    // only up to the double-precision cost evaluation, so start it from a
    // reasonable gauge.
    const QMat mid = shadow_conj[size_t((g - 3) / 2)];
    for (QMat& q : qgen) q = qinv(mid) * q * mid;
    for (QMat& q : shadow) q = qinv(mid) * q * mid;

    // Curve metadata for the body curves.
    for (int i = 1; i <= g; ++i) {
      PantsCurve c;
      c.label = labels[c_idx(i)];
      c.separating = true;
      const Word* hw = handle_words[i - 1].data();
      if (i == 1) {
        c.word = hw[2].inverse();
        c.side1 = inverted_triple(hw, 2);
        c.side2 = inverted_triple(body_words[0].data(), 0);
      } else if (i == g) {
        c.word = hw[2].inverse();
        c.side1 = inverted_triple(hw, 2);
        c.side2 = inverted_triple(body_words[g - 3].data(), 2);
      } else {
        const Word* bw = body_words[i - 2].data();
        c.word = bw[1];
        c.side1 = direct_triple(bw, 1);
        c.side2 = direct_triple(hw, 2);
      }
      if (i == 1) {
        // c1 bounds handle 1 against everything else; list the far side as
        // the big piece so a bulge moves the same generators a twist does.
        for (int h = 1; h < g; ++h) {
          c.far_generators.push_back(2 * h);
          c.far_generators.push_back(2 * h + 1);
        }
      } else {
        c.far_generators = {2 * (i - 1), 2 * (i - 1) + 1};
        // Measured against rebuilt coordinates: the deformation flow of these
        // curves runs against the twist parameter.
        c.twist_sign = -1;
      }
      c.suggested_crossing = gen_word(2 * (i - 1)) * gen_word(2 * (i % g));
      rep.curves.push_back(std::move(c));
    }
    for (int j = 1; j <= g - 3; ++j) {
      PantsCurve c;
      c.label = labels[d_idx(j)];
      c.separating = true;
      c.word = body_words[j - 1][2].inverse();
      c.side1 = inverted_triple(body_words[j - 1].data(), 2);
      c.side2 = inverted_triple(body_words[j].data(), 0);
      for (int h = j + 1; h < g; ++h) {
        c.far_generators.push_back(2 * h);
        c.far_generators.push_back(2 * h + 1);
      }
      c.suggested_crossing = gen_word(0) * gen_word(2 * (g - 1));
      rep.curves.push_back(std::move(c));
    }
  }

  // Center the gauge where the generators are smallest. Computed from the
  // zero-twist shadow, so it is a function of the lengths alone.
  {
    const QMat c = norm_center(shadow);
    const QMat cinv = qinv(c);
    for (QMat& q : qgen) q = cinv * q * c;
  }

  // Verify the placement before rounding. In quad a correct assembly leaves
  // the relator at working precision relative to its largest intermediate
  // product even for badly conditioned chains, while a wrong gluing leaves it
  // O(1) away from +-I, so the gate separates cleanly.
  {
    const Word rel = surface_relator(g);
    QMat r{1, 0, 0, 1};
    Quad scale = 1;
    for (int l : rel.letters()) {
      const int idx = std::abs(l) - 1;
      r = r * (l > 0 ? qgen[size_t(idx)] : qinv(qgen[size_t(idx)]));
      scale = std::max(scale, qnorm(r));
    }
    auto dist_to = [&](Quad sign) {
      const QMat d{r.m00 - sign, r.m01, r.m10, r.m11 - sign};
      return qnorm(d);
    };
    const Quad qres = std::min(dist_to(1), dist_to(-1)) / scale;
    if (!(qres < 1e-8)) {
      std::ostringstream os;
      os << "assembled relator off by " << double(qres) << " at working precision";
      fail(ErrorCode::ConstructionFailure, os.str());
    }
  }

  rep.generator_corrections.assign(size_t(2 * g), Mat2::Zero());
  for (int i = 0; i < 2 * g; ++i) {
    const QMat& q = qgen[size_t(i)];
    const Mat2 head = to_double(q);
    rep.generators[size_t(i)] = head;
    rep.generator_corrections[size_t(i)] << double(q.m00 - Quad(head(0, 0))), double(q.m01 - Quad(head(0, 1))),
        double(q.m10 - Quad(head(1, 0))), double(q.m11 - Quad(head(1, 1)));
  }

  // Waist curve metadata (both sides are the same handle pants; side 2 is
  // reached through the stable letter b_i).
  std::vector<PantsCurve> waists;
  for (int i = 0; i < g; ++i) {
    PantsCurve c;
    c.label = labels[i];
    c.word = gen_word(2 * i);
    c.separating = false;
    c.crossing_generator = 2 * i + 1;
    c.suggested_crossing = gen_word(2 * i + 1);
    const Word* hw = handle_words[i].data();
    c.side1 = direct_triple(hw, 0);
    c.side2 = conjugate_triple(direct_triple(hw, 1), gen_word(2 * i + 1, true));
    waists.push_back(std::move(c));
  }
  if (g == 2) {
    PantsCurve c;
    c.label = labels[2];
    c.separating = true;
    c.word = handle_words[0][2].inverse();
    c.side1 = inverted_triple(handle_words[0].data(), 2);
    c.side2 = inverted_triple(handle_words[1].data(), 2);
    c.far_generators = {2, 3};
    c.suggested_crossing = gen_word(0) * gen_word(2);
    rep.curves.push_back(std::move(c));
  }
  rep.curves.insert(rep.curves.begin(), waists.begin(), waists.end());

  for (const PantsCurve& c : rep.curves) {
    for (const PantsSideTriple* s : {&c.side1, &c.side2}) {
      if (!(s->c * s->b * s->a).empty())
        fail(ErrorCode::ConstructionFailure, "pants side triple for " + c.label + " does not multiply to 1");
    }
  }

  const double res = rep.relator_residual();
  if (!(res <= 1e-8)) {
    std::ostringstream os;
    os << "relator residual " << res;
    fail(ErrorCode::ConstructionFailure, os.str());
  }
  return rep;
}

bool is_hyperbolic(const Mat2& m, double tol) {
  const double det = m.determinant();
  return det > 0.0 && m.trace() * m.trace() - 4.0 * det > tol * det;
}

AxisEndpoints mobius_fixed_points(const Mat2& m) {
  const double det = m.determinant();
  if (!(det > 0.0)) fail(ErrorCode::BadInput, "expected a positive-determinant matrix");
  const double tr = m.trace();
  const double disc = tr * tr - 4.0 * det;
  if (!(disc > 1e-12 * det)) fail(ErrorCode::NotHyperbolic, "trace^2 - 4 det = " + std::to_string(disc));
  const double root = std::sqrt(disc);
  const double lam_att = (tr + (tr >= 0 ? root : -root)) / 2.0;  // larger modulus
  const double lam_rep = (tr - (tr >= 0 ? root : -root)) / 2.0;

  auto eigvec = [&](double lam) {
    // (m - lam) v = 0; take the better-conditioned row.
    Vec2 v1(m(0, 1), lam - m(0, 0));
    Vec2 v2(lam - m(1, 1), m(1, 0));
    Vec2 v = (v1.norm() >= v2.norm()) ? v1 : v2;
    if (v.norm() < 1e-14) fail(ErrorCode::NumericalFailure, "degenerate eigenvector");
    return Vec2(v.normalized());
  };
  return {eigvec(lam_att), eigvec(lam_rep)};
}

double translation_length(const Mat2& m) {
  if (!is_hyperbolic(m)) fail(ErrorCode::NotHyperbolic, "translation length of a non-hyperbolic element");
  return 2.0 * std::acosh(std::abs(m.trace()) / (2.0 * std::sqrt(m.determinant())));
}

Mat2 standardizing_frame(const Mat2& m) {
  const AxisEndpoints fp = mobius_fixed_points(m);
  Mat2 frame;
  frame << fp.repelling[1], -fp.repelling[0], fp.attracting[1], -fp.attracting[0];
  double det = frame.determinant();
  if (std::abs(det) < 1e-14) fail(ErrorCode::NumericalFailure, "axis endpoints coincide");
  if (det < 0) {
    frame.row(0) = -frame.row(0);
    det = -det;
  }
  return frame / std::sqrt(det);
}

Mat2 axis_flow(const Mat2& m, double t) {
  const Mat2 frame = standardizing_frame(m);
  Mat2 d;
  d << std::exp(t / 2.0), 0.0, 0.0, std::exp(-t / 2.0);
  return unimodular_inverse(frame) * d * frame;
}

double disk_angle(const Vec2& p) {
  const double x = p[0], y = p[1];
  if (x == 0.0 && y == 0.0) fail(ErrorCode::BadInput, "zero projective point");
  double theta = std::atan2(-2.0 * x * y, x * x - y * y);
  if (theta < 0) theta += 2.0 * M_PI;
  return theta;
}

bool cyclic_order_check(const std::vector<double>& angles, double min_gap) {
  const size_t n = angles.size();
  if (n < 3) fail(ErrorCode::BadInput, "cyclic order needs at least three points");
  const double tau = 2.0 * M_PI;
  std::vector<double> rel(n);
  for (size_t i = 0; i < n; ++i) {
    double d = std::fmod(angles[i] - angles[0], tau);
    if (d < 0) d += tau;
    rel[i] = d;
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double gap = std::abs(rel[i] - rel[j]);
      gap = std::min(gap, tau - gap);
      if (gap < min_gap) fail(ErrorCode::DuplicatePoint, "two boundary points coincide");
    }
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    if (!(rel[i] < rel[i + 1])) return false;
  }
  return true;
}

bool cyclically_ordered_either_way(const std::vector<double>& angles, double min_gap) {
  if (cyclic_order_check(angles, min_gap)) return true;
  return cyclic_order_check(std::vector<double>(angles.rbegin(), angles.rend()), min_gap);
}

}  // namespace collar
