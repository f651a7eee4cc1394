#include "collar/hitchin.hpp"

#include <quadmath.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace collar {

namespace {

using nlohmann::json;

using Quad = __float128;

// Exact for all the binomials that fit a 64-bit range: every intermediate in
// the running product is an integer well inside the 113-bit mantissa.
Quad binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Quad r = 1;
  for (int i = 0; i < k; ++i) r = r * Quad(n - i) / Quad(i + 1);
  return r;
}

Quad qpow(Quad base, int e) {
  Quad r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::string generator_name(int idx) {
  const int handle = idx / 2 + 1;
  return (idx % 2 == 0 ? "a" : "b") + std::to_string(handle);
}

// Gap increments t along the ascending-modulus eigenvalue order, converted
// to a zero-sum vector of diagonal exponents.  The twist_sign of the curve
// orients the n = 2 case so that a single parameter matches the
// Fenchel-Nielsen twist flow of the same curve.
Vec gap_exponents(const Vec& t, int n, int twist_sign) {
  Vec s(n);
  s(0) = 0.0;
  for (int k = 0; k + 1 < n; ++k) s(k + 1) = s(k) - twist_sign * t(k);
  s.array() -= s.mean();
  return s;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const json& j, int n) {
  if (!j.is_array() || int(j.size()) != n) fail(ErrorCode::BadInput, "generator is not an n x n array");
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = j[i];
    if (!row.is_array() || int(row.size()) != n) fail(ErrorCode::BadInput, "generator row has wrong size");
    for (int k = 0; k < n; ++k) {
      if (!row[k].is_number()) fail(ErrorCode::BadInput, "generator entry is not a number");
      m(i, k) = row[k].get<double>();
    }
  }
  if (!m.allFinite()) fail(ErrorCode::BadInput, "generator entry is not finite");
  return m;
}

// Rescale (and for odd n possibly negate) so the determinant becomes 1.
Mat unit_determinant(Mat m, const std::string& name) {
  const int n = int(m.rows());
  double det = stable_det(m);
  if (!(std::fabs(det) > 1e-12)) fail(ErrorCode::BadInput, "generator " + name + " is singular");
  if (det < 0.0) {
    if (n % 2 == 0) fail(ErrorCode::BadInput, "generator " + name + " has negative determinant");
    m = -m;
    det = -det;
  }
  // Matrices stored in double drift off the unit-determinant slice by an
  // amount set by their conditioning; renormalizing that drift perturbs the
  // entries more than it fixes, so only rescale genuinely off-scale input.
  if (std::fabs(det - 1.0) > 1e-3) m /= std::pow(det, 1.0 / n);
  return m;
}

}  // namespace

Mat irreducible_lift(const Mat2& m, int n) {
  if (n < 1) fail(ErrorCode::BadInput, "lift rank must be at least 1");
  const int d = n - 1;
  // The entry sums cancel catastrophically once the seed entries are large
  // and n grows (terms ~ ||m||^(n-1) against entries of order one), so the
  // whole assembly runs at extended precision and rounds once at the end.
  const Quad a = m(0, 0), b = m(0, 1), c = m(1, 0), e = m(1, 1);
  Mat out(n, n);
  for (int j = 0; j <= d; ++j) {
    for (int k = 0; k <= d; ++k) {
      Quad sum = 0;
      for (int p = 0; p <= j; ++p) {
        const int q = j - p;
        if (p > d - k || q > k) continue;
        sum += binomial(d - k, p) * qpow(a, d - k - p) * qpow(c, p) * binomial(k, q) *
               qpow(b, k - q) * qpow(e, q);
      }
      out(j, k) = double(sqrtq(binomial(d, k) / binomial(d, j)) * sum);
    }
  }
  if (!out.allFinite()) fail(ErrorCode::NumericalFailure, "lifted matrix exceeds double range");
  return out;
}

namespace {

// LU-based inverse: Eigen's cofactor formulas for n <= 4 compute the
// determinant from potentially huge entries and lose digits to cancellation.
Mat stable_inverse(const Mat& m) { return m.partialPivLu().inverse(); }

// Split a word into generator factors and exponent signs without forming the
// product, so eigendecompose_word can accumulate it in extended precision.
void word_factors(const Representation& rep, const Word& w, std::vector<Mat>& factors,
                  std::vector<int>& exponents) {
  factors.clear();
  exponents.clear();
  for (int letter : w.letters()) {
    const int idx = std::abs(letter) - 1;
    if (idx < 0 || idx >= int(rep.generators.size())) fail(ErrorCode::BadInput, "word letter out of range");
    factors.push_back(rep.generators[idx]);
    exponents.push_back(letter > 0 ? 1 : -1);
  }
}

Eigendecomposition word_eig(const Representation& rep, const Word& w) {
  std::vector<Mat> factors;
  std::vector<int> exponents;
  word_factors(rep, w, factors, exponents);
  if (factors.empty()) return eigendecompose(Mat::Identity(rep.n, rep.n));
  return eigendecompose_word(factors, exponents);
}

void require_positive_values(const Eigendecomposition& eig) {
  int positive = 0, negative = 0;
  for (int i = 0; i < eig.n(); ++i) (eig.values(i) > 0.0 ? positive : negative) += 1;
  if (positive == eig.n()) return;
  if (negative == eig.n() && eig.n() % 2 == 0) return;
  fail(ErrorCode::NonRealSpectrum, "spectrum is not positive up to an overall sign");
}

}  // namespace

Mat Representation::evaluate(const Word& w) const {
  Mat m = Mat::Identity(n, n);
  for (int letter : w.letters()) {
    const int idx = std::abs(letter) - 1;
    if (idx < 0 || idx >= int(generators.size())) fail(ErrorCode::BadInput, "word letter out of range");
    if (letter > 0)
      m = m * generators[idx];
    else
      m = m * stable_inverse(generators[idx]);
  }
  return m;
}

Mat2 Representation::seed_evaluate(const Word& w) const {
  if (!has_seed()) fail(ErrorCode::BadInput, "representation has no rank-2 seed");
  Mat2 m = Mat2::Identity();
  for (int letter : w.letters()) {
    const int idx = std::abs(letter) - 1;
    if (idx < 0 || idx >= int(seed.size())) fail(ErrorCode::BadInput, "word letter out of range");
    if (letter > 0)
      m = m * seed[idx];
    else
      m = m * unimodular_inverse(seed[idx]);
  }
  return m;
}

double Representation::relator_residual() const {
  const Word rel = surface_relator(genus);
  const std::vector<int>& ls = rel.letters();
  const size_t m = ls.size();
  std::vector<Mat> factor(m);
  for (size_t i = 0; i < m; ++i) {
    const size_t idx = size_t(std::abs(ls[i]) - 1);
    factor[i] = ls[i] > 0 ? generators[idx] : stable_inverse(generators[idx]);
  }
  std::vector<double> prefix(m + 1, 1.0), suffix(m + 2, 1.0);
  Mat p = Mat::Identity(n, n);
  for (size_t i = 0; i < m; ++i) {
    p = p * factor[i];
    prefix[i + 1] = p.norm();
  }
  Mat s = Mat::Identity(n, n);
  for (size_t i = m; i-- > 0;) {
    s = factor[i] * s;
    suffix[i + 1] = s.norm();
  }
  // Same backward-style normalization as FuchsianRep::relator_residual.
  double sens = 0.0;
  for (size_t i = 0; i < m; ++i) sens += prefix[i] * factor[i].norm() * suffix[i + 2];
  const Mat id = Mat::Identity(n, n);
  const double num = std::min((p - id).norm(), (p + id).norm());
  return num / std::max(1.0, sens);
}

const PantsCurve& Representation::curve(const std::string& label) const {
  for (const PantsCurve& c : curves)
    if (c.label == label) return c;
  fail(ErrorCode::NotPantsCurve, "no pants curve named '" + label + "'");
}

Representation lift_representation(const FuchsianRep& base, int n) {
  if (n < 2) fail(ErrorCode::BadInput, "lift rank must be at least 2");
  Representation rep;
  rep.n = n;
  rep.genus = base.genus;
  rep.generators.reserve(base.generators.size());
  for (const Mat2& g : base.generators) rep.generators.push_back(irreducible_lift(g, n));
  rep.seed = base.generators;
  rep.curves = base.curves;
  rep.provenance.kind = "fuchsian_lift";
  rep.provenance.fn = base.coords;
  rep.provenance.lift_rank = n;
  const double res = rep.relator_residual();
  if (!(res <= 1e-7)) {
    std::ostringstream os;
    os << "lifted relator residual " << res;
    fail(ErrorCode::ConstructionFailure, os.str());
  }
  return rep;
}

void validate_representation(const Representation& rep, double relator_tol) {
  if (rep.genus < 2) fail(ErrorCode::BadInput, "genus must be at least 2");
  if (rep.n < 2) fail(ErrorCode::BadInput, "rank must be at least 2");
  if (int(rep.generators.size()) != 2 * rep.genus)
    fail(ErrorCode::BadInput, "expected 2 * genus generators");
  for (size_t i = 0; i < rep.generators.size(); ++i) {
    const Mat& g = rep.generators[i];
    if (g.rows() != rep.n || g.cols() != rep.n) fail(ErrorCode::BadInput, "generator has wrong shape");
    if (!g.allFinite()) fail(ErrorCode::BadInput, "generator has non-finite entries");
    const double det = stable_det(g);
    if (!(std::fabs(det) > 1e-12))
      fail(ErrorCode::BadInput, "generator " + generator_name(int(i)) + " is singular");
    // A determinant stored through double entries is only defined up to
    // n * eps * cond(g), so the unit-determinant gate has to scale with the
    // conditioning of the generator.
    const double tol =
        std::max(1e-6, 64.0 * rep.n * std::numeric_limits<double>::epsilon() * condition_number(g));
    if (std::fabs(std::fabs(det) - 1.0) > tol)
      fail(ErrorCode::BadInput, "generator " + generator_name(int(i)) + " does not have unit determinant");
  }
  const double res = rep.relator_residual();
  if (!(res <= relator_tol)) {
    std::ostringstream os;
    os << "relator residual " << res << " exceeds " << relator_tol;
    fail(ErrorCode::RelatorBroken, os.str());
  }
  for (const PantsCurve& c : rep.curves) require_positive_values(word_eig(rep, c.word));
}

double length(const Mat& holonomy) {
  const Eigendecomposition eig = eigendecompose(holonomy);
  return std::log(eig.modulus(eig.n() - 1) / eig.modulus(0));
}

double length(const Representation& rep, const Word& w) {
  if (w.reduced().empty()) fail(ErrorCode::BadInput, "length of the identity word");
  const Eigendecomposition eig = word_eig(rep, w);
  return std::log(eig.modulus(eig.n() - 1) / eig.modulus(0));
}

double symmetric_space_length(const Mat& holonomy) {
  const Eigendecomposition eig = eigendecompose(holonomy);
  double s = 0.0;
  for (int i = 0; i < eig.n(); ++i) {
    const double l = std::log(eig.modulus(i));
    s += l * l;
  }
  return std::sqrt(2.0 * s);
}

double symmetric_space_length(const Representation& rep, const Word& w) {
  if (w.reduced().empty()) fail(ErrorCode::BadInput, "length of the identity word");
  const Eigendecomposition eig = word_eig(rep, w);
  double s = 0.0;
  for (int i = 0; i < eig.n(); ++i) {
    const double l = std::log(eig.modulus(i));
    s += l * l;
  }
  return std::sqrt(2.0 * s);
}

Mat symmetric_square(const Mat& g) {
  const int n = int(g.rows());
  if (g.cols() != n || n < 1) fail(ErrorCode::BadInput, "symmetric square needs a square matrix");
  const int m = n * (n + 1) / 2;
  Mat out(m, m);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++col) {
      Mat basis = Mat::Zero(n, n);
      basis(i, j) = 1.0;
      basis(j, i) = 1.0;
      const Mat image = g * basis * g.transpose();
      int row = 0;
      for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l, ++row) out(row, col) = image(k, l);
    }
  }
  return out;
}

double hilbert_length(const Mat& holonomy) {
  const Mat sq = symmetric_square(holonomy);
  Eigen::EigenSolver<Mat> solver(sq);
  if (solver.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "symmetric square eigensolver failed");
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < sq.rows(); ++i) {
    const double mod = std::abs(solver.eigenvalues()(i));
    if (i == 0 || mod < lo) lo = mod;
    if (i == 0 || mod > hi) hi = mod;
  }
  if (!(lo > 0.0)) fail(ErrorCode::NumericalFailure, "symmetric square is singular");
  return std::log(hi / lo);
}

double hilbert_length(const Representation& rep, const Word& w) {
  if (w.reduced().empty()) fail(ErrorCode::BadInput, "length of the identity word");
  // The extreme moduli of the induced action on symmetric 2-tensors are the
  // squares of the extreme moduli of the holonomy itself, so the Hilbert
  // length is twice the modulus spread; going through the word spectrum
  // avoids squaring an already ill-conditioned product.
  const Eigendecomposition eig = word_eig(rep, w);
  return 2.0 * std::log(eig.modulus(eig.n() - 1) / eig.modulus(0));
}

namespace {

bool moduli_self_dual(const Eigendecomposition& eig, double tol) {
  for (int k = 0; k < eig.n(); ++k)
    if (std::fabs(eig.modulus(k) * eig.modulus(eig.n() - 1 - k) - 1.0) > tol) return false;
  return true;
}

}  // namespace

bool is_self_dual_spectrum(const Mat& holonomy, double tol) {
  return moduli_self_dual(eigendecompose(holonomy), tol);
}

bool is_self_dual_locus(const Representation& rep, double tol) {
  for (const Mat& g : rep.generators)
    if (!moduli_self_dual(eigendecompose(g), tol)) return false;
  for (int h = 0; h < rep.genus; ++h) {
    const std::vector<Mat> pair = {rep.generators[2 * h], rep.generators[2 * h + 1]};
    if (!moduli_self_dual(eigendecompose_word(pair, {1, 1}), tol)) return false;
  }
  return true;
}

void require_positive_spectrum(const Mat& holonomy) {
  require_positive_values(eigendecompose(holonomy));
}

Flag attracting_flag(const Representation& rep, const Word& w) {
  return eigenflag(word_eig(rep, w), true);
}

Flag repelling_flag(const Representation& rep, const Word& w) {
  return eigenflag(word_eig(rep, w), false);
}

Representation bulge_deform(const Representation& rep, const std::string& curve_label, const Vec& t) {
  if (rep.curves.empty())
    fail(ErrorCode::NotPantsCurve, "representation carries no pants-curve metadata");
  const PantsCurve& pc = rep.curve(curve_label);
  if (int(t.size()) != rep.n - 1) fail(ErrorCode::BadInput, "expected rank - 1 bulge parameters");
  if (!t.allFinite()) fail(ErrorCode::BadInput, "bulge parameters must be finite");

  std::vector<Mat> factors;
  std::vector<int> exponents;
  word_factors(rep, pc.word, factors, exponents);
  const Vec s = gap_exponents(t, rep.n, pc.twist_sign);
  const Vec multipliers = s.array().exp().matrix();
  const Mat d = spectral_multiplier(factors, exponents, multipliers);

  Representation out = rep;
  if (pc.separating) {
    for (int idx : pc.far_generators)
      out.generators[idx] = product_of({d, out.generators[idx], d}, {1, 1, -1});
  } else {
    out.generators[pc.crossing_generator] =
        product_of({out.generators[pc.crossing_generator], d}, {1, 1});
  }

  const double res = out.relator_residual();
  if (!(res <= 1e-7)) {
    std::ostringstream os;
    os << "relator residual " << res << " after bulge along " << curve_label;
    fail(ErrorCode::RelatorBroken, os.str());
  }

  BulgeRecord record;
  record.curve = curve_label;
  record.t = t;
  // Spot checks: large deformations can leave the locus where the curve
  // spectra stay positive and the attracting flags stay transverse. Record
  // what was observed instead of rejecting the result, so a caller sweeping
  // parameters can see where the checks start failing.
  try {
    for (const PantsCurve& c : out.curves) require_positive_values(word_eig(out, c.word));
    require_positive_values(word_eig(out, pc.suggested_crossing));
    const Flag curve_att = attracting_flag(out, pc.word);
    const Flag cross_att = attracting_flag(out, pc.suggested_crossing);
    for (int k = 1; k < out.n; ++k)
      if (sum_dim({curve_att.subspace(k), cross_att.subspace(out.n - k)}) != out.n) {
        record.spot_checks = "flag transversality lost along " + curve_label;
        break;
      }
  } catch (const Error& e) {
    record.spot_checks = e.what();
  }
  out.provenance.deformations.push_back(std::move(record));
  return out;
}

std::string representation_to_json(const Representation& rep) {
  json j;
  j["n"] = rep.n;
  j["genus"] = rep.genus;
  json gens = json::object();
  for (size_t i = 0; i < rep.generators.size(); ++i)
    gens[generator_name(int(i))] = matrix_to_json(rep.generators[i]);
  j["generators"] = gens;
  json prov;
  prov["kind"] = rep.provenance.kind;
  if (rep.provenance.fn) {
    const FNCoordinates& fn = *rep.provenance.fn;
    prov["fn"] = {{"genus", fn.genus}, {"lengths", fn.lengths}, {"twists", fn.twists}};
    prov["lift_rank"] = rep.provenance.lift_rank;
  }
  json defs = json::array();
  for (const BulgeRecord& rec : rep.provenance.deformations) {
    std::vector<double> tv(rec.t.data(), rec.t.data() + rec.t.size());
    defs.push_back({{"curve", rec.curve}, {"t", tv}, {"spot_checks", rec.spot_checks}});
  }
  prov["deformations"] = defs;
  j["provenance"] = prov;
  return j.dump(2) + "\n";
}

Representation representation_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::BadInput, std::string("representation file is not valid JSON: ") + e.what());
  }
  Representation rep;
  try {
    rep.n = j.at("n").get<int>();
    rep.genus = j.at("genus").get<int>();
    if (rep.n < 2 || rep.n > 64) fail(ErrorCode::BadInput, "rank out of range");
    if (rep.genus < 2 || rep.genus > 64) fail(ErrorCode::BadInput, "genus out of range");
    const json& gens = j.at("generators");
    for (int i = 0; i < 2 * rep.genus; ++i) {
      const std::string name = generator_name(i);
      if (!gens.contains(name)) fail(ErrorCode::BadInput, "missing generator " + name);
      rep.generators.push_back(unit_determinant(matrix_from_json(gens.at(name), rep.n), name));
    }
    if (j.contains("provenance")) {
      const json& prov = j.at("provenance");
      rep.provenance.kind = prov.value("kind", std::string("external"));
      if (rep.provenance.kind != "external" && rep.provenance.kind != "fuchsian_lift")
        fail(ErrorCode::BadInput, "unknown provenance kind '" + rep.provenance.kind + "'");
      if (rep.provenance.kind == "fuchsian_lift") {
        const json& fnj = prov.at("fn");
        FNCoordinates fn;
        fn.genus = fnj.at("genus").get<int>();
        fn.lengths = fnj.at("lengths").get<std::vector<double>>();
        fn.twists = fnj.at("twists").get<std::vector<double>>();
        if (fn.genus != rep.genus) fail(ErrorCode::BadInput, "provenance genus does not match");
        rep.provenance.fn = fn;
        rep.provenance.lift_rank = prov.value("lift_rank", rep.n);
        if (rep.provenance.lift_rank != rep.n) fail(ErrorCode::BadInput, "lift rank does not match rank");
      }
      if (prov.contains("deformations")) {
        for (const json& dj : prov.at("deformations")) {
          BulgeRecord rec;
          rec.curve = dj.at("curve").get<std::string>();
          const std::vector<double> tv = dj.at("t").get<std::vector<double>>();
          rec.t = Eigen::Map<const Vec>(tv.data(), long(tv.size()));
          rec.spot_checks = dj.value("spot_checks", std::string("ok"));
          rep.provenance.deformations.push_back(std::move(rec));
        }
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::BadInput, std::string("malformed representation file: ") + e.what());
  }
  if (rep.provenance.fn) {
    const FuchsianRep base = build_fuchsian(*rep.provenance.fn);
    rep.seed = base.generators;
    rep.curves = base.curves;
    for (const BulgeRecord& rec : rep.provenance.deformations) {
      rep.curve(rec.curve);
      if (int(rec.t.size()) != rep.n - 1)
        fail(ErrorCode::BadInput, "recorded deformation has wrong parameter count");
    }
  }
  validate_representation(rep);
  return rep;
}

void save_representation(const Representation& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::BadInput, "cannot open '" + path + "' for writing");
  out << representation_to_json(rep);
  if (!out) fail(ErrorCode::BadInput, "failed writing '" + path + "'");
}

Representation load_representation(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::BadInput, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return representation_from_json(buffer.str());
}

}  // namespace collar
