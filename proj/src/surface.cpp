#include "collar/surface.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace collar {

namespace {

void check_letter(int letter, int genus) {
  const int idx = std::abs(letter) - 1;
  if (letter == 0 || idx >= 2 * genus) fail(ErrorCode::BadInput, "word letter out of range for genus");
}

std::vector<int> reduce_letters(std::vector<int> in) {
  std::vector<int> out;
  out.reserve(in.size());
  for (int l : in) {
    if (!out.empty() && out.back() == -l) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

}  // namespace

Word Word::parse(const std::string& text, int genus) {
  std::vector<int> letters;
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '.') {
      ++i;
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(c)))
      fail(ErrorCode::BadInput, "cannot parse word '" + text + "' at '" + std::string(1, c) + "'");
    const bool inverse = std::isupper(static_cast<unsigned char>(c));
    const char base = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (base != 'a' && base != 'b') fail(ErrorCode::BadInput, "unknown generator letter '" + std::string(1, c) + "'");
    ++i;
    size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) fail(ErrorCode::BadInput, "generator '" + std::string(1, c) + "' missing handle index");
    const int handle = std::stoi(text.substr(start, i - start));
    if (handle < 1 || handle > genus) fail(ErrorCode::BadInput, "handle index out of range in '" + text + "'");
    const int gen = 2 * (handle - 1) + (base == 'b' ? 1 : 0);
    letters.push_back(inverse ? -(gen + 1) : gen + 1);
  }
  return Word(reduce_letters(std::move(letters)));
}

std::string Word::str(int genus) const {
  std::ostringstream os;
  for (int l : letters_) {
    check_letter(l, genus);
    const int gen = std::abs(l) - 1;
    char c = (gen % 2 == 0) ? 'a' : 'b';
    if (l < 0) c = static_cast<char>(std::toupper(c));
    os << c << (gen / 2 + 1);
  }
  const std::string s = os.str();
  return s.empty() ? "1" : s;
}

Word Word::inverse() const {
  std::vector<int> out(letters_.rbegin(), letters_.rend());
  for (int& l : out) l = -l;
  return Word(std::move(out));
}

Word Word::operator*(const Word& rhs) const {
  std::vector<int> cat = letters_;
  cat.insert(cat.end(), rhs.letters_.begin(), rhs.letters_.end());
  return Word(reduce_letters(std::move(cat)));
}

Word Word::power(int k) const {
  Word base = k < 0 ? inverse() : *this;
  Word out;
  for (int i = 0; i < std::abs(k); ++i) out = out * base;
  return out;
}

Word Word::reduced() const { return Word(reduce_letters(letters_)); }

Word Word::cyclically_reduced() const {
  std::vector<int> w = reduce_letters(letters_);
  while (w.size() >= 2 && w.front() == -w.back()) {
    w.erase(w.begin());
    w.pop_back();
  }
  return Word(std::move(w));
}

Word Word::rotated(int by) const {
  if (letters_.empty()) return *this;
  const int n = size();
  std::vector<int> out(letters_.size());
  for (int i = 0; i < n; ++i) out[i] = letters_[(i + by % n + n) % n];
  return Word(std::move(out));
}

Word Word::canonical_class() const {
  const Word base = cyclically_reduced();
  if (base.empty()) return base;
  Word best = base;
  for (const Word& side : {base, base.inverse()}) {
    for (int r = 0; r < side.size(); ++r) {
      Word cand = side.rotated(r);
      if (cand < best) best = cand;
    }
  }
  return best;
}

bool Word::is_proper_power() const {
  const Word base = cyclically_reduced();
  const int n = base.size();
  for (int period = 1; period <= n / 2; ++period) {
    if (n % period != 0) continue;
    if (base.rotated(period) == base) return true;
  }
  return false;
}

std::vector<long long> homology_class(const Word& w, int genus) {
  std::vector<long long> h(2 * genus, 0);
  for (int l : w.letters()) {
    check_letter(l, genus);
    h[std::abs(l) - 1] += (l > 0) ? 1 : -1;
  }
  return h;
}

long long algebraic_intersection(const Word& x, const Word& y, int genus) {
  const auto hx = homology_class(x, genus);
  const auto hy = homology_class(y, genus);
  long long total = 0;
  for (int i = 0; i < genus; ++i) total += hx[2 * i] * hy[2 * i + 1] - hx[2 * i + 1] * hy[2 * i];
  return total;
}

Word surface_relator(int genus) {
  Word r;
  for (int i = 0; i < genus; ++i) {
    const Word a = Word::generator(2 * i);
    const Word b = Word::generator(2 * i + 1);
    r = r * a * b * a.inverse() * b.inverse();
  }
  return r;
}

std::vector<CurvePair> validate_catalog(std::vector<CurvePair> pairs, int genus) {
  for (CurvePair& p : pairs) {
    for (CurveDescriptor* d : {&p.gamma, &p.eta}) {
      d->word = d->word.reduced();
      if (d->word.empty()) fail(ErrorCode::CatalogInconsistent, "curve '" + d->label + "' reduces to the identity");
      if (d->simple && d->word.is_proper_power())
        fail(ErrorCode::CatalogInconsistent, "curve '" + d->label + "' is a proper power but marked simple");
      for (int l : d->word.letters()) check_letter(l, genus);
    }
    const long long alg = algebraic_intersection(p.gamma.word, p.eta.word, genus);
    if (alg != p.algebraic_i)
      fail(ErrorCode::CatalogInconsistent,
           "pair (" + p.gamma.label + "," + p.eta.label + "): stored algebraic intersection " +
               std::to_string(p.algebraic_i) + " but homology gives " + std::to_string(alg));
    const long long abs_alg = std::llabs(alg);
    if (p.geometric_i < abs_alg || (p.geometric_i - abs_alg) % 2 != 0)
      fail(ErrorCode::CatalogInconsistent,
           "pair (" + p.gamma.label + "," + p.eta.label + "): geometric intersection " +
               std::to_string(p.geometric_i) + " incompatible with algebraic " + std::to_string(alg));
    p.u = static_cast<int>((p.geometric_i + abs_alg) / 2);
    p.v = p.geometric_i - p.u;
  }
  return pairs;
}

std::vector<CurvePair> builtin_catalog() {
  const int genus = 2;
  auto desc = [&](const std::string& label, const std::string& word, bool simple) {
    CurveDescriptor d;
    d.label = label;
    d.word = Word::parse(word, genus);
    d.simple = simple;
    return d;
  };
  std::vector<CurvePair> pairs;
  auto add = [&](CurveDescriptor g, CurveDescriptor e, int geom, long long alg) {
    CurvePair p;
    p.gamma = std::move(g);
    p.eta = std::move(e);
    p.geometric_i = geom;
    p.algebraic_i = alg;
    pairs.push_back(std::move(p));
  };
  add(desc("a1", "a1", true), desc("b1", "b1", true), 1, 1);
  add(desc("a1", "a1", true), desc("a2", "a2", true), 0, 0);
  add(desc("c", "a1b1A1B1", true), desc("a1", "a1", true), 0, 0);
  add(desc("a1", "a1", true), desc("b1a2b2", "b1a2b2", true), 1, 1);
  add(desc("c", "a1b1A1B1", true), desc("a1a2", "a1a2", true), 2, 0);
  add(desc("a1", "a1", true), desc("a1b1a1B1", "a1b1a1B1", false), 2, 0);
  add(desc("a2", "a2", true), desc("b2", "b2", true), 1, 1);
  return validate_catalog(std::move(pairs), genus);
}

std::vector<CurvePair> load_catalog_json(const std::string& path, int genus) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::BadInput, "cannot open catalog file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::CatalogInconsistent, "catalog JSON parse error: " + std::string(e.what()));
  }
  if (j.contains("genus") && j["genus"].get<int>() != genus)
    fail(ErrorCode::CatalogInconsistent, "catalog genus does not match representation genus");
  std::vector<CurvePair> pairs;
  for (const auto& jp : j.at("pairs")) {
    CurvePair p;
    auto read_desc = [&](const nlohmann::json& jd) {
      CurveDescriptor d;
      d.word = Word::parse(jd.at("word").get<std::string>(), genus);
      d.label = jd.contains("label") ? jd["label"].get<std::string>() : d.word.str(genus);
      d.simple = jd.at("simple").get<bool>();
      return d;
    };
    p.gamma = read_desc(jp.at("gamma"));
    p.eta = read_desc(jp.at("eta"));
    p.geometric_i = jp.at("geom_i").get<int>();
    p.algebraic_i = jp.at("alg_i").get<long long>();
    pairs.push_back(std::move(p));
  }
  return validate_catalog(std::move(pairs), genus);
}

std::string catalog_to_json(const std::vector<CurvePair>& pairs, int genus) {
  nlohmann::json j;
  j["genus"] = genus;
  j["pairs"] = nlohmann::json::array();
  for (const CurvePair& p : pairs) {
    nlohmann::json jp;
    auto write_desc = [&](const CurveDescriptor& d) {
      return nlohmann::json{{"label", d.label}, {"word", d.word.str(genus)}, {"simple", d.simple}};
    };
    jp["gamma"] = write_desc(p.gamma);
    jp["eta"] = write_desc(p.eta);
    jp["geom_i"] = p.geometric_i;
    jp["alg_i"] = p.algebraic_i;
    j["pairs"].push_back(std::move(jp));
  }
  return j.dump(2) + "\n";
}

std::vector<Word> primitive_word_corpus(int genus, int max_len) {
  std::set<Word> classes;
  const int alphabet = 2 * genus;
  std::vector<int> letters;
  // Depth-first enumeration of freely non-cancelling letter strings.
  std::function<void(int)> extend = [&](int target_len) {
    if (static_cast<int>(letters.size()) == target_len) {
      if (letters.size() > 1 && letters.front() == -letters.back()) return;  // not cyclically reduced
      Word w{std::vector<int>(letters)};
      if (w.is_proper_power()) return;
      classes.insert(w.canonical_class());
      return;
    }
    for (int g = 1; g <= alphabet; ++g) {
      for (int sign : {1, -1}) {
        const int l = sign * g;
        if (!letters.empty() && letters.back() == -l) continue;
        letters.push_back(l);
        extend(target_len);
        letters.pop_back();
      }
    }
  };
  for (int len = 1; len <= max_len; ++len) extend(len);
  return std::vector<Word>(classes.begin(), classes.end());
}

}  // namespace collar
