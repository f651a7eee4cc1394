#pragma once

#include <string>
#include <vector>

#include "collar/errors.hpp"

namespace collar {

// Word in the standard genus-g generators a1, b1, ..., ag, bg.
// Letters are nonzero ints: +(k+1) means generator k, -(k+1) its inverse,
// where generator index k = 2*(i-1) is a_i and k = 2*(i-1)+1 is b_i.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<int> letters) : letters_(std::move(letters)) {}

  static Word generator(int index, bool inverse = false) {
    return Word({inverse ? -(index + 1) : index + 1});
  }
  // Compact form: lowercase = generator, uppercase = inverse, e.g. "a1B1a2".
  static Word parse(const std::string& text, int genus);

  const std::vector<int>& letters() const { return letters_; }
  bool empty() const { return letters_.empty(); }
  int size() const { return static_cast<int>(letters_.size()); }

  Word inverse() const;
  Word operator*(const Word& rhs) const;  // concatenation + free reduction
  Word conjugated_by(const Word& g) const { return g * (*this) * g.inverse(); }
  Word power(int k) const;

  Word reduced() const;           // free reduction
  Word cyclically_reduced() const;
  Word rotated(int by) const;     // cyclic rotation of the letter list

  // Lexicographically minimal rotation over the word and its inverse;
  // canonical representative of the unoriented free-group conjugacy class.
  Word canonical_class() const;

  bool is_proper_power() const;   // cyclically reduced word equal to u^k, k >= 2

  std::string str(int genus) const;
  bool operator==(const Word& rhs) const { return letters_ == rhs.letters_; }
  bool operator<(const Word& rhs) const { return letters_ < rhs.letters_; }

 private:
  std::vector<int> letters_;
};

// Exponent-sum vector in the order (a1, b1, ..., ag, bg).
std::vector<long long> homology_class(const Word& w, int genus);

// Symplectic algebraic intersection number of homology classes.
long long algebraic_intersection(const Word& x, const Word& y, int genus);

// Defining relator [a1,b1]...[ag,bg].
Word surface_relator(int genus);

struct CurveDescriptor {
  std::string label;
  Word word;
  bool simple = true;
};

struct CurvePair {
  CurveDescriptor gamma;  // the curve whose eigenvalue gaps drive the bounds
  CurveDescriptor eta;    // the curve whose total length is bounded below
  int geometric_i = 0;    // minimal crossing number of the pair
  long long algebraic_i = 0;
  int u = 0, v = 0;       // crossing counts by side: u >= v, u + v = geometric_i

  bool crossing() const { return geometric_i != 0; }
};

// Validates word reduction, recomputes algebraic_i and (u, v), checks
// integrality/order; throws CatalogInconsistent on any mismatch.
std::vector<CurvePair> validate_catalog(std::vector<CurvePair> pairs, int genus);

// Built-in genus-2 pair catalog.
std::vector<CurvePair> builtin_catalog();

std::vector<CurvePair> load_catalog_json(const std::string& path, int genus);
std::string catalog_to_json(const std::vector<CurvePair>& pairs, int genus);

// All cyclically reduced, primitive words of letter length <= max_len, one
// per unoriented free-group conjugacy class (symbolic dedup only; callers
// add trace-based dedup on top).
std::vector<Word> primitive_word_corpus(int genus, int max_len);

}  // namespace collar
