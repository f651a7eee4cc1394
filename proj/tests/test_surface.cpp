#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "collar/surface.hpp"

using namespace collar;

TEST_CASE("word parsing round trips through the compact form") {
  const Word w = Word::parse("a1B1a2b2A1", 2);
  CHECK(w.str(2) == "a1B1a2b2A1");
  CHECK(w.size() == 5);
  CHECK(Word::parse("", 2).empty());
  CHECK_THROWS_AS(Word::parse("a3", 2), Error);
  CHECK_THROWS_AS(Word::parse("x1", 2), Error);
  CHECK_THROWS_AS(Word::parse("a", 2), Error);
  CHECK(Word::parse("a3", 3).str(3) == "a3");
  CHECK(Word::parse("a12", 12).str(12) == "a12");
}

TEST_CASE("free reduction and group operations") {
  const Word a = Word::parse("a1", 2);
  const Word b = Word::parse("b1", 2);
  CHECK((a * a.inverse()).empty());
  CHECK((a * b * b.inverse() * a).str(2) == "a1a1");
  CHECK(a.power(3).str(2) == "a1a1a1");
  CHECK(a.power(-2).str(2) == "A1A1");
  CHECK(a.power(0).empty());
  CHECK(a.conjugated_by(b).str(2) == "b1a1B1");
  const Word messy(std::vector<int>{1, 2, -2, -1, 3});
  CHECK(messy.reduced().str(2) == "a2");
}

TEST_CASE("cyclic reduction, rotation, canonical class") {
  const Word w = Word::parse("b1a1B1", 2);
  CHECK(w.cyclically_reduced().str(2) == "a1");
  const Word v = Word::parse("a1b1", 2);
  CHECK(v.rotated(1).str(2) == "b1a1");
  CHECK(v.rotated(1).canonical_class() == v.canonical_class());
  CHECK(v.inverse().canonical_class() == v.canonical_class());
  const Word u = Word::parse("a1b1A1B1", 2);
  CHECK(u.canonical_class() == u.inverse().canonical_class());
  CHECK(u.canonical_class() == u.rotated(3).canonical_class());
}

TEST_CASE("proper power detection") {
  CHECK(Word::parse("a1a1", 2).is_proper_power());
  CHECK(Word::parse("a1b1a1b1", 2).is_proper_power());
  CHECK(Word::parse("a1b1a1b1a1b1", 2).is_proper_power());
  CHECK(!Word::parse("a1b1", 2).is_proper_power());
  CHECK(!Word::parse("a1b1a1B1", 2).is_proper_power());
  CHECK(!Word::parse("a1", 2).is_proper_power());
}

TEST_CASE("homology and algebraic intersection") {
  const Word a1 = Word::parse("a1", 2);
  const Word b1 = Word::parse("b1", 2);
  CHECK(homology_class(a1, 2) == std::vector<long long>{1, 0, 0, 0});
  CHECK(homology_class(Word::parse("a1b1A1B1", 2), 2) == std::vector<long long>{0, 0, 0, 0});
  CHECK(homology_class(Word::parse("a1a1b2", 2), 2) == std::vector<long long>{2, 0, 0, 1});
  CHECK(algebraic_intersection(a1, b1, 2) == 1);
  CHECK(algebraic_intersection(b1, a1, 2) == -1);
  CHECK(algebraic_intersection(a1, Word::parse("a2", 2), 2) == 0);
  CHECK(algebraic_intersection(Word::parse("a1b2", 2), Word::parse("b1a2", 2), 2) == 0);
}

TEST_CASE("surface relator") {
  const Word r2 = surface_relator(2);
  CHECK(r2.str(2) == "a1b1A1B1a2b2A2B2");
  CHECK(homology_class(r2, 2) == std::vector<long long>(4, 0));
  CHECK(surface_relator(3).size() == 12);
}

TEST_CASE("builtin catalog is consistent and carries the expected crossing data") {
  const std::vector<CurvePair> cat = builtin_catalog();
  REQUIRE(cat.size() == 7);
  for (const CurvePair& p : cat) {
    CHECK(p.u >= p.v);
    CHECK(p.u + p.v == p.geometric_i);
    CHECK(p.u - p.v == std::llabs(p.algebraic_i));
  }
  // one catalog pair exercises a non-simple eta
  int nonsimple = 0;
  for (const CurvePair& p : cat) nonsimple += p.eta.simple ? 0 : 1;
  CHECK(nonsimple == 1);
  int crossing = 0;
  for (const CurvePair& p : cat) crossing += p.crossing() ? 1 : 0;
  CHECK(crossing >= 3);
}

TEST_CASE("catalog validation recomputes algebraic data") {
  std::vector<CurvePair> cat = builtin_catalog();
  cat[0].algebraic_i += 1;
  CHECK_THROWS_AS(validate_catalog(cat, 2), Error);
  try {
    validate_catalog(cat, 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CatalogInconsistent);
  }

  std::vector<CurvePair> cat2 = builtin_catalog();
  cat2[1].geometric_i = 1;  // parity breaks: algebraic 0 needs even geometric
  CHECK_THROWS_AS(validate_catalog(cat2, 2), Error);

  std::vector<CurvePair> cat3 = builtin_catalog();
  cat3[0].gamma.word = Word::parse("a1a1", 2);
  cat3[0].gamma.simple = true;
  CHECK_THROWS_AS(validate_catalog(cat3, 2), Error);
}

TEST_CASE("catalog json round trip") {
  const std::vector<CurvePair> cat = builtin_catalog();
  const std::string text = catalog_to_json(cat, 2);
  const std::string path = "test_catalog_roundtrip.json";
  {
    std::ofstream out(path);
    out << text;
  }
  const std::vector<CurvePair> back = load_catalog_json(path, 2);
  std::remove(path.c_str());
  REQUIRE(back.size() == cat.size());
  for (size_t i = 0; i < cat.size(); ++i) {
    CHECK(back[i].gamma.word == cat[i].gamma.word);
    CHECK(back[i].eta.word == cat[i].eta.word);
    CHECK(back[i].gamma.label == cat[i].gamma.label);
    CHECK(back[i].gamma.simple == cat[i].gamma.simple);
    CHECK(back[i].eta.simple == cat[i].eta.simple);
    CHECK(back[i].geometric_i == cat[i].geometric_i);
    CHECK(back[i].algebraic_i == cat[i].algebraic_i);
    CHECK(back[i].u == cat[i].u);
    CHECK(back[i].v == cat[i].v);
  }
}

TEST_CASE("primitive word corpus enumerates conjugacy classes") {
  const std::vector<Word> len1 = primitive_word_corpus(2, 1);
  CHECK(len1.size() == 4);

  const std::vector<Word> len2 = primitive_word_corpus(2, 2);
  CHECK(len2.size() == 16);

  const std::vector<Word> len3 = primitive_word_corpus(2, 3);
  std::set<Word> classes;
  for (const Word& w : len3) {
    CHECK(!w.empty());
    CHECK(w.size() <= 3);
    CHECK(!w.is_proper_power());
    CHECK(w == w.cyclically_reduced());
    CHECK(classes.insert(w.canonical_class()).second);
  }
  // a1^2 and friends are proper powers and must be excluded
  for (const Word& w : len3) CHECK(w.canonical_class() != Word::parse("a1a1", 2).canonical_class());
  // the commutator class shows up once max_len reaches 4
  const std::vector<Word> len4 = primitive_word_corpus(2, 4);
  bool found_comm = false;
  const Word comm = Word::parse("a1b1A1B1", 2).canonical_class();
  for (const Word& w : len4) found_comm = found_comm || w.canonical_class() == comm;
  CHECK(found_comm);
  CHECK(len4.size() > len3.size());
}
