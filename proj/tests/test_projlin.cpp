#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "collar/projlin.hpp"
#include "oracles.hpp"

using namespace collar;

namespace {

Mat hyperplane_basis(const Mat& m, const Vec& l) {
  Mat b(m.rows(), m.cols() + 1);
  b.leftCols(m.cols()) = m;
  b.col(m.cols()) = l;
  return b;
}

}  // namespace

TEST_CASE("eigendecompose agrees with characteristic polynomial roots") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.15, 1.1);
  for (int n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<double> spec;
      double scale = 1.0;
      for (int i = 0; i < n; ++i) {
        scale *= 1.15 + u(rng);
        spec.push_back(scale * (trial % 3 == 1 && i == 0 ? -1.0 : 1.0));
      }
      const Mat a = oracles::with_spectrum(spec, rng);
      const Eigendecomposition eig = eigendecompose(a);
      const std::vector<double> roots = oracles::real_eigenvalues(a);
      REQUIRE(int(roots.size()) == n);
      std::vector<double> expected = spec;
      std::sort(expected.begin(), expected.end(),
                [](double x, double y) { return std::abs(x) < std::abs(y); });
      for (int i = 0; i < n; ++i) {
        const double tol = 1e-9 * std::max(1.0, std::abs(expected[size_t(i)]));
        CHECK(std::abs(eig.values(i) - expected[size_t(i)]) < tol);
      }
      std::vector<double> sorted_roots = roots;
      std::sort(sorted_roots.begin(), sorted_roots.end());
      std::vector<double> sorted_spec = spec;
      std::sort(sorted_spec.begin(), sorted_spec.end());
      // the polynomial route resolves each root to a fraction of the
      // spectral radius, so the bound is radius-relative
      const double tol = 3e-8 * (1.0 + std::abs(sorted_spec.back()) + std::abs(sorted_spec.front()));
      for (int i = 0; i < n; ++i)
        CHECK(std::abs(sorted_roots[size_t(i)] - sorted_spec[size_t(i)]) < tol);
    }
  }
}

TEST_CASE("eigendecompose recovers a pinned unit-determinant spectrum") {
  std::mt19937_64 rng(11);
  const std::vector<double> spec = {0.2, 0.5, 1.1, 100.0 / 11.0};
  const Mat a = oracles::with_spectrum(spec, rng);
  CHECK(std::abs(a.determinant() - 1.0) < 1e-9);
  const Eigendecomposition eig = eigendecompose(a);
  for (int i = 0; i < 4; ++i) CHECK(eig.values(i) == doctest::Approx(spec[size_t(i)]).epsilon(1e-10));
  CHECK(eig.min_gap_ratio == doctest::Approx(1.1 / 0.5 - 1.0).epsilon(1e-8));
  for (int i = 0; i < 4; ++i) {
    const Vec v = eig.vectors.col(i);
    CHECK((a * v - eig.values(i) * v).norm() < 1e-8 * a.norm());
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("eigendecompose rejects rotations") {
  Mat r(2, 2);
  const double th = 0.3;
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  CHECK_THROWS_WITH_AS(eigendecompose(r), doctest::Contains("NonRealSpectrum"), Error);
  try {
    eigendecompose(r);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonRealSpectrum);
  }
}

TEST_CASE("eigendecompose rejects modulus collisions") {
  std::mt19937_64 rng(13);
  const Mat a = oracles::with_spectrum({0.25, 2.0, 2.0}, rng);
  CHECK(std::abs(a.determinant() - 1.0) < 1e-9);
  CHECK_THROWS_AS(eigendecompose(a), Error);
  try {
    eigendecompose(a);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ModulusCollision);
  }

  const Mat b = oracles::with_spectrum({-1.0, 1.0, 2.0}, rng);
  try {
    eigendecompose(b);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ModulusCollision);
  }
}

TEST_CASE("eigenflag spans match eigenvector spans and are invariant") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> spec = {0.1, 0.4, 1.3, 3.7, 9.9};
    const Mat a = oracles::with_spectrum(spec, rng);
    const Eigendecomposition eig = eigendecompose(a);
    const Flag att = eigenflag(eig, true);
    const Flag rep = eigenflag(eig, false);
    for (int k = 1; k < 5; ++k) {
      const Mat va = att.subspace(k);
      CHECK((va.transpose() * va - Mat::Identity(k, k)).norm() < 1e-10);
      // invariance: A maps the span to itself
      CHECK(max_principal_angle(va, a * va) < 1e-8);
      CHECK(max_principal_angle(rep.subspace(k), a * rep.subspace(k)) < 1e-8);
      // attracting k-subspace = span of the k largest-modulus eigenvectors
      CHECK(subspaces_equal(va, eig.vectors.rightCols(k)));
      CHECK(subspaces_equal(rep.subspace(k), eig.vectors.leftCols(k)));
    }
    CHECK(off_subspace_residual(orthonormal_basis(eig.vectors.col(4)), att.line()) < 1e-9);
  }
}

TEST_CASE("cross ratio reduces to the classical one on a projective line") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    double z[4];
    for (double& v : z) v = u(rng);
    if (std::abs(z[0] - z[1]) < 0.1 || std::abs(z[3] - z[2]) < 0.1) continue;
    Vec l[4];
    for (int i = 0; i < 4; ++i) {
      l[i] = Vec(2);
      l[i] << z[i], 1.0;
    }
    const Mat empty(2, 0);
    const double got = cross_ratio(empty, l[0], l[1], l[2], l[3]);
    const double expect = oracles::classical_cross_ratio(z[0], z[1], z[2], z[3]);
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));
    CHECK(planar_cross_ratio(l[0], l[1], l[2], l[3]) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("cross ratio is scale invariant in every slot") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 3; n <= 6; ++n) {
    for (int trial = 0; trial < 40; ++trial) {
      Mat m(n, n - 2);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n - 2; ++j) m(i, j) = u(rng);
      Vec l[4];
      for (auto& v : l) {
        v = Vec(n);
        for (int i = 0; i < n; ++i) v(i) = u(rng);
      }
      double base = 0.0;
      try {
        base = cross_ratio(m, l[0], l[1], l[2], l[3]);
      } catch (const Error&) {
        continue;
      }
      const double scales[4] = {-3.7, 0.02, 41.0, -0.6};
      for (int s = 0; s < 4; ++s) {
        Vec scaled[4] = {l[0], l[1], l[2], l[3]};
        scaled[s] *= scales[s];
        const double got = cross_ratio(m, scaled[0], scaled[1], scaled[2], scaled[3]);
        CHECK(got == doctest::Approx(base).epsilon(1e-11));
      }
      Mat mm = m;
      mm.col(0) *= -2.5;
      if (n > 3) mm.col(1) *= 0.3;
      CHECK(cross_ratio(mm, l[0], l[1], l[2], l[3]) == doctest::Approx(base).epsilon(1e-11));
    }
  }
}

TEST_CASE("cross ratio detects degenerate pencils") {
  const Mat empty(2, 0);
  Vec a(2), b(2), c(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  c << 1.0, 1.0;
  try {
    cross_ratio(empty, a, a, b, c);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegeneratePencil);
  }
}

TEST_CASE("planar cross ratio rejects non-coplanar quadruples") {
  Vec e1(3), e2(3), e3(3), m(3);
  e1 << 1, 0, 0;
  e2 << 0, 1, 0;
  e3 << 0, 0, 1;
  m << 1, 1, 1;
  try {
    planar_cross_ratio(e1, e2, e3, m);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotCoplanar);
  }
}

TEST_CASE("planar cross ratio matches the pencil version on embedded planes") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int n = 3; n <= 6; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      Mat plane(n, 2);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) plane(i, j) = u(rng);
      double z[4];
      std::uniform_real_distribution<double> uz(-3.0, 3.0);
      for (double& v : z) v = uz(rng);
      if (std::abs(z[0] - z[1]) < 0.2 || std::abs(z[3] - z[2]) < 0.2) continue;
      Vec l[4];
      for (int i = 0; i < 4; ++i) l[i] = plane.col(0) * z[i] + plane.col(1);
      const double expect = oracles::classical_cross_ratio(z[0], z[1], z[2], z[3]);
      CHECK(planar_cross_ratio(l[0], l[1], l[2], l[3]) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("sum_dim counts stacked subspace dimensions") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(5, 2), b(5, 2);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) {
      a(i, j) = u(rng);
      b(i, j) = u(rng);
    }
  CHECK(sum_dim({a, b}) == 4);
  Mat c(5, 3);
  c.leftCols(2) = a;
  c.col(2) = a.col(0) * 2.0 - a.col(1);
  CHECK(sum_dim({c}) == 2);
  CHECK(sum_dim({a, a}) == 2);
  Mat d(5, 4);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) d(i, j) = u(rng);
  CHECK(sum_dim({d, a}) == 5);
}

TEST_CASE("principal angles report known rotations") {
  Mat a(3, 1), b(3, 1);
  a << 1, 0, 0;
  const double th = 0.25;
  b << std::cos(th), std::sin(th), 0;
  CHECK(max_principal_angle(a, b) == doctest::Approx(th).epsilon(1e-10));
  Mat p(3, 2), q(3, 2);
  p << 1, 0, 0, 1, 0, 0;
  q << 1, 0, 0, std::cos(th), 0, std::sin(th);
  CHECK(max_principal_angle(p, q) == doctest::Approx(th).epsilon(1e-10));
  CHECK(subspaces_equal(p, p));
  CHECK(!subspaces_equal(p, q));
}

TEST_CASE("hyperplane pencils built from flags stay consistent") {
  // det[M l_i l_j] based ratios only use lines modulo the pencil core M:
  // adding any multiple of an M column to a line must not change the value.
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4;
    Mat m(n, n - 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n - 2; ++j) m(i, j) = u(rng);
    Vec l[4];
    for (auto& v : l) {
      v = Vec(n);
      for (int i = 0; i < n; ++i) v(i) = u(rng);
    }
    double base;
    try {
      base = cross_ratio(m, l[0], l[1], l[2], l[3]);
    } catch (const Error&) {
      continue;
    }
    Vec shifted = l[2] + 1.7 * m.col(0) - 0.4 * m.col(1);
    CHECK(cross_ratio(m, l[0], l[1], shifted, l[3]) == doctest::Approx(base).epsilon(1e-9));
    CHECK(hyperplane_basis(m, l[0]).cols() == n - 1);
  }
}
