#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ilstm/numerics.hpp"

#include <cmath>
#include <stdexcept>

using namespace ilstm;

TEST_CASE("sigmoid at zero, saturation, and an exact rational point") {
  CHECK(sigmoid({0.0})[0] == doctest::Approx(0.5));

  // Hand evaluation: sigma(ln 3) = 1 / (1 + 1/3) = 3/4.
  CHECK(sigmoid({std::log(3.0)})[0] == doctest::Approx(0.75).epsilon(1e-12));

  Vector sat = sigmoid({-1000.0, 1000.0});
  CHECK(sat[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sat[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(all_finite(sat));
}

TEST_CASE("sigmoid stays in (0,1) and finite across extreme inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x{rng.uniform(-1e6, 1e6)};
    Vector y = sigmoid(x);
    CHECK(y[0] >= 0.0);
    CHECK(y[0] <= 1.0);
    CHECK(std::isfinite(y[0]));
  }
}

TEST_CASE("tanh_act basics and odd symmetry") {
  CHECK(tanh_act({0.0})[0] == 0.0);
  CHECK(tanh_act({1.0})[0] == doctest::Approx(0.7615941559557649).epsilon(1e-14));

  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    double v = rng.uniform(-1e6, 1e6);
    Vector pos = tanh_act({v});
    Vector neg = tanh_act({-v});
    CHECK(pos[0] == doctest::Approx(-neg[0]).epsilon(1e-14));
    CHECK(pos[0] >= -1.0);
    CHECK(pos[0] <= 1.0);
  }
}

TEST_CASE("affine known values") {
  Matrix id(2, 2);
  id(0, 0) = 1.0;
  id(1, 1) = 1.0;
  Vector v{3.0, -4.0};
  Vector zero{0.0, 0.0};
  CHECK(affine(id, v, zero) == v);

  Matrix zw(2, 2);
  Vector b{5.0, 6.0};
  CHECK(affine(zw, v, b) == b);

  // Hand multiplication: [[1,2],[3,4]] * [1,1] = [3,7].
  Matrix w(2, 2);
  w(0, 0) = 1.0;
  w(0, 1) = 2.0;
  w(1, 0) = 3.0;
  w(1, 1) = 4.0;
  Vector r = affine(w, Vector{1.0, 1.0}, zero);
  CHECK(r[0] == doctest::Approx(3.0));
  CHECK(r[1] == doctest::Approx(7.0));
}

TEST_CASE("affine rejects shape mismatches naming both shapes") {
  Matrix w(2, 3);
  Vector v{1.0, 2.0};
  Vector b{0.0, 0.0};
  CHECK_THROWS_WITH_AS(affine(w, v, b),
                       doctest::Contains("2x3"), std::invalid_argument);
}

TEST_CASE("affine is linear in v and b for fixed W") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng.index(5);
    const std::size_t cols = 1 + rng.index(5);
    Matrix w(rows, cols);
    for (double& e : w.a) e = rng.uniform(-2.0, 2.0);
    Vector v1(cols), v2(cols), b1(rows), b2(rows);
    for (double& e : v1) e = rng.uniform(-2.0, 2.0);
    for (double& e : v2) e = rng.uniform(-2.0, 2.0);
    for (double& e : b1) e = rng.uniform(-2.0, 2.0);
    for (double& e : b2) e = rng.uniform(-2.0, 2.0);
    const double s = rng.uniform(-3.0, 3.0);

    Vector vsum(cols);
    for (std::size_t k = 0; k < cols; ++k) vsum[k] = v1[k] + s * v2[k];
    Vector bsum(rows);
    for (std::size_t k = 0; k < rows; ++k) bsum[k] = b1[k] + b2[k];

    Vector lhs = affine(w, vsum, bsum);
    Vector r1 = affine(w, v1, b1);
    Vector r2 = affine(w, v2, Vector(rows, 0.0));
    Vector r3 = affine(w, Vector(cols, 0.0), b2);
    for (std::size_t k = 0; k < rows; ++k) {
      CHECK(lhs[k] == doctest::Approx(r1[k] + s * r2[k] + r3[k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("softmax uniform, exact exponentials, shift invariance") {
  ProbVector u = softmax(Vector(6, 0.0));
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(u[k] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  }

  // exp(ln k) = k, so the result is [1/6, 2/6, 3/6].
  ProbVector e = softmax({std::log(1.0), std::log(2.0), std::log(3.0)});
  CHECK(e[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
  CHECK(e[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-12));

  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    Vector z(n);
    for (double& v : z) v = rng.uniform(-50.0, 50.0);
    const double shift = rng.uniform(-100.0, 100.0);
    Vector zs = z;
    for (double& v : zs) v += shift;
    ProbVector a = softmax(z);
    ProbVector b = softmax(zs);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));
      CHECK(a[k] >= 0.0);
      CHECK(a[k] <= 1.0);
      sum += a[k];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("cross_entropy known values and positivity") {
  Vector onehot(6, 0.0);
  onehot[2] = 1.0;
  CHECK(cross_entropy({2}, ProbVector(onehot)) == doctest::Approx(0.0));

  CHECK(cross_entropy({0}, softmax(Vector(6, 0.0))) ==
        doctest::Approx(std::log(6.0)).epsilon(1e-12));

  // p[target] = 1/4 -> ln 4.
  CHECK(cross_entropy({1}, ProbVector({0.75, 0.25})) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("cross_entropy is floored, never NaN, and zero iff p=1") {
  Vector p{1.0, 0.0};
  const double loss = cross_entropy({1}, ProbVector(p));
  CHECK(std::isfinite(loss));
  CHECK(loss > 0.0);

  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    Vector z(1 + rng.index(6));
    for (double& v : z) v = rng.uniform(-20.0, 20.0);
    ProbVector q = softmax(z);
    const std::size_t j = rng.index(q.size());
    const double l = cross_entropy({j}, q);
    CHECK(l >= 0.0);
    if (l == 0.0) {
      CHECK(q[j] == 1.0);
    }
  }
}

TEST_CASE("cross_entropy rejects out-of-range target") {
  CHECK_THROWS_AS(cross_entropy({3}, ProbVector({0.5, 0.5})),
                  std::invalid_argument);
}

TEST_CASE("ClassTarget one_hot") {
  Vector t = ClassTarget{2}.one_hot(5);
  CHECK(t == Vector{0.0, 0.0, 1.0, 0.0, 0.0});
  CHECK_THROWS_AS(ClassTarget{5}.one_hot(5), std::invalid_argument);
}

TEST_CASE("ProbVector validates its invariants") {
  CHECK_THROWS_AS(ProbVector({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(ProbVector({1.2, -0.2}), std::invalid_argument);
  CHECK_THROWS_AS(ProbVector(Vector{}), std::invalid_argument);
}

TEST_CASE("finite_diff_grad on analytic functions") {
  // f(theta) = theta^2 at theta = 3 -> derivative 6.
  auto square = [](const Vector& th) { return th[0] * th[0]; };
  Vector g = finite_diff_grad(square, {3.0}, 1e-5);
  CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-6));

  auto constant = [](const Vector&) { return 4.2; };
  Vector gz = finite_diff_grad(constant, {1.0, -2.0, 0.5}, 1e-5);
  for (double v : gz) CHECK(v == doctest::Approx(0.0));

  // Mixed polynomial with closed-form partials, random points.
  auto poly = [](const Vector& th) {
    return th[0] * th[0] * th[1] + std::sin(th[1]) + 3.0 * th[2];
  };
  Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    Vector th{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
              rng.uniform(-2.0, 2.0)};
    Vector fd = finite_diff_grad(poly, th, 1e-5);
    Vector exact{2.0 * th[0] * th[1], th[0] * th[0] + std::cos(th[1]), 3.0};
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(fd[k] == doctest::Approx(exact[k]).epsilon(1e-6));
    }
  }
}

TEST_CASE("finite_diff_grad rejects bad eps and non-finite evaluations") {
  auto f = [](const Vector& th) { return th[0]; };
  CHECK_THROWS_AS(finite_diff_grad(f, {1.0}, 0.0), std::invalid_argument);

  auto bad = [](const Vector& th) { return std::log(th[0]); };
  CHECK_THROWS_AS(finite_diff_grad(bad, {-1.0}, 1e-5), std::runtime_error);
}

TEST_CASE("Rng reproducibility and derived streams") {
  Rng a(99);
  Rng b(99);
  for (int k = 0; k < 100; ++k) {
    CHECK(a.next_u64() == b.next_u64());
  }

  Rng c(99);
  Rng d(100);
  bool differs = false;
  for (int k = 0; k < 10; ++k) {
    differs = differs || (c.next_u64() != d.next_u64());
  }
  CHECK(differs);

  CHECK(Rng::derive(42, 0) != Rng::derive(42, 1));
  CHECK(Rng::derive(42, 0) == Rng::derive(42, 0));
}

TEST_CASE("Rng shuffle is a permutation and seed-stable") {
  Rng a(7);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  a.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

  Rng b(7);
  std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  b.shuffle(w);
  CHECK(v == w);
}

TEST_CASE("outer-product and transposed mat-vec accumulators") {
  Matrix acc(2, 3);
  Vector u{1.0, 2.0};
  Vector v{3.0, 4.0, 5.0};
  add_outer(acc, u, v);
  add_outer(acc, u, v);
  CHECK(acc(0, 0) == doctest::Approx(6.0));
  CHECK(acc(1, 2) == doctest::Approx(20.0));

  Matrix w(2, 3);
  w(0, 0) = 1.0;
  w(0, 1) = 2.0;
  w(0, 2) = 3.0;
  w(1, 0) = 4.0;
  w(1, 1) = 5.0;
  w(1, 2) = 6.0;
  Vector out(3, 1.0);
  add_matvec_transposed(w, u, out);
  // W^T u = [9, 12, 15], plus the initial ones.
  CHECK(out[0] == doctest::Approx(10.0));
  CHECK(out[1] == doctest::Approx(13.0));
  CHECK(out[2] == doctest::Approx(16.0));
}
