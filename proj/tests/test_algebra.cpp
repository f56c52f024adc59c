#include <gtest/gtest.h>

#include "joinrank/homotopy.hpp"
#include "joinrank/slice.hpp"

using namespace joinrank;

namespace {

// f = {x1^2 - x2, x1^3 + x3}
PolynomialSystem twisted_cubic() {
  return PolynomialSystem(3, {Polynomial(3, {{1.0, {2, 0, 0}}, {-1.0, {0, 1, 0}}}),
                              Polynomial(3, {{1.0, {3, 0, 0}}, {1.0, {0, 0, 1}}})});
}

CVec vec(std::initializer_list<Complex> v) {
  CVec x(static_cast<Index>(v.size()));
  Index i = 0;
  for (auto c : v) x[i++] = c;
  return x;
}

Polynomial random_poly(std::size_t n, int deg, int nterms, Rng& rng) {
  std::vector<Term> t;
  for (int k = 0; k < nterms; ++k) {
    Exponents e(n, 0);
    const int d = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(deg) + 1));
    for (int j = 0; j < d; ++j) ++e[rng.uniform_index(n)];
    t.push_back({Complex(rng.uniform(-1, 1), rng.uniform(-1, 1)), e});
  }
  return Polynomial(n, t);
}

}  // namespace

TEST(Evaluate, TwistedCubicPoints) {
  const auto f = twisted_cubic();
  EXPECT_LT(f.evaluate(vec({1, 1, -1})).norm(), 1e-15);
  EXPECT_LT(f.evaluate(vec({0, 0, 0})).norm(), 1e-15);
  EXPECT_LT(f.evaluate(vec({-1.0 / 3, 1.0 / 9, 1.0 / 27})).norm(), 1e-15);
}

TEST(Evaluate, DimensionMismatchIsInputError) {
  try {
    twisted_cubic().evaluate(vec({1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Input);
  }
}

TEST(Jacobian, MatchesSymbolicOracle) {
  const CMat J = twisted_cubic().jacobian(vec({1, 1, -1}));
  CMat expect(2, 3);
  expect << 2, -1, 0, 3, 0, 1;
  EXPECT_LT((J - expect).norm(), 1e-14);
  const PolynomialSystem g(2, {Polynomial(2, {{1.0, {2, 0}}, {-1.0, {0, 1}}})});
  CMat e2(1, 2);
  e2 << 4, -1;
  EXPECT_LT((g.jacobian(vec({2, 4})) - e2).norm(), 1e-14);
}

TEST(Jacobian, ZeroAtOriginForQuadraticTerms) {
  const PolynomialSystem g(2, {Polynomial(2, {{2.0, {2, 0}}, {1.0, {1, 1}}, {3.0, {0, 3}}})});
  EXPECT_EQ(g.jacobian(vec({0, 0})).norm(), 0.0);
}

TEST(Jacobian, AgreesWithCentralDifferences) {
  Rng rng(7);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(4);
    std::vector<Polynomial> ps;
    for (std::size_t i = 0; i < 1 + rng.uniform_index(3); ++i) ps.push_back(random_poly(n, 4, 6, rng));
    const PolynomialSystem f(n, ps);
    CVec x(static_cast<Index>(n));
    for (Index i = 0; i < x.size(); ++i) x[i] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const CMat J = f.jacobian(x);
    const double h = 1e-5;
    for (std::size_t v = 0; v < n; ++v) {
      CVec xp = x, xm = x;
      xp[static_cast<Index>(v)] += h;
      xm[static_cast<Index>(v)] -= h;
      const CVec fd = (f.evaluate(xp) - f.evaluate(xm)) / (2 * h);
      worst = std::max(worst, (J.col(static_cast<Index>(v)) - fd).cwiseAbs().maxCoeff());
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Polynomial, CanonicalMerge) {
  const Polynomial p(2, {{1.0, {1, 0}}, {2.0, {1, 0}}, {1.0, {0, 0}}, {-1.0, {0, 0}}});
  ASSERT_EQ(p.terms().size(), 1u);
  EXPECT_EQ(p.terms()[0].coeff, Complex(3.0));
  EXPECT_EQ(p.total_degree(), 1);
  EXPECT_TRUE(Polynomial(2, {{0.0, {1, 1}}}).is_zero());
}

TEST(Homotopy, MidpointOfCoefficients) {
  const PolynomialSystem s(1, {Polynomial(1, {{1.0, {2}}, {-1.0, {0}}})});
  const PolynomialSystem g(1, {Polynomial(1, {{1.0, {2}}, {-4.0, {0}}})});
  const Homotopy h = make_segment_homotopy(s, g, Complex(1.0));
  const auto mid = h.at(0.5);
  EXPECT_EQ(mid[0].coefficient({2}), Complex(1.0));
  EXPECT_EQ(mid[0].coefficient({0}), Complex(-2.5));
}

TEST(Homotopy, TargetBitEqual) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Polynomial> a, b;
    for (int i = 0; i < 3; ++i) {
      a.push_back(random_poly(3, 3, 5, rng));
      b.push_back(random_poly(3, 3, 5, rng));
    }
    const PolynomialSystem start(3, a), target(3, b);
    const Homotopy h = make_segment_homotopy(start, target, rng);
    EXPECT_NEAR(std::abs(h.gamma()), 1.0, 1e-12);
    for (int k = 0; k < 5; ++k) {
      CVec x = rng.unit_complex_vector(3);
      const CVec u = h.value(x, 0.0), v = target.evaluate(x);
      for (Index i = 0; i < 3; ++i) EXPECT_EQ(u[i], v[i]);
    }
  }
}

TEST(Slice, ThroughPointContainsIt) {
  Rng rng(3);
  const CVec p = vec({1, 1, -1});
  const LinearSlice s = random_slice(3, 2, p, rng);
  EXPECT_LT(s.evaluate(p).norm(), 1e-14);
  EXPECT_EQ(s.codim(), 2u);
  for (Index j = 0; j < s.A.size(); ++j) EXPECT_NEAR(std::abs(s.A.data()[j]), 1.0, 1e-14);
}

TEST(Slice, DeterministicUnderSeed) {
  Rng a(42), b(42);
  const LinearSlice s1 = random_slice(4, 2, vec({0, 1, 0, 0}), a);
  const LinearSlice s2 = random_slice(4, 2, vec({0, 1, 0, 0}), b);
  EXPECT_EQ(s1.A, s2.A);
  EXPECT_EQ(s1.b, s2.b);
  EXPECT_EQ(s1.seed, s2.seed);
}

TEST(Slice, CodimZeroIsEmpty) {
  Rng rng(1);
  EXPECT_EQ(random_slice(3, 0, std::nullopt, rng).codim(), 0u);
}

TEST(Rng, UnitCircleAndChildStreams) {
  Rng r(5);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(std::abs(r.unit_complex()), 1.0, 1e-14);
  Rng a(9), b(9);
  a.next_u64();
  EXPECT_EQ(a.child(3).next_u64(), b.child(3).next_u64());
}
