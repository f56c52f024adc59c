#include <gtest/gtest.h>

#include "joinrank/realness.hpp"

using namespace joinrank;

namespace {

Term mono(double c, std::vector<int> e) { return Term{c, Exponents(e.begin(), e.end())}; }

PolynomialSystem unit_circle() { return PolynomialSystem(2, {Polynomial(2, {mono(1, {2, 0}), mono(1, {0, 2}), mono(-1, {0, 0})})}); }

// x(1+s^2) - 2s, y(1+s^2) - (1-s^2) in (x, y, s)
PolynomialSystem rational_circle() {
  return PolynomialSystem(3, {Polynomial(3, {mono(1, {1, 0, 0}), mono(1, {1, 0, 2}), mono(-2, {0, 0, 1})}),
                              Polynomial(3, {mono(1, {0, 1, 0}), mono(1, {0, 1, 2}), mono(-1, {0, 0, 0}), mono(1, {0, 0, 2})})});
}

// rank-3 decompositions of x^2 y in (a1, a2, b1, b2, c1, c2)
PolynomialSystem x2y_fiber() {
  return PolynomialSystem(6, {Polynomial(6, {mono(1, {3, 0, 0, 0, 0, 0}), mono(1, {0, 0, 3, 0, 0, 0}), mono(1, {0, 0, 0, 0, 3, 0})}),
                              Polynomial(6, {mono(3, {2, 1, 0, 0, 0, 0}), mono(3, {0, 0, 2, 1, 0, 0}), mono(3, {0, 0, 0, 0, 2, 1}),
                                             mono(-1, {0, 0, 0, 0, 0, 0})}),
                              Polynomial(6, {mono(3, {1, 2, 0, 0, 0, 0}), mono(3, {0, 0, 1, 2, 0, 0}), mono(3, {0, 0, 0, 0, 1, 2})}),
                              Polynomial(6, {mono(1, {0, 3, 0, 0, 0, 0}), mono(1, {0, 0, 0, 3, 0, 0}), mono(1, {0, 0, 0, 0, 0, 3})})});
}

// Rank-2 decompositions of complex multiplication: X (Y_s . (a,b)) (Z_s . (c,d)) in
// (x11 x12 x21 x22, y11 y12 y21 y22, z11 z12 z21 z22).
PolynomialSystem complex_multiplication() {
  const double T[2][2][2] = {{{1, 0}, {0, -1}}, {{0, 1}, {1, 0}}};
  std::vector<Polynomial> eq;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        std::vector<Term> ts;
        for (int s = 0; s < 2; ++s) {
          Exponents e(12, 0);
          e[static_cast<std::size_t>(2 * k + s)] = 1;
          e[static_cast<std::size_t>(4 + 2 * s + i)] = 1;
          e[static_cast<std::size_t>(8 + 2 * s + j)] = 1;
          ts.push_back({1.0, e});
        }
        ts.push_back({-T[k][i][j], Exponents(12, 0)});
        eq.emplace_back(12, ts);
      }
  return PolynomialSystem(12, eq);
}

CVec cvec(std::initializer_list<Complex> v) {
  CVec x(static_cast<Index>(v.size()));
  Index i = 0;
  for (auto c : v) x[i++] = c;
  return x;
}

double stationarity(const PolynomialSystem& F, const CriticalPointSet& cs, const CriticalPoint& p) {
  const CMat J = F.jacobian(p.x);
  CVec g = p.lambda[0] * (p.x - cs.center);
  g += J.transpose() * p.lambda.tail(p.lambda.size() - 1);
  return g.norm();
}

}  // namespace

TEST(CriticalSystem, ShapeAndPreconditions) {
  Rng rng(81);
  const PolynomialSystem F = x2y_fiber();
  const PolynomialSystem G = build_critical_system(F, cvec({1, 2, -2, 1, 1, -1}), rng);
  EXPECT_EQ(G.size(), 4u + 6u + 1u);
  EXPECT_EQ(G.num_vars(), 6u + 5u);
  EXPECT_THROW(build_critical_system(unit_circle(), cvec({0, -1}), rng), Error);
  const PolynomialSystem complex_coeff(1, {Polynomial(1, {Term{Complex(0, 1), {1}}, Term{1.0, {0}}})});
  EXPECT_THROW(build_critical_system(complex_coeff, cvec({3}), rng), Error);
}

TEST(CriticalSystem, PointVarietyHasOneCriticalPoint) {
  Rng rng(82);
  const PolynomialSystem F(1, {Polynomial(1, {mono(1, {1})})});
  CriticalOptions co;
  co.method = CriticalMethod::TotalDegree;
  const CriticalPointSet cs = solve_critical(F, cvec({1}), rng, co);
  ASSERT_EQ(cs.points.size(), 1u);
  EXPECT_LT(std::abs(cs.points[0].x[0]), 1e-12);
  EXPECT_EQ(cs.points[0].flag, RealFlag::Real);
}

// Oracle: the critical points of the distance from q to the unit circle are +-q/|q|.
TEST(CriticalSystem, CircleMatchesClosedForm) {
  Rng rng(83);
  const CVec q = cvec({0.3, -2.0});
  const CriticalPointSet cs = solve_critical(unit_circle(), q, rng);
  ASSERT_EQ(cs.points.size(), 2u);
  EXPECT_EQ(cs.real_count(), 2u);
  const CVec u = q / q.norm();
  ASSERT_NE(cs.nearest_real(), nullptr);
  EXPECT_LT((cs.nearest_real()->x - u).norm(), 1e-10);
  EXPECT_LT((cs.points[1].x + u).norm(), 1e-10);
  for (const auto& p : cs.points) EXPECT_LT(stationarity(unit_circle(), cs, p), 1e-8);
}

// Only the (x, y) coordinates enter the distance; the puncture (0, -1) has no point upstairs.
TEST(ParameterHomotopy, PuncturedCircleProjectsToBothCriticalPoints) {
  Rng rng(84);
  CriticalOptions co;
  co.distance_coords = {0, 1};
  co.method = CriticalMethod::TotalDegree;
  const CriticalPointSet generic = solve_critical(rational_circle(), cvec({Complex(0.3, 0.7), Complex(-0.4, 0.2), 0.0}), rng, co);
  ASSERT_EQ(generic.points.size(), 2u);
  const CriticalPointSet at = parameter_homotopy_center(rational_circle(), generic, cvec({0, -2, 0}), co);
  EXPECT_EQ(at.points.size(), 1u);
  ASSERT_EQ(at.projected_limits.size(), 2u);
  const std::vector<CVec> want{cvec({0, 1}), cvec({0, -1})};
  EXPECT_TRUE(same_point_set(at.projected_limits, want, 1e-3));
}

TEST(ParameterHomotopy, SameCenterIsIdentity) {
  Rng rng(85);
  CriticalOptions co;
  co.method = CriticalMethod::TotalDegree;
  const CVec q = cvec({Complex(0.3, 0.2), Complex(-1.1, 0.4)});
  const CriticalPointSet cs = solve_critical(unit_circle(), q, rng, co);
  const CriticalPointSet again = parameter_homotopy_center(unit_circle(), cs, q, co);
  std::vector<CVec> a, b;
  for (const auto& p : cs.points) a.push_back(p.x);
  for (const auto& p : again.points) b.push_back(p.x);
  EXPECT_TRUE(same_point_set(a, b, 1e-10));
}

TEST(GradientDescent, NearestPointOnCircle) {
  const GradientDescentResult r = gradient_descent_homotopy(unit_circle(), Eigen::Vector2d(0, -2));
  ASSERT_TRUE(r.point.has_value()) << r.diagnostic;
  EXPECT_LT((r.point->x - cvec({0, -1})).norm(), 1e-10);
  EXPECT_EQ(r.point->flag, RealFlag::Real);
}

TEST(GradientDescent, LinearVariety) {
  const PolynomialSystem F(1, {Polynomial(1, {mono(1, {1}), mono(-5, {0})})});
  const GradientDescentResult r = gradient_descent_homotopy(F, Eigen::VectorXd::Zero(1));
  ASSERT_TRUE(r.point.has_value());
  EXPECT_LT(std::abs(r.point->x[0] - 5.0), 1e-12);
}

// The single real path from the centers alpha, beta, gamma ends at a real rank-3 decomposition of x^2y.
TEST(GradientDescent, RealDecompositionOfX2y) {
  Eigen::VectorXd c(6);
  c << 1, 2, -2, 1, 1, -1;
  const GradientDescentResult r = gradient_descent_homotopy(x2y_fiber(), c);
  ASSERT_TRUE(r.point.has_value()) << r.diagnostic;
  EXPECT_EQ(r.point->flag, RealFlag::Real);
  const Eigen::VectorXd x = r.point->x.real();
  const double want[6] = {0.721, 0.2849, -1.429, 1.101, 1.365, -1.107};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(x[i], want[i], 1e-3);
  EXPECT_LT(x2y_fiber().residual(r.point->x), 1e-10);
}

TEST(Monodromy, ComplexMultiplicationHasNoRealRankTwoDecomposition) {
  Rng rng(86);
  const PolynomialSystem F = complex_multiplication();
  const Complex I(0, 1);
  // (a - ib)(c - id) and (b - ia)(d - ic)
  const CVec s = cvec({0.5, -0.5, I / 2.0, I / 2.0, 1.0, -I, -I, 1.0, 1.0, -I, -I, 1.0});
  ASSERT_LT(F.residual(s), 1e-14);
  CriticalOptions co;
  co.method = CriticalMethod::Monodromy;
  const CVec center = rng.real_vector(12).cast<Complex>();
  const CriticalPointSet cs = solve_critical(F, center, rng, co, {s, CVec(s.conjugate())});
  EXPECT_EQ(cs.points.size(), 18u);
  EXPECT_EQ(cs.real_count(), 0u);
  EXPECT_EQ(cs.count(RealFlag::Borderline), 0u);
  EXPECT_EQ((cs.points.size() - cs.real_count()) % 2, 0u);
  for (const auto& p : cs.points) EXPECT_LT(stationarity(F, cs, p), 1e-8);
}

TEST(Monodromy, RequiresSeedsOnTheVariety) {
  Rng rng(87);
  CriticalOptions co;
  co.method = CriticalMethod::Monodromy;
  EXPECT_THROW(solve_critical(unit_circle(), cvec({0, -2}), rng, co), Error);
  EXPECT_THROW(solve_critical(unit_circle(), cvec({0, -2}), rng, co, {cvec({0.5, 0.5})}), Error);
}
