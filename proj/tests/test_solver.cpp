#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "joinrank/solver.hpp"

using namespace joinrank;

namespace {

CVec vec(std::initializer_list<Complex> v) {
  CVec x(static_cast<Index>(v.size()));
  Index i = 0;
  for (auto c : v) x[i++] = c;
  return x;
}

PolynomialSystem twisted_cubic() {
  return PolynomialSystem(3, {Polynomial(3, {{1.0, {2, 0, 0}}, {-1.0, {0, 1, 0}}}),
                              Polynomial(3, {{1.0, {3, 0, 0}}, {1.0, {0, 0, 1}}})});
}

LinearSlice row(std::initializer_list<Complex> a, Complex b) {
  LinearSlice s;
  s.A = vec(a).transpose();
  s.b = vec({b});
  return s;
}

bool contains(const SolutionSet& s, const CVec& x, double tol) {
  for (const auto& p : s.points)
    if ((p - x).norm() < tol) return true;
  return false;
}

}  // namespace

TEST(TotalDegree, UnivariateQuadratic) {
  Rng rng(1);
  const PolynomialSystem f(1, {Polynomial(1, {{1.0, {2}}, {-1.0, {0}}})});
  const SolutionSet s = total_degree_solve(f, rng);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_TRUE(contains(s, vec({1.0}), 1e-10));
  EXPECT_TRUE(contains(s, vec({-1.0}), 1e-10));
}

TEST(TotalDegree, ParabolaMeetsLine) {
  Rng rng(2);
  const PolynomialSystem f(2, {Polynomial(2, {{1.0, {2, 0}}, {-1.0, {0, 1}}}), Polynomial(2, {{1.0, {0, 1}}, {-1.0, {0, 0}}})});
  const SolutionSet s = total_degree_solve(f, rng);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_TRUE(contains(s, vec({1.0, 1.0}), 1e-10));
  EXPECT_TRUE(contains(s, vec({-1.0, 1.0}), 1e-10));
}

// Hyperplane section of the twisted cubic; oracle: roots of 5t^3 - 3t^2 + 2t + 1 via a companion matrix.
TEST(TotalDegree, TwistedCubicSectionMatchesCompanionRoots) {
  Rng rng(3);
  const PolynomialSystem f = twisted_cubic() | row({2.0, -3.0, -5.0}, -1.0).as_system();
  const SolutionSet s = total_degree_solve(f, rng);
  ASSERT_EQ(s.size(), 3u);
  Eigen::Matrix3d C;
  C << 0, 0, -1.0 / 5, 1, 0, -2.0 / 5, 0, 1, 3.0 / 5;
  const Eigen::Vector3cd roots = C.eigenvalues();
  for (Index i = 0; i < 3; ++i) {
    const Complex t = roots[i];
    EXPECT_TRUE(contains(s, vec({t, t * t, -t * t * t}), 1e-8));
  }
  EXPECT_TRUE(contains(s, vec({-0.299, 0.089, 0.027}), 2e-3));
}

TEST(TotalDegree, OverdeterminedRequiresReport) {
  Rng rng(4);
  const PolynomialSystem f(1, {Polynomial(1, {{1.0, {2}}, {-1.0, {0}}}), Polynomial(1, {{1.0, {1}}, {-1.0, {0}}})});
  EXPECT_THROW(total_degree_solve(f, rng), Error);
  const SolveReport r = total_degree_solve_report(f, rng);
  ASSERT_EQ(r.solutions.size(), 1u);
  EXPECT_NEAR(std::abs(r.solutions.points[0][0] - 1.0), 0.0, 1e-10);
}

// Eigenpairs of a 2x2 matrix with a linear patch: the two-group Bezout count is 2 against a total degree of 4.
TEST(Multihomogeneous, EigenproblemUsesFewerPaths) {
  Rng rng(5);
  // vars v1, v2, l
  const PolynomialSystem f(3, {Polynomial(3, {{2.0, {1, 0, 0}}, {-1.0, {1, 0, 1}}, {1.0, {0, 1, 0}}}),
                               Polynomial(3, {{1.0, {1, 0, 0}}, {3.0, {0, 1, 0}}, {-1.0, {0, 1, 1}}}),
                               Polynomial(3, {{0.3, {1, 0, 0}}, {0.7, {0, 1, 0}}, {-1.0, {0, 0, 0}}})});
  const SolveReport r = multihomogeneous_solve_report(f, {{0, 1}, {2}}, rng);
  EXPECT_EQ(r.start_count, 2u);
  ASSERT_EQ(r.solutions.size(), 2u);
  Eigen::Matrix2d A;
  A << 2, 1, 1, 3;
  const Eigen::Vector2cd ev = A.eigenvalues();
  for (Index i = 0; i < 2; ++i) {
    bool hit = false;
    for (const auto& p : r.solutions.points) hit = hit || std::abs(p[2] - ev[i]) < 1e-9;
    EXPECT_TRUE(hit);
  }
}

TEST(MoveSlice, RoundTripRecoversWitnessSet) {
  Rng rng(6);
  const PolynomialSystem f = twisted_cubic();
  const LinearSlice a = random_slice(3, 1, std::nullopt, rng);
  const SolutionSet w = total_degree_solve_report(f | a.as_system(), rng).solutions;
  ASSERT_EQ(w.size(), 3u);
  const LinearSlice b = random_slice(3, 1, std::nullopt, rng);
  const auto there = move_slice(f, a, w.points, b, rng.unit_complex());
  std::vector<CVec> mid;
  for (const auto& p : there) {
    ASSERT_EQ(p.status, PathStatus::Converged);
    mid.push_back(p.endpoint);
  }
  const auto back = move_slice(f, b, mid, a, rng.unit_complex());
  std::vector<CVec> ends;
  for (const auto& p : back) ends.push_back(p.endpoint);
  EXPECT_TRUE(same_point_set(ends, w.points, 1e-8));
}

TEST(TraceTest, CompleteSetPassesAndSubsetFails) {
  Rng rng(7);
  const PolynomialSystem f = twisted_cubic();
  const LinearSlice a = random_slice(3, 1, std::nullopt, rng);
  const SolutionSet w = total_degree_solve_report(f | a.as_system(), rng).solutions;
  ASSERT_EQ(w.size(), 3u);
  EXPECT_TRUE(trace_test(f, a, w.points, rng).passed);
  const std::vector<CVec> two(w.points.begin(), w.points.begin() + 2);
  const TraceResult t = trace_test(f, a, two, rng);
  EXPECT_FALSE(t.passed);
  EXPECT_GT(t.second_difference, 1e-4);
}

TEST(Monodromy, TwistedCubicFromOneSeed) {
  Rng rng(8);
  const PolynomialSystem f = twisted_cubic();
  const CVec x0 = vec({Complex(0.4, 0.3), Complex(0.4, 0.3) * Complex(0.4, 0.3), -std::pow(Complex(0.4, 0.3), 3)});
  const LinearSlice s = random_slice(3, 1, x0, rng);
  SolutionSet seeds;
  seeds.insert(x0, 0.0);
  const SolutionSet got = monodromy_populate(f, s, seeds, rng, 5);
  EXPECT_EQ(got.size(), 3u);
  EXPECT_TRUE(trace_test(f, s, got.points, rng).passed);
}

TEST(Monodromy, LinearSpaceHasDegreeOne) {
  Rng rng(9);
  const PolynomialSystem f(3, {Polynomial(3, {{1.0, {1, 0, 0}}, {-2.0, {0, 1, 0}}, {1.0, {0, 0, 1}}})});
  const CVec x0 = vec({1.0, 1.0, 1.0});
  const LinearSlice s = random_slice(3, 2, x0, rng);
  SolutionSet seeds;
  seeds.insert(x0, 0.0);
  MonodromyStats stats;
  const SolutionSet got = monodromy_populate(f, s, seeds, rng, 3, {}, {}, &stats);
  EXPECT_EQ(got.size(), 1u);
  EXPECT_GE(stats.loops, 3u);
}

TEST(Monodromy, EmptySeedsRejected) {
  Rng rng(10);
  const PolynomialSystem f = twisted_cubic();
  const LinearSlice s = random_slice(3, 1, std::nullopt, rng);
  EXPECT_THROW(monodromy_populate(f, s, SolutionSet{}, rng), Error);
}

TEST(Solve, DeterministicUnderSeed) {
  const PolynomialSystem f = twisted_cubic() | row({2.0, -3.0, -5.0}, -1.0).as_system();
  Rng r1(11), r2(11);
  const SolutionSet a = total_degree_solve(f, r1), b = total_degree_solve(f, r2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.points[i], b.points[i]);
}
