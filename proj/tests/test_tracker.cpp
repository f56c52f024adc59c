#include <gtest/gtest.h>

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

LinearSlice slice_row(std::initializer_list<Complex> a, Complex b) {
  LinearSlice s;
  s.A = vec(a).transpose();
  s.b = vec({b});
  return s;
}

}  // namespace

TEST(NewtonRefine, SquareRootOfTwo) {
  const PolynomialSystem f(1, {Polynomial(1, {{1.0, {2}}, {-2.0, {0}}})});
  const RefineResult r = newton_refine(f, vec({1.4}));
  EXPECT_FALSE(r.singular);
  EXPECT_NEAR(r.point[0].real(), std::sqrt(2.0), 1e-14);
  EXPECT_LT(r.residual, 1e-12);
}

TEST(NewtonRefine, ExactRootUnchanged) {
  const PolynomialSystem f(1, {Polynomial(1, {{1.0, {2}}, {-4.0, {0}}})});
  const RefineResult r = newton_refine(f, vec({2.0}));
  EXPECT_EQ(r.point[0], Complex(2.0));
  EXPECT_EQ(r.residual, 0.0);
}

TEST(NewtonRefine, DoubleRootFlagsSingular) {
  const PolynomialSystem f(1, {Polynomial(1, {{1.0, {2}}})});
  const RefineResult r = newton_refine(f, vec({0.1}));
  EXPECT_TRUE(r.singular);
  EXPECT_EQ(r.point[0], Complex(0.1));
}

TEST(Track, ConstantHomotopyIsStationary) {
  const PolynomialSystem f(2, {Polynomial(2, {{1.0, {2, 0}}, {1.0, {0, 1}}, {-2.0, {0, 0}}}),
                               Polynomial(2, {{1.0, {1, 0}}, {-1.0, {0, 1}}})});
  const Homotopy h = make_segment_homotopy(f, f, Complex(1.0));
  const PathResult p = track(h, vec({1, 1}));
  EXPECT_EQ(p.status, PathStatus::Converged);
  EXPECT_LT((p.endpoint - vec({1, 1})).norm(), 1e-10);
}

TEST(Track, BadStartIsPreconditionError) {
  const PolynomialSystem f(1, {Polynomial(1, {{1.0, {2}}, {-1.0, {0}}})});
  const Homotopy h = make_segment_homotopy(f, f, Complex(1.0));
  try {
    track(h, vec({3.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
  }
}

TEST(Track, LinearBlowupDiverges) {
  // H = t*(x - 1) + (1-t)*(-1) = t*x - 1, so x(t) = 1/t
  const PolynomialSystem s(1, {Polynomial(1, {{1.0, {1}}, {-1.0, {0}}})});
  const PolynomialSystem g(1, {Polynomial(1, {{-1.0, {0}}})});
  const PathResult p = track(Homotopy::between(s, g), vec({1.0}));
  EXPECT_EQ(p.status, PathStatus::Diverged);
}

TEST(Track, ExampleSliceMoveTwoConvergeOneDiverges) {
  Rng rng(2024);
  const auto f = twisted_cubic();
  const LinearSlice L = slice_row({2, -3, -5}, -1.0);  // 2x1 - 3x2 - 5x3 + 1 = 0
  const LinearSlice M = slice_row({2, -3, 0}, -1.0);   // 2x1 - 3x2 + 1 = 0
  const SolutionSet W = total_degree_solve_report(f | L.as_system(), rng).solutions;
  ASSERT_EQ(W.size(), 3u);
  const auto paths = move_slice(f, L, W, M, rng);
  int conv = 0, div = 0;
  std::vector<CVec> ends;
  for (const auto& p : paths) {
    if (p.status == PathStatus::Converged) {
      ++conv;
      ends.push_back(p.endpoint);
    }
    if (p.status == PathStatus::Diverged) ++div;
  }
  EXPECT_EQ(conv, 2);
  EXPECT_EQ(div, 1);
  EXPECT_TRUE(same_point_set(ends, {vec({1, 1, -1}), vec({-1.0 / 3, 1.0 / 9, 1.0 / 27})}));
}

TEST(Track, Determinism) {
  Rng a(77), b(77);
  const auto f = twisted_cubic();
  const LinearSlice L = slice_row({2, -3, -5}, -1.0);
  const auto ra = total_degree_solve_report(f | L.as_system(), a);
  const auto rb = total_degree_solve_report(f | L.as_system(), b);
  ASSERT_EQ(ra.paths.size(), rb.paths.size());
  for (std::size_t i = 0; i < ra.paths.size(); ++i) {
    EXPECT_EQ(ra.paths[i].status, rb.paths[i].status);
    EXPECT_EQ(ra.paths[i].endpoint, rb.paths[i].endpoint);
    EXPECT_EQ(ra.paths[i].steps_taken, rb.paths[i].steps_taken);
  }
}
