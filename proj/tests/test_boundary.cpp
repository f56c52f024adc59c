#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "joinrank/boundary.hpp"

using namespace joinrank;

namespace {

// The line P1 + 3P4 = 2, P2 - 4P4 = -3, P3 - 2P4 = 4 in the binary cubics (tensor coordinates).
LinearSlice cubic_line() {
  LinearSlice C;
  C.A = CMat::Zero(3, 4);
  C.b = CVec(3);
  C.A(0, 0) = 1.0, C.A(0, 3) = 3.0, C.b[0] = 2.0;
  C.A(1, 1) = 1.0, C.A(1, 3) = -4.0, C.b[1] = -3.0;
  C.A(2, 2) = 1.0, C.A(2, 3) = -2.0, C.b[2] = 4.0;
  return C;
}

CVec line_point(Complex s) {
  CVec p(4);
  p << 2.0 - 3.0 * s, -3.0 + 4.0 * s, 4.0 + 2.0 * s, s;
  return p;
}

// discriminant of a x^3 + 3b x^2y + 3c xy^2 + d y^3
Complex discriminant(const CVec& p) {
  const Complex a = p[0], b = p[1], c = p[2], d = p[3];
  return a * a * d * d - 6.0 * a * b * c * d + 4.0 * a * c * c * c + 4.0 * b * b * b * d - 3.0 * b * b * c * c;
}

// Coefficients of the discriminant along the line, by interpolation at 6 nodes (degree at most 4 expected).
Eigen::VectorXd discriminant_on_line() {
  Eigen::MatrixXd V(6, 6);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    const double s = i - 2.5;
    for (int j = 0; j < 6; ++j) V(i, j) = std::pow(s, j);
    y[i] = discriminant(line_point(s)).real();
  }
  return V.fullPivLu().solve(y);
}

}  // namespace

TEST(Homogenize, LiftsEachEquationToItsFiberDegree) {
  // x0 * x1^2 - x1 + 3 in fiber {1}: x0 x1^2 - x1 y + 3 y^2
  const PolynomialSystem f(2, {Polynomial(2, {{1.0, {1, 2}}, {-1.0, {0, 1}}, {3.0, {0, 0}}})});
  const PolynomialSystem g = detail::homogenize_in(f, {1});
  ASSERT_EQ(g.num_vars(), 3u);
  CVec x(3);
  x << Complex(0.3, 0.1), Complex(-1.2, 0.5), Complex(0.7, -0.4);
  const Complex want = x[0] * x[1] * x[1] - x[1] * x[2] + 3.0 * x[2] * x[2];
  EXPECT_LT(std::abs(g.evaluate(x)[0] - want), 1e-14);
}

TEST(Boundary, DiscriminantRestrictsToAQuartic) {
  const Eigen::VectorXd c = discriminant_on_line();
  EXPECT_LT(std::abs(c[5]), 1e-8);
  EXPECT_GT(std::abs(c[4]), 1e-3);
}

// The secant variety of the twisted cubic fills P^3; rank-3 cubics along the line are the points where
// the discriminant vanishes.
TEST(Boundary, SecantOfTwistedCubicOnALine) {
  Rng rng(71);
  const AbstractJoin J = build_abstract_join({veronese(1, 3, false), veronese(1, 3, false)}, JoinMode::AffineCone, rng);
  const PseudoWitnessSet pw = pseudowitness_set(J, rng);
  ASSERT_EQ(pw.image_dim, 4u);
  BoundaryReport rep = boundary_candidates(pw, cubic_line(), rng);

  const Eigen::VectorXd c = discriminant_on_line();
  Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 3; ++i) C(i + 1, i) = 1.0;
  for (int i = 0; i < 4; ++i) C(i, 3) = -c[i] / c[4];
  const Eigen::Vector4cd roots = C.eigenvalues();

  ASSERT_EQ(rep.candidates.size(), 4u);
  for (Index i = 0; i < 4; ++i) {
    const CVec want = line_point(roots[i]);
    bool hit = false;
    for (const auto& cand : rep.candidates) hit = hit || relative_distance(cand.point, want) < 1e-6;
    EXPECT_TRUE(hit) << want.transpose();
  }
  // nearest printed values
  bool saw = false;
  for (const auto& cand : rep.candidates)
    saw = saw || (cand.point - line_point(-0.775852)).norm() < 1e-3;
  EXPECT_TRUE(saw);

  for (auto& cand : rep.candidates) EXPECT_TRUE(boundary_confirm(J, cand, rng)) << cand.evidence;
}

TEST(Boundary, HyperbolaProjectsOntoPuncturedLine) {
  Rng rng(72);
  Incidence inc;
  inc.system = PolynomialSystem(2, {Polynomial(2, {{1.0, {1, 1}}, {-1.0, {0, 0}}})});
  inc.image_coords = {0};
  inc.dim = 1;
  const PseudoWitnessSet pw = pseudowitness_set(inc, 1, rng);
  LinearSlice none;
  none.A = CMat::Zero(0, 1);
  none.b = CVec(0);
  const BoundaryReport rep = boundary_candidates(pw, none, rng);
  ASSERT_EQ(rep.candidates.size(), 1u);
  EXPECT_LT(std::abs(rep.candidates[0].point[0]), 1e-6);
}

TEST(Boundary, RejectsWrongCodimension) {
  Rng rng(73);
  const AbstractJoin J = build_abstract_join({veronese(1, 3, false), veronese(1, 3, false)}, JoinMode::AffineCone, rng);
  const PseudoWitnessSet pw = pseudowitness_set(J, rng);
  LinearSlice two = cubic_line();
  two.A.conservativeResize(2, 4);
  two.b.conservativeResize(2);
  EXPECT_THROW(boundary_candidates(pw, two, rng), Error);
}
