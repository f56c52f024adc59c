#include <gtest/gtest.h>

#include "joinrank/generic.hpp"

using namespace joinrank;

namespace {

using Mono = std::pair<Complex, std::vector<int>>;

// Coordinates of a form on the monomial basis used by coefficients_in_x.
CVec form(std::size_t nx, int deg, const std::vector<Mono>& ts) {
  const auto mons = monomials(nx, deg);
  CVec c = CVec::Zero(static_cast<Index>(mons.size()));
  for (const auto& [v, e] : ts) {
    bool hit = false;
    for (std::size_t j = 0; j < mons.size(); ++j)
      if (mons[j] == Exponents(e.begin(), e.end())) c[static_cast<Index>(j)] += v, hit = true;
    if (!hit) throw std::logic_error("monomial of the wrong degree");
  }
  return c;
}

CVec cvec(std::initializer_list<Complex> v) {
  CVec x(static_cast<Index>(v.size()));
  Index i = 0;
  for (auto c : v) x[i++] = c;
  return x;
}

// Q * (x0 + a11 x1 + a12 x2) + (x0 + a21 x1 + a22 x2)^3 on plane cubics.
AbstractJoin osculating_join(Rng& rng) {
  const std::size_t nv = 11;
  const auto qm = monomials(3, 2);
  Polynomial Q(nv);
  for (std::size_t j = 0; j < 6; ++j) {
    Exponents e(nv, 0);
    e[j] = 1;
    for (std::size_t v = 0; v < 3; ++v) e[8 + v] = qm[j][v];
    Q = Q + Polynomial(nv, {Term{1.0, e}});
  }
  auto V = [&](std::size_t i) { return Polynomial::variable(nv, i); };
  const Polynomial L1 = V(8) + V(6) * V(9) + V(7) * V(10);
  auto W = [](std::size_t i) { return Polynomial::variable(5, i); };
  const Polynomial L2 = W(2) + W(0) * W(3) + W(1) * W(4);
  return build_abstract_join({custom(coefficients_in_x(Q * L1, 8, 3, 3), "quadric_times_linear"),
                              custom(coefficients_in_x(L2.pow(3), 2, 3, 3), "monic_linear_cube")},
                             JoinMode::AffineCone, rng);
}

// start decomposition over C*: Q = x0^2 + (1+i) x0x1 + 3 x0x2 - 2 x1^2 + (3-i) x1x2 + 2 x2^2
std::vector<CVec> osculating_start() {
  const Complex I(0, 1);
  return {cvec({1.0, 1.0 + I, 3.0, -2.0, 3.0 - I, 2.0, 2.0, 3.0}), cvec({-(3.0 + I), 5.0})};
}

CVec quintic() {
  return form(3, 5, {{17051, {5, 0, 0}},    {41500, {4, 1, 0}},   {720, {3, 2, 0}},      {11360, {2, 3, 0}},   {95010, {1, 4, 0}},
                     {19345, {0, 5, 0}},    {-18095, {4, 0, 1}},  {-281420, {3, 1, 1}},  {427290, {2, 2, 1}},  {-367940, {1, 3, 1}},
                     {73860, {0, 4, 1}},    {243470, {3, 0, 2}},  {-533370, {2, 1, 2}},  {518670, {1, 2, 2}},  {-273140, {0, 3, 2}},
                     {156350, {2, 0, 3}},   {-323300, {1, 1, 3}}, {383760, {0, 2, 3}},   {80245, {1, 0, 4}},   {-277060, {0, 1, 4}},
                     {84411, {0, 0, 5}}});
}

std::vector<CVec> blocks(const std::vector<std::array<double, 3>>& b) {
  std::vector<CVec> out;
  for (const auto& [l, a1, a2] : b) out.push_back(cvec({l, a1, a2}));
  return out;
}

std::vector<CVec> quintic_known_decomposition() {
  return blocks({{243, 8. / 3, -2. / 3}, {-32768, -3. / 4, 1. / 8}, {16807, -1, 1}, {-32, 2, -4}, {32768, 0, -0.5}, {32, -1.5, 2.5}, {1, -5, 8}});
}

std::vector<CVec> septic_constructed() {
  return blocks({{91, -3.5, 4.5}, {58, -1.5, -4. / 3}, {-21, 2, -4.5}, {33, 3, -1}, {54, -3, -5. / 3}, {88, -3, -10. / 3},
                 {-37, -5, 1}, {93, -1, -8}, {12, 4.5, 10}, {-89, -5, -0.5}, {-99, -1, -3}, {-22, -1. / 3, 4}});
}

// x(1 + s^2) = 2s, y(1 + s^2) = 1 - s^2 in (x, y, s)
Incidence rational_circle() {
  auto m = [](double c, std::vector<int> e) { return Term{c, Exponents(e.begin(), e.end())}; };
  Incidence inc;
  inc.system = PolynomialSystem(3, {Polynomial(3, {m(1, {1, 0, 0}), m(1, {1, 0, 2}), m(-2, {0, 0, 1})}),
                                    Polynomial(3, {m(1, {0, 1, 0}), m(1, {0, 1, 2}), m(-1, {0, 0, 0}), m(1, {0, 0, 2})})});
  inc.image_coords = {0, 1};
  inc.dim = 1;
  return inc;
}

std::vector<CVec> keys(const AbstractJoin& J, const std::vector<Decomposition>& ds) {
  const KeyFn key = detail::permutation_key(J);
  std::vector<CVec> out;
  for (const auto& d : ds) out.push_back(key(detail::flatten(d.parameters)));
  return out;
}

}  // namespace

TEST(Scaling, WeightedFitIsInvertedExactly) {
  Rng rng(90);
  const AbstractJoin J = build_abstract_join(std::vector<Parameterization>(7, scaled_linear_power(2, 5)), JoinMode::AffineCone, rng);
  const CVec T = quintic();
  const detail::JoinScaling sc = detail::join_scaling(J, T);
  const auto known = quintic_known_decomposition();
  // phi(scale(a)) = scale_point(phi(a)) for every factor
  EXPECT_LT(relative_distance(J.reconstruct(sc.scale(known)), sc.scale_point(T)), 1e-13);
  EXPECT_LT(sc.scale_point(T).cwiseAbs().maxCoeff() / sc.scale_point(T).cwiseAbs().minCoeff(),
            T.cwiseAbs().maxCoeff() / T.cwiseAbs().minCoeff());
}

TEST(DecomposeGeneric, FermatCubicGivesTheDisplayedForm) {
  Rng rng(91);
  const AbstractJoin J = osculating_join(rng);
  const CVec C1 = form(3, 3, {{1, {3, 0, 0}}, {1, {0, 3, 0}}, {1, {0, 0, 3}}});
  const DecomposeResult r = decompose_generic(J, C1, rng, {}, osculating_start());
  ASSERT_EQ(r.outcome, DecomposeOutcome::Success) << r.diagnostic;
  EXPECT_LT(r.decomposition->reconstruction_residual, 1e-8);
  const Complex w = (1.0 - std::sqrt(Complex(-3.0))) / 2.0;
  EXPECT_LT((r.decomposition->parameters[1] - cvec({1.0, -w})).norm(), 1e-8);
  // Q = -3 x0x1 + 3w x0x2 - 3 x1^2 + 3w x1x2, L1 = x0 - w x2
  EXPECT_LT((r.decomposition->parameters[0] - cvec({0.0, -3.0, 3.0 * w, -3.0, 3.0 * w, 0.0, 0.0, -w})).norm(), 1e-8);
  EXPECT_EQ(r.decomposition->provenance, SeedProvenance::UserSeed);
}

TEST(DecomposeGeneric, WitchOfAgnesiGivesTheDisplayedForm) {
  Rng rng(92);
  const AbstractJoin J = osculating_join(rng);
  const CVec C2 = form(3, 3, {{4, {2, 0, 1}}, {1, {0, 2, 1}}, {-8, {3, 0, 0}}});
  const DecomposeResult r = decompose_generic(J, C2, rng, {}, osculating_start());
  ASSERT_EQ(r.outcome, DecomposeOutcome::Success) << r.diagnostic;
  EXPECT_LT(r.decomposition->reconstruction_residual, 1e-8);
  const double s3 = std::sqrt(3.0);
  EXPECT_LT((r.decomposition->parameters[0] - cvec({-9.0, 0.0, 0.0, -2.25, 0.0, 0.0, -s3 / 6.0, -4.0 / 9.0})).norm(), 1e-8);
  EXPECT_LT((r.decomposition->parameters[1] - cvec({-s3 / 2.0, 0.0})).norm(), 1e-8);
}

TEST(DecomposeGeneric, RandomStartsAlsoDecompose) {
  Rng rng(93);
  const AbstractJoin J = osculating_join(rng);
  const CVec C1 = form(3, 3, {{1, {3, 0, 0}}, {1, {0, 3, 0}}, {1, {0, 0, 3}}});
  const DecomposeResult r = decompose_generic(J, C1, rng);
  ASSERT_EQ(r.outcome, DecomposeOutcome::Success) << r.diagnostic;
  EXPECT_LT(r.decomposition->reconstruction_residual, 1e-8);
  EXPECT_LE(r.attempts, 3u);
}

TEST(DecomposeGeneric, TernaryQuinticAsSevenFifthPowers) {
  Rng rng(94);
  const AbstractJoin J = build_abstract_join(std::vector<Parameterization>(7, scaled_linear_power(2, 5)), JoinMode::AffineCone, rng);
  const CVec T = quintic();
  ASSERT_LT(relative_distance(J.reconstruct(quintic_known_decomposition()), T), 1e-15);
  const DecomposeResult r = decompose_generic(J, T, rng);
  ASSERT_EQ(r.outcome, DecomposeOutcome::Success) << r.diagnostic;
  const CVec back = J.reconstruct(r.decomposition->parameters);
  for (Index j = 0; j < T.size(); ++j) EXPECT_LT(std::abs(back[j] - T[j]), 1e-6 * std::abs(T[j])) << j;
  // the fiber over T is a single point
  const auto key = detail::permutation_key(J);
  EXPECT_LT(relative_distance(key(detail::flatten(r.decomposition->parameters)), key(detail::flatten(quintic_known_decomposition()))), 1e-6);
  EXPECT_TRUE(r.decomposition->is_real);
}

TEST(DecomposeGeneric, ExactSeedIsAFixedPoint) {
  Rng rng(95);
  const AbstractJoin J = build_abstract_join(std::vector<Parameterization>(7, scaled_linear_power(2, 5)), JoinMode::AffineCone, rng);
  GenericOptions go;
  go.rescale = false;
  const auto seed = quintic_known_decomposition();
  const DecomposeResult r = decompose_generic(J, quintic(), rng, go, seed);
  ASSERT_EQ(r.outcome, DecomposeOutcome::Success);
  EXPECT_LT(relative_distance(detail::flatten(r.decomposition->parameters), detail::flatten(seed)), 1e-12);
  EXPECT_LT(r.decomposition->reconstruction_residual, 1e-15);
}

TEST(DecomposeGeneric, NonFillingJoinIsRejected) {
  Rng rng(96);
  const AbstractJoin J = build_abstract_join({veronese(1, 4, false), veronese(1, 4, false)}, JoinMode::AffineCone, rng);
  EXPECT_THROW(decompose_generic(J, rng.unit_complex_vector(5), rng), Error);
}

// Every filling model: at least 19 of 20 random targets decompose.
TEST(DecomposeGeneric, SucceedsOnRandomTargets) {
  Rng rng(97);
  const AbstractJoin cubics = build_abstract_join({veronese(1, 3, false), veronese(1, 3, false)}, JoinMode::AffineCone, rng);
  const AbstractJoin quintics = build_abstract_join(std::vector<Parameterization>(7, scaled_linear_power(2, 5)), JoinMode::AffineCone, rng);
  for (const AbstractJoin* J : {&cubics, &quintics}) {
    std::size_t ok = 0;
    for (int k = 0; k < 20; ++k) {
      const CVec P = rng.unit_complex_vector(static_cast<Index>(J->ambient));
      const DecomposeResult r = decompose_generic(*J, P, rng);
      ok += r.outcome == DecomposeOutcome::Success && r.decomposition->reconstruction_residual < 1e-6;
    }
    EXPECT_GE(ok, 19u) << J->ambient;
  }
}

// The rank-2 decomposition of complex multiplication in the Segre coordinates.
TEST(DecomposeGeneric, ComplexMultiplicationRankTwo) {
  Rng rng(98);
  const AbstractJoin J = build_abstract_join({segre({2, 2, 2}), segre({2, 2, 2})}, JoinMode::AffineCone, rng);
  ASSERT_EQ(J.ambient, 8u);
  // T[k][i][j] flattened with k slowest
  const CVec T = cvec({1, 0, 0, -1, 0, 1, 1, 0});
  const DecomposeResult r = decompose_generic(J, T, rng);
  ASSERT_EQ(r.outcome, DecomposeOutcome::Success) << r.diagnostic;
  EXPECT_LT(r.decomposition->reconstruction_residual, 1e-8);
  EXPECT_FALSE(r.decomposition->is_real);
}

// Ex: the circle through (x, y, s), psi = 2x + 3y. The real seed path carries psi to psi(0, -1) while s
// runs off to infinity; in the compactified fiber the path converges to s = [0 : 1].
TEST(Projection, CircleSeedEscapesToInfinity) {
  Rng rng(99);
  const Incidence inc = rational_circle();
  CMat psi(1, 2);
  psi << 2.0, 3.0;
  const CVec seed = cvec({20.0 / 101.0, -99.0 / 101.0, 10.0});
  const DecomposeResult r = decompose_via_projection(inc, cvec({0.0, -1.0}), psi, seed, rng);
  EXPECT_EQ(r.outcome, DecomposeOutcome::AtInfinity) << r.diagnostic;
  EXPECT_LT((r.image_limit - cvec({0.0, -1.0})).norm(), 1e-6);
  EXPECT_FALSE(r.decomposition.has_value());

  ProjectionOptions open;
  open.compactify = false;
  const DecomposeResult u = decompose_via_projection(inc, cvec({0.0, -1.0}), psi, seed, rng, open);
  EXPECT_NE(u.outcome, DecomposeOutcome::Success);
}

TEST(Projection, RealSeedGivesRealDecomposition) {
  Rng rng(100);
  const Incidence inc = rational_circle();
  CMat psi(1, 2);
  psi << 2.0, 3.0;
  // target (0.6, 0.8) at s = 1/3, seeded from s = 2
  const CVec seed = cvec({0.8, -0.6, 2.0});
  const DecomposeResult r = decompose_via_projection(inc, cvec({0.6, 0.8}), psi, seed, rng);
  if (r.outcome == DecomposeOutcome::Success) {
    EXPECT_TRUE(r.decomposition->is_real);
    EXPECT_LT(std::abs(r.endpoint[2] - 1.0 / 3.0), 1e-8);
  } else {
    EXPECT_EQ(r.outcome, DecomposeOutcome::FiberMiss);
    EXPECT_LT(std::abs(psi.row(0).dot(r.image_limit) - psi.row(0).dot(cvec({0.6, 0.8}))), 1e-8);
  }
}

TEST(Projection, ExactSeedIsAFixedPoint) {
  Rng rng(101);
  const Incidence inc = rational_circle();
  CMat psi(1, 2);
  psi << 2.0, 3.0;
  const CVec seed = cvec({0.6, 0.8, 1.0 / 3.0});
  const DecomposeResult r = decompose_via_projection(inc, seed.head(2), psi, seed, rng);
  ASSERT_EQ(r.outcome, DecomposeOutcome::Success) << r.diagnostic;
  EXPECT_LT((r.endpoint - seed).norm(), 1e-12);
}

// Degree-7 ternary form built from 12 real summands: monodromy in the fiber finds at least 5
// decompositions, the constructed one among them, and transport out and back returns the same set.
TEST(Fiber, SepticFiberIsStable) {
  Rng rng(102);
  const AbstractJoin J = build_abstract_join(std::vector<Parameterization>(12, scaled_linear_power(2, 7)), JoinMode::AffineCone, rng);
  const auto built = septic_constructed();
  const CVec T = J.reconstruct(built);
  const DecomposeResult r = decompose_generic(J, T, rng);
  ASSERT_EQ(r.outcome, DecomposeOutcome::Success) << r.diagnostic;
  const FiberSet fs = fiber_monodromy(J, T, {*r.decomposition}, rng);
  ASSERT_GE(fs.decompositions.size(), 5u);
  for (const auto& d : fs.decompositions) EXPECT_LT(d.reconstruction_residual, 1e-6);
  const auto key = detail::permutation_key(J);
  const CVec want = key(detail::flatten(built));
  bool found = false;
  for (const auto& k : keys(J, fs.decompositions)) found = found || relative_distance(k, want) < 1e-6;
  EXPECT_TRUE(found);

  CVec Q = T;
  for (Index j = 0; j < Q.size(); ++j) Q[j] *= 1.0 + 0.3 * rng.unit_complex();
  const TransportResult out = fiber_count_transport(J, T, Q, fs.decompositions);
  const TransportResult back = fiber_count_transport(J, Q, T, out.decompositions);
  EXPECT_EQ(out.decompositions.size(), fs.decompositions.size());
  EXPECT_TRUE(same_point_set(keys(J, back.decompositions), keys(J, fs.decompositions), 1e-6));
}

TEST(Fiber, IdentityTransportKeepsEveryPoint) {
  Rng rng(103);
  const AbstractJoin J = build_abstract_join(std::vector<Parameterization>(7, scaled_linear_power(2, 5)), JoinMode::AffineCone, rng);
  const CVec T = quintic();
  Decomposition d;
  d.parameters = quintic_known_decomposition();
  const TransportResult t = fiber_count_transport(J, T, T, {d});
  ASSERT_EQ(t.decompositions.size(), 1u);
  EXPECT_LT(t.decompositions[0].reconstruction_residual, 1e-12);
}

TEST(Fiber, RejectsPositiveDimensionalFibers) {
  Rng rng(104);
  const AbstractJoin J = build_abstract_join({segre({2, 2, 2}), segre({2, 2, 2})}, JoinMode::AffineCone, rng);
  Decomposition d;
  EXPECT_THROW(fiber_monodromy(J, rng.unit_complex_vector(8), {d}, rng), Error);
}
