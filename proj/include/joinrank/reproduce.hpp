#pragma once

#include <chrono>
#include <sstream>

#include "generic.hpp"
#include "io.hpp"
#include "realness.hpp"

namespace joinrank {

struct ExampleReport {
  std::string id;
  std::string title;
  bool pass = true;
  json values = json::object();
  std::vector<std::string> failures;
  double seconds = 0.0;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
  template <class T>
  void expect_eq(const std::string& key, const T& got, const T& want) {
    values[key] = got;
    if (!(got == want)) {
      std::ostringstream s;
      s << key << " = " << json(got).dump() << ", expected " << json(want).dump();
      expect(false, s.str());
    }
  }
};

struct ExampleContext {
  RunConfig config;
  std::string models_dir;
  std::function<void(const std::string&)> log = [](const std::string&) {};
};

struct Example {
  std::string id;
  std::string title;
  bool extended = false;  // opt-in, hours of tracking; never gated
  std::function<void(ExampleReport&, ExampleContext&, Rng&)> run;
};

inline const std::vector<Example>& registry();

namespace examples {

inline Term mono(Complex c, std::vector<int> e) { return Term{c, Exponents(e.begin(), e.end())}; }

inline CVec cvec(std::initializer_list<Complex> v) {
  CVec x(static_cast<Index>(v.size()));
  Index i = 0;
  for (auto c : v) x[i++] = c;
  return x;
}

// Coefficients of a form on the monomial basis of degree `deg` (the Veronese coordinate order).
inline CVec form_coords(const Polynomial& p, int deg) {
  const auto mons = monomials(p.num_vars(), deg);
  CVec c = CVec::Zero(static_cast<Index>(mons.size()));
  for (const auto& t : p.terms()) {
    const auto it = std::find(mons.begin(), mons.end(), t.exps);
    if (it == mons.end()) throw Error(ErrorKind::Input, "form_coords: term of the wrong degree");
    c[it - mons.begin()] += t.coeff;
  }
  return c;
}

inline AbstractJoin secant(const Parameterization& p, std::size_t r, Rng& rng) {
  return build_abstract_join(std::vector<Parameterization>(r, p), JoinMode::AffineCone, rng);
}

inline PolynomialSystem twisted_cubic() {
  return PolynomialSystem(3, {Polynomial(3, {mono(1, {2, 0, 0}), mono(-1, {0, 1, 0})}), Polynomial(3, {mono(1, {3, 0, 0}), mono(1, {0, 0, 1})})});
}

// x(1+s^2) = 2s, y(1+s^2) = 1-s^2 in (x, y, s)
inline Incidence punctured_circle() {
  Incidence J;
  J.system = PolynomialSystem(3, {Polynomial(3, {mono(1, {1, 0, 0}), mono(1, {1, 0, 2}), mono(-2, {0, 0, 1})}),
                                  Polynomial(3, {mono(1, {0, 1, 0}), mono(1, {0, 1, 2}), mono(-1, {0, 0, 0}), mono(1, {0, 0, 2})})});
  J.image_coords = {0, 1};
  J.dim = 1;
  return J;
}

// x s^2 = 1, y s^3 = 1
inline Incidence punctured_cusp() {
  Incidence J;
  J.system = PolynomialSystem(3, {Polynomial(3, {mono(1, {1, 0, 2}), mono(-1, {0, 0, 0})}), Polynomial(3, {mono(1, {0, 1, 3}), mono(-1, {0, 0, 0})})});
  J.image_coords = {0, 1};
  J.dim = 1;
  return J;
}

// Rank-3 decompositions (a1 x + a2 y)^3 + (b1 x + b2 y)^3 + (c1 x + c2 y)^3 = x^2 y.
inline PolynomialSystem x2y_fiber() {
  return PolynomialSystem(6, {Polynomial(6, {mono(1, {3, 0, 0, 0, 0, 0}), mono(1, {0, 0, 3, 0, 0, 0}), mono(1, {0, 0, 0, 0, 3, 0})}),
                              Polynomial(6, {mono(3, {2, 1, 0, 0, 0, 0}), mono(3, {0, 0, 2, 1, 0, 0}), mono(3, {0, 0, 0, 0, 2, 1}),
                                             mono(-1, {0, 0, 0, 0, 0, 0})}),
                              Polynomial(6, {mono(3, {1, 2, 0, 0, 0, 0}), mono(3, {0, 0, 1, 2, 0, 0}), mono(3, {0, 0, 0, 0, 1, 2})}),
                              Polynomial(6, {mono(1, {0, 3, 0, 0, 0, 0}), mono(1, {0, 0, 0, 3, 0, 0}), mono(1, {0, 0, 0, 0, 0, 3})})});
}

inline CVec x2y_point() { return cvec({0.0, 1.0, 0.0, 0.0}); }

// The centers (alpha, beta, gamma) and the nearest real decomposition to three digits.
inline Eigen::VectorXd x2y_center() {
  Eigen::VectorXd c(6);
  c << 1, 2, -2, 1, 1, -1;
  return c;
}
inline std::vector<std::array<double, 2>> x2y_nearest() { return {{0.721, 0.2849}, {-1.429, 1.101}, {1.365, -1.107}}; }

// Summands of a rank-3 point matched to `want` up to reordering, componentwise within tol.
inline bool matches_blocks(const Eigen::VectorXd& x, const std::vector<std::array<double, 2>>& want, double tol) {
  std::vector<int> perm{0, 1, 2};
  do {
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i)
      ok = std::abs(x[2 * i] - want[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])][0]) < tol &&
           std::abs(x[2 * i + 1] - want[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])][1]) < tol;
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// Rank-2 decompositions of complex multiplication in (x11 x12 x21 x22, y11 y12 y21 y22, z11 z12 z21 z22).
inline PolynomialSystem complex_multiplication_fiber() {
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

inline CVec complex_multiplication_tensor() { return cvec({1, 0, 0, -1, 0, 1, 1, 0}); }

// The two complex rank-2 decompositions, (a - ib)(c - id) and its conjugate.
inline std::vector<CVec> complex_multiplication_seeds() {
  const Complex I(0, 1);
  const CVec s = cvec({0.5, -0.5, I / 2.0, I / 2.0, 1.0, -I, -I, 1.0, 1.0, -I, -I, 1.0});
  return {s, CVec(s.conjugate())};
}

// Binary cubic line P1 + 3P4 = 2, P2 - 4P4 = -3, P3 - 2P4 = 4 in tensor coordinates.
inline LinearSlice cubic_line() {
  LinearSlice C;
  C.A = CMat::Zero(3, 4);
  C.b = CVec(3);
  C.A(0, 0) = 1.0, C.A(0, 3) = 3.0, C.b[0] = 2.0;
  C.A(1, 1) = 1.0, C.A(1, 3) = -4.0, C.b[1] = -3.0;
  C.A(2, 2) = 1.0, C.A(2, 3) = -2.0, C.b[2] = 4.0;
  return C;
}

inline Complex cubic_discriminant(const CVec& p) {
  const Complex a = p[0], b = p[1], c = p[2], d = p[3];
  return a * a * d * d - 6.0 * a * b * c * d + 4.0 * a * c * c * c + 4.0 * b * b * b * d - 3.0 * b * b * c * c;
}

// Q(x) (x0 + a1 x1 + a2 x2) + (x0 + b1 x1 + b2 x2)^3 on plane cubics.
inline AbstractJoin osculating_cubics(Rng& rng) {
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
  auto W = [](std::size_t i) { return Polynomial::variable(5, i); };
  const Polynomial L1 = V(8) + V(6) * V(9) + V(7) * V(10), L2 = W(2) + W(0) * W(3) + W(1) * W(4);
  return build_abstract_join({custom(coefficients_in_x(Q * L1, 8, 3, 3), "quadric_times_linear"),
                              custom(coefficients_in_x(L2.pow(3), 2, 3, 3), "monic_linear_cube")},
                             JoinMode::AffineCone, rng);
}

inline std::vector<CVec> osculating_start() {
  const Complex I(0, 1);
  return {cvec({1.0, 1.0 + I, 3.0, -2.0, 3.0 - I, 2.0, 2.0, 3.0}), cvec({-(3.0 + I), 5.0})};
}

inline Polynomial ternary(const std::vector<std::pair<double, std::vector<int>>>& ts) {
  std::vector<Term> out;
  for (const auto& [c, e] : ts) out.push_back(mono(c, e));
  return Polynomial(3, out);
}

inline CVec ternary_quintic() {
  return form_coords(ternary({{17051, {5, 0, 0}},   {41500, {4, 1, 0}},   {720, {3, 2, 0}},     {11360, {2, 3, 0}},   {95010, {1, 4, 0}},
                              {19345, {0, 5, 0}},   {-18095, {4, 0, 1}},  {-281420, {3, 1, 1}}, {427290, {2, 2, 1}},  {-367940, {1, 3, 1}},
                              {73860, {0, 4, 1}},   {243470, {3, 0, 2}},  {-533370, {2, 1, 2}}, {518670, {1, 2, 2}},  {-273140, {0, 3, 2}},
                              {156350, {2, 0, 3}},  {-323300, {1, 1, 3}}, {383760, {0, 2, 3}},  {80245, {1, 0, 4}},   {-277060, {0, 1, 4}},
                              {84411, {0, 0, 5}}}),
                     5);
}

inline std::vector<CVec> blocks(const std::vector<std::array<double, 3>>& b) {
  std::vector<CVec> out;
  for (const auto& [l, a1, a2] : b) out.push_back(cvec({l, a1, a2}));
  return out;
}

// 243 (x0 + 8/3 x1 - 2/3 x2)^5 and six more
inline std::vector<CVec> quintic_decomposition() {
  return blocks({{243, 8. / 3, -2. / 3}, {-32768, -3. / 4, 1. / 8}, {16807, -1, 1}, {-32, 2, -4}, {32768, 0, -0.5}, {32, -1.5, 2.5}, {1, -5, 8}});
}

inline std::vector<CVec> septic_decomposition() {
  return blocks({{91, -3.5, 4.5}, {58, -1.5, -4. / 3}, {-21, 2, -4.5}, {33, 3, -1}, {54, -3, -5. / 3}, {88, -3, -10. / 3},
                 {-37, -5, 1}, {93, -1, -8}, {12, 4.5, 10}, {-89, -5, -0.5}, {-99, -1, -3}, {-22, -1. / 3, 4}});
}

inline Polynomial random_poly(std::size_t n, int max_deg, std::size_t terms, Rng& rng) {
  std::vector<Term> ts;
  for (std::size_t k = 0; k < terms; ++k) {
    Exponents e(n, 0);
    int budget = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(max_deg) + 1));
    while (budget-- > 0) ++e[rng.uniform_index(n)];
    ts.push_back({Complex(rng.uniform(-2, 2), rng.uniform(-2, 2)), e});
  }
  return Polynomial(n, ts);
}

inline std::vector<std::string> statuses(const MembershipReport& r) {
  std::vector<std::string> out;
  for (const auto& e : r.evidence) out.push_back(to_string(e.status));
  return out;
}

inline bool has_nonconvergent_path_to_P(const MembershipReport& r) {
  for (const auto& e : r.evidence)
    if (e.item.find("escalated") == std::string::npos && e.status != PathStatus::Converged && e.projects_to_P) return true;
  return false;
}

// ---- acceptance examples -----------------------------------------------------------------

inline void witness_basics(ExampleReport& rep, ExampleContext&, Rng& rng) {
  const WitnessSet w = witness_set(twisted_cubic(), 1, rng);
  rep.expect_eq<std::size_t>("witness_points", w.points.size(), 3);
  Incidence inc;
  inc.system = twisted_cubic();
  inc.image_coords = {0, 1};
  inc.dim = 1;
  const ImageDimension d = image_dimension(inc, rng);
  rep.expect_eq<std::size_t>("dim_Y", d.dim_image, 1);
  const PseudoWitnessSet pw = pseudowitness_set(inc, d.dim_image, rng, PwMethod::FromWitness);
  rep.expect_eq<std::size_t>("image_deg", pw.image_deg, 2);
  rep.expect_eq<std::size_t>("fiber_deg", pw.fiber_deg, 1);
}

inline void veronese_degrees(ExampleReport& rep, ExampleContext&, Rng& rng) {
  for (auto [n, d] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 3}, {1, 4}, {2, 2}}) {
    const PseudoWitnessSet pw = pseudowitness_set(secant(veronese(n, d), 1, rng), rng);
    rep.expect_eq<std::size_t>("deg_nu_" + std::to_string(d) + "_P" + std::to_string(n), pw.image_deg,
                               static_cast<std::size_t>(std::pow(d, n)));
  }
  const PseudoWitnessSet s2 = pseudowitness_set(secant(veronese(1, 4), 2, rng), rng);
  rep.expect_eq<std::size_t>("deg_sigma2_nu_4_P1", s2.image_deg, 3);  // binom(d - 1, 2)
}

inline void x2y_borderrank(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  const CVec P = x2y_point();
  const PseudoWitnessSet pw1 = pseudowitness_set(secant(veronese(1, 3), 1, rng), rng);
  const MembershipReport m1 = membership_test(pw1, P, rng);
  rep.expect_eq<std::size_t>("rank1_paths", m1.paths_tracked, 3);
  rep.expect_eq("rank1_in_closure", m1.in_closure, false);
  ctx.log("sigma_1: " + std::to_string(m1.paths_tracked) + " paths, none ends over x^2y");

  const AbstractJoin J2 = secant(veronese(1, 3), 2, rng);
  const PseudoWitnessSet pw2 = pseudowitness_set(J2, rng);
  const MembershipReport m2 = membership_test(pw2, P, rng);
  // one path per image point; lifts tracked afterwards only search for a constructible decomposition
  const auto item1 = static_cast<std::size_t>(
      std::count_if(m2.evidence.begin(), m2.evidence.end(), [](const PathEvidence& e) { return e.item.find("escalated") == std::string::npos; }));
  rep.values["rank2_paths_total"] = m2.paths_tracked;
  rep.expect_eq<std::size_t>("rank2_paths", item1, 1);
  rep.expect_eq("rank2_in_closure", m2.in_closure, true);
  rep.values["rank2_path_status"] = statuses(m2);
  rep.expect(has_nonconvergent_path_to_P(m2), "the sigma_2 path should diverge while its projection converges to x^2y");
  const int brk = !m1.in_closure && m2.in_closure ? 2 : -1;
  ctx.log("sigma_2: single path " + (m2.evidence.empty() ? std::string("?") : std::string(to_string(m2.evidence[0].status))) +
          ", projection reaches x^2y");

  const AbstractJoin J3 = secant(veronese(1, 3), 3, rng);
  const FiberDecomposition fd = fiber_decomposition(J3, P, rng);
  rep.values["rank3_cascade"] = fd.stage_counts;
  rep.expect_eq<std::size_t>("rank3_fiber_components", fd.components.size(), 1);
  if (!fd.components.empty()) {
    rep.expect_eq<std::size_t>("rank3_fiber_points", fd.components[0].deg, 45);
    rep.expect_eq<std::size_t>("rank3_fiber_dim", fd.components[0].dim, 2);
    const RestrictionResult rr = restrict_fiber(fd.fiber_system, fd.components[0], J3.blocks[2], 2, rng);
    rep.expect_eq<std::vector<std::size_t>>("c_zero_stage_counts", rr.stage_counts, {36, 0});
  }
  const int rank = fd.nonempty && !fd.components.empty() && !fd.components[0].witness_points.empty() ? 3 : -1;

  const GradientDescentResult gd = gradient_descent_homotopy(x2y_fiber(), x2y_center());
  const int real_rank = gd.point && gd.point->flag == RealFlag::Real && rank == 3 ? 3 : -1;
  rep.expect_eq("brk", brk, 2);
  rep.expect_eq("rank", rank, 3);
  rep.expect_eq("real_rank", real_rank, 3);
}

inline void boundary_quartic(ExampleReport& rep, ExampleContext&, Rng& rng) {
  const AbstractJoin J = secant(veronese(1, 3, false), 2, rng);
  const PseudoWitnessSet pw = pseudowitness_set(J, rng);
  BoundaryReport br = boundary_candidates(pw, cubic_line(), rng);
  std::size_t confirmed = 0;
  double worst = 0.0;
  json pts = json::array();
  for (auto& c : br.candidates) {
    confirmed += boundary_confirm(J, c, rng);
    worst = std::max(worst, std::abs(cubic_discriminant(c.point)) / std::pow(1.0 + c.point.norm(), 4));
    pts.push_back(to_json(c.point));
  }
  rep.values["points"] = pts;
  rep.values["start_points"] = br.start_points;
  rep.expect_eq<std::size_t>("candidates", br.candidates.size(), 4);
  rep.expect_eq<std::size_t>("confirmed", confirmed, 4);
  rep.values["max_discriminant"] = worst;
  rep.expect(worst < 1e-6, "boundary points must satisfy the discriminant to 1e-6");
  // degree of the discriminant along the line, by interpolation at 6 nodes
  Eigen::MatrixXd V(6, 6);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    const double s = i - 2.5;
    for (int j = 0; j < 6; ++j) V(i, j) = std::pow(s, j);
    CVec p(4);
    p << 2.0 - 3.0 * s, -3.0 + 4.0 * s, 4.0 + 2.0 * s, s;
    y[i] = cubic_discriminant(p).real();
  }
  const Eigen::VectorXd c = V.fullPivLu().solve(y);
  int deg = 0;
  for (int j = 5; j >= 0; --j)
    if (std::abs(c[j]) > 1e-8 * c.cwiseAbs().maxCoeff()) {
      deg = j;
      break;
    }
  rep.expect_eq("interpolated_degree", deg, 4);
}

inline void x2y_realrank(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  CriticalOptions co;
  co.track = ctx.config.track;
  const CriticalPointSet cs = solve_critical(x2y_fiber(), x2y_center().cast<Complex>(), rng, co);
  rep.values["start_points"] = cs.start_count;
  rep.values["singular_endpoints"] = cs.singular;
  rep.values["critical_pairs"] = cs.pairs;
  rep.values["notes"] = cs.notes;
  rep.expect_eq<std::size_t>("critical_points", cs.points.size(), 234);
  rep.expect_eq<std::size_t>("real", cs.real_count(), 8);
  const CriticalPoint* near = cs.nearest_real();
  rep.expect(near != nullptr, "no real critical point");
  if (near) {
    const Eigen::VectorXd x = near->x.real();
    rep.values["nearest"] = std::vector<double>(x.data(), x.data() + x.size());
    rep.expect(matches_blocks(x, x2y_nearest(), 1e-3), "nearest real decomposition differs from the three-digit values");
  }
  const GradientDescentResult gd = gradient_descent_homotopy(x2y_fiber(), x2y_center(), co.track);
  rep.expect(gd.point.has_value(), "gradient descent path failed: " + gd.diagnostic);
  if (gd.point && near) {
    const Eigen::VectorXd g = gd.point->x.real();
    rep.values["gradient_descent"] = std::vector<double>(g.data(), g.data() + g.size());
    rep.expect((gd.point->x - near->x).norm() < 1e-6, "gradient descent ends away from the nearest critical point");
  }
}

inline void complex_multiplication(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  const CVec T = complex_multiplication_tensor();
  const PseudoWitnessSet pw = pseudowitness_set(secant(segre({2, 2, 2}), 1, rng), rng);
  rep.expect_eq<std::size_t>("deg_segre", pw.image_deg, 6);
  const MembershipReport m = membership_test(pw, T, rng);
  rep.expect_eq("rank1_in_closure", m.in_closure, false);
  rep.values["rank1_paths"] = m.paths_tracked;

  const AbstractJoin J2 = secant(segre({2, 2, 2}), 2, rng);
  const DecomposeResult d = decompose_generic(J2, T, rng);
  rep.values["rank2_outcome"] = to_string(d.outcome);
  rep.expect(d.outcome == DecomposeOutcome::Success, "rank-2 path failed: " + d.diagnostic);
  if (d.decomposition) {
    rep.values["rank2_residual"] = d.decomposition->reconstruction_residual;
    rep.expect(d.decomposition->reconstruction_residual < 1e-8, "rank-2 reconstruction residual too large");
  }
  ctx.log("rank-2 decomposition found; solving the real critical point system");

  CriticalOptions co;
  co.method = CriticalMethod::Monodromy;
  co.track = ctx.config.track;
  const CVec center = rng.real_vector(12).cast<Complex>();
  const CriticalPointSet cs = solve_critical(complex_multiplication_fiber(), center, rng, co, complex_multiplication_seeds());
  rep.expect_eq<std::size_t>("critical_points", cs.points.size(), 18);
  rep.expect_eq<std::size_t>("real", cs.real_count(), 0);
  rep.expect_eq<std::size_t>("borderline", cs.count(RealFlag::Borderline), 0);
}

inline void multiplicity(ExampleReport& rep, ExampleContext&, Rng& rng) {
  const PseudoWitnessSet c = pseudowitness_set(punctured_circle(), 1, rng);
  const MembershipReport a = membership_test(c, cvec({0.0, -1.0}), rng);
  rep.expect_eq("circle_in_closure", a.in_closure, true);
  rep.expect_eq<std::size_t>("circle_multiplicity", a.multiplicity, 1);
  const PseudoWitnessSet k = pseudowitness_set(punctured_cusp(), 1, rng);
  const MembershipReport b = membership_test(k, cvec({0.0, 0.0}), rng);
  rep.expect_eq("cusp_in_closure", b.in_closure, true);
  rep.expect_eq<std::size_t>("cusp_multiplicity", b.multiplicity, 2);
}

struct DimRow {
  std::vector<int> values;
  std::size_t expected = 0, actual = 0;
  long defect = 0;
};

// Expected and actual image dimensions of every case of a family model.
inline std::vector<DimRow> dimension_table(const Model& m, Rng& rng) {
  std::vector<DimRow> out;
  for (const auto& c : m.family_cases()) {
    const AbstractJoin J = build_abstract_join(m.instantiate(c), m.mode, rng);
    const ImageDimension d = image_dimension(J, rng);
    out.push_back({c, J.expected_dim(), d.dim_image, d.defect});
  }
  return out;
}

inline Model waring_model(const ExampleContext& ctx) {
  if (!ctx.models_dir.empty()) return read_model(ctx.models_dir + "/waring_35_rs.model.json");
  throw Error(ErrorKind::Input, "waring-defectivity needs the models directory");
}

inline void waring_defectivity(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  const Model m = waring_model(ctx);
  const auto rows = dimension_table(m, rng);
  const auto want_exp = m.reference().at("expected_dim").get<std::vector<std::size_t>>();
  const auto want_act = m.reference().at("actual_dim").get<std::vector<std::size_t>>();
  json table = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.push_back({{"r", rows[i].values[0]}, {"s", rows[i].values[1]}, {"expected", rows[i].expected}, {"actual", rows[i].actual}});
    if (rows[i].expected != want_exp[i] || rows[i].actual != want_act[i])
      rep.expect(false, "(r,s) = (" + std::to_string(rows[i].values[0]) + "," + std::to_string(rows[i].values[1]) +
                            "): expected/actual " + std::to_string(rows[i].expected) + "/" + std::to_string(rows[i].actual) + ", table says " +
                            std::to_string(want_exp[i]) + "/" + std::to_string(want_act[i]));
  }
  rep.values["table"] = table;
}

inline void generic_decompositions(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  GenericOptions go;
  go.track = ctx.config.track;
  const AbstractJoin osc = osculating_cubics(rng);
  const CVec C1 = form_coords(ternary({{1, {3, 0, 0}}, {1, {0, 3, 0}}, {1, {0, 0, 3}}}), 3);
  const CVec C2 = form_coords(ternary({{4, {2, 0, 1}}, {1, {0, 2, 1}}, {-8, {3, 0, 0}}}), 3);
  for (const auto& [name, C] : std::vector<std::pair<std::string, CVec>>{{"C1", C1}, {"C2", C2}}) {
    const DecomposeResult r = decompose_generic(osc, C, rng, go, osculating_start());
    const double res = r.decomposition ? r.decomposition->reconstruction_residual : 1.0;
    rep.values[name + "_residual"] = res;
    rep.expect(r.outcome == DecomposeOutcome::Success && res < 1e-8, name + " did not decompose (" + r.diagnostic + ")");
    if (name == "C1" && r.decomposition) {
      const Complex w = (1.0 - std::sqrt(Complex(-3.0))) / 2.0;
      rep.expect((r.decomposition->parameters[1] - cvec({1.0, -w})).norm() < 1e-8, "C1: cube summand differs from x0 + x1 - w x2");
    }
    if (name == "C2" && r.decomposition)
      rep.expect(std::abs(r.decomposition->parameters[0][0] + 9.0) < 1e-8 && std::abs(r.decomposition->parameters[0][3] + 2.25) < 1e-8,
                 "C2: quadric differs from -9 x0^2 - 9 x1^2 / 4");
  }

  const AbstractJoin J7 = secant(scaled_linear_power(2, 5), 7, rng);
  const CVec T = ternary_quintic();
  const DecomposeResult q = decompose_generic(J7, T, rng, go);
  rep.values["quintic_outcome"] = to_string(q.outcome);
  if (q.decomposition) {
    const CVec back = J7.reconstruct(q.decomposition->parameters);
    double worst = 0.0;
    for (Index j = 0; j < T.size(); ++j) worst = std::max(worst, std::abs(back[j] - T[j]) / std::abs(T[j]));
    rep.values["quintic_worst_relative"] = worst;
    rep.expect(worst < 1e-6, "quintic reconstruction misses a coefficient by more than 1e-6 relative");
    rep.values["quintic_is_real"] = q.decomposition->is_real;
  } else {
    rep.expect(false, "quintic did not decompose: " + q.diagnostic);
  }
  ctx.log("quintic decomposed; populating the degree-7 fiber");

  const AbstractJoin J12 = secant(scaled_linear_power(2, 7), 12, rng);
  const auto built = septic_decomposition();
  const CVec S = J12.reconstruct(built);
  const DecomposeResult s = decompose_generic(J12, S, rng, go);
  if (!s.decomposition) {
    rep.expect(false, "septic did not decompose: " + s.diagnostic);
    return;
  }
  const FiberSet fs = fiber_monodromy(J12, S, {*s.decomposition}, rng, 8, go);
  const KeyFn key = detail::permutation_key(J12);
  std::vector<CVec> keys;
  std::size_t real = 0;
  for (const auto& d : fs.decompositions) keys.push_back(key(detail::flatten(d.parameters))), real += d.is_real;
  const CVec want = key(detail::flatten(built));
  bool found = false;
  for (const auto& k : keys) found = found || relative_distance(k, want) < 1e-6;
  rep.values["septic_decompositions"] = fs.decompositions.size();
  rep.values["septic_real"] = real;
  rep.values["septic_loops"] = fs.stats.loops;
  rep.expect(fs.decompositions.size() >= 5, "fewer than 5 decompositions of the degree-7 form");
  rep.expect(found, "the constructed decomposition is not among those found");
  CVec Q = S;
  for (Index j = 0; j < Q.size(); ++j) Q[j] *= 1.0 + 0.3 * rng.unit_complex();
  const TransportResult out = fiber_count_transport(J12, S, Q, fs.decompositions, go);
  const TransportResult back = fiber_count_transport(J12, Q, S, out.decompositions, go);
  std::vector<CVec> back_keys;
  for (const auto& d : back.decompositions) back_keys.push_back(key(detail::flatten(d.parameters)));
  const bool stable = back.decompositions.size() == keys.size() && same_point_set(back_keys, keys, 1e-6);
  rep.values["septic_transport_stable"] = stable;
  rep.expect(stable, "transport out and back changed the decomposition set");
}

inline void extended_wiring(ExampleReport& rep, ExampleContext&, Rng&) {
  const std::vector<std::string> want{"cw-tensor", "cactus-rank", "hadamard-110", "low-rank-approximation", "grassmannian-g37", "matrix-multiplication"};
  std::vector<std::string> got;
  for (const auto& e : registry())
    if (e.extended) got.push_back(e.id);
  rep.values["extended_targets"] = got;
  for (const auto& w : want) rep.expect(std::find(got.begin(), got.end(), w) != got.end(), "extended target " + w + " is not wired");
}

inline void property_suites(ExampleReport& rep, ExampleContext&, Rng& rng) {
  // Jacobian against central differences
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(4);
    std::vector<Polynomial> ps;
    const std::size_t m = 1 + rng.uniform_index(3);
    for (std::size_t i = 0; i < m; ++i) ps.push_back(random_poly(n, 4, 6, rng));
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
  rep.values["jacobian_fd_worst"] = worst;
  rep.expect(worst < 1e-6, "Jacobian disagrees with central differences");

  // nonreal critical points come in conjugate pairs: a real plane cubic has 9 ED critical points
  std::size_t odd = 0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Term> ts;
    for (const auto& e : monomials(2, 3)) ts.push_back({rng.uniform(-1, 1), e});
    for (const auto& e : monomials(2, 1)) ts.push_back({rng.uniform(-1, 1), e});
    ts.push_back({rng.uniform(-1, 1), Exponents{0, 0}});
    const PolynomialSystem F(2, {Polynomial(2, ts)});
    CriticalOptions co;
    co.method = CriticalMethod::TotalDegree;
    const CriticalPointSet cs = solve_critical(F, rng.real_vector(2).cast<Complex>(), rng, co);
    odd += (cs.points.size() - cs.real_count()) % 2;
    rep.expect(cs.points.size() == 9, "plane cubic ED degree " + std::to_string(cs.points.size()) + " != 9");
  }
  rep.expect_eq<std::size_t>("odd_nonreal_counts", odd, 0);

  // every returned decomposition reconstructs its point
  const AbstractJoin J = secant(veronese(1, 3), 2, rng);
  double res = 0.0;
  for (int k = 0; k < 10; ++k) {
    const CVec P = rng.unit_complex_vector(4);
    const DecomposeResult r = decompose_generic(J, P, rng);
    res = std::max(res, r.decomposition ? detail::reconstruction_residual(J, r.decomposition->parameters, P) : 1.0);
  }
  rep.values["worst_reconstruction"] = res;
  rep.expect(res < 1e-6, "a returned decomposition does not reconstruct its point");

  // trace test on the twisted cubic: complete passes, strict subsets fail
  const PolynomialSystem tc = twisted_cubic();
  const LinearSlice a = random_slice(3, 1, std::nullopt, rng);
  const SolutionSet w = total_degree_solve_report(tc | a.as_system(), rng).solutions;
  const bool full = trace_test(tc, a, w.points, rng).passed;
  bool subset = false;
  for (std::size_t drop = 0; drop < w.size(); ++drop) {
    std::vector<CVec> sub;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (i != drop) sub.push_back(w.points[i]);
    subset = subset || trace_test(tc, a, sub, rng).passed;
  }
  rep.expect_eq("trace_complete", full, true);
  rep.expect_eq("trace_any_subset", subset, false);

  // determinism under a fixed seed
  auto run = [](std::uint64_t seed) {
    Rng r(seed);
    const PseudoWitnessSet pw = pseudowitness_set(secant(veronese(1, 4), 2, r), r);
    const DecomposeResult d = decompose_generic(secant(veronese(1, 3), 2, r), CVec::Ones(4), r);
    return to_json(pw).dump() + (d.decomposition ? to_json(detail::flatten(d.decomposition->parameters)).dump() : "");
  };
  rep.expect_eq("deterministic", run(5) == run(5), true);
}

// ---- extended targets (opt-in, not gated) ------------------------------------------------

inline void cw_tensor(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  CVec T = CVec::Zero(27);
  auto at = [&](int a, int b, int c) -> Complex& { return T[9 * a + 3 * b + c]; };
  at(0, 1, 1) = at(1, 0, 1) = at(1, 1, 0) = at(0, 2, 2) = at(2, 0, 2) = at(2, 2, 0) = 1.0;
  const AbstractJoin J3 = secant(segre({3, 3, 3}), 3, rng);
  rep.expect_eq<std::size_t>("dim_sigma3", image_dimension(J3, rng).dim_image, 21);
  ctx.log("computing the degree of sigma_3(C^3 x C^3 x C^3) by monodromy");
  const PseudoWitnessSet pw = pseudowitness_set(J3, rng);
  rep.expect_eq<std::size_t>("deg_sigma3", pw.image_deg, 414);
  rep.expect_eq("T_in_sigma3", membership_test(pw, T, rng).in_closure, false);
  rep.expect_eq<std::size_t>("dim_sigma4", image_dimension(secant(segre({3, 3, 3}), 4, rng), rng).dim_image, 26);
}

inline void cactus_rank(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  auto x = [](std::size_t i) { return Polynomial::variable(5, i); };
  const Polynomial s = x(0) + x(1);
  const Polynomial f = x(0).pow(2) * x(2) + Complex(6.0) * x(1).pow(2) * x(3) - Complex(3.0) * s.pow(2) * x(4);
  const CVec T = form_coords(f, 3);
  for (std::size_t r : {4u, 5u}) {
    ctx.log("sigma_" + std::to_string(r) + "(nu_3(P^4)) by monodromy");
    const PseudoWitnessSet pw = pseudowitness_set(secant(veronese(4, 3), r, rng), rng);
    rep.expect_eq<std::size_t>("deg_sigma" + std::to_string(r), pw.image_deg, r == 4 ? 36505 : 24047);
    rep.expect_eq("T_in_sigma" + std::to_string(r), membership_test(pw, T, rng).in_closure, r == 5);
  }
}

// p_ijkl = (sum_s a_si b_sj c_sk d_sl)(sum_r e_ri f_rj g_rk h_rl)
inline Parameterization hadamard_segre_product() {
  const std::size_t nv = 32;
  auto var = [](std::size_t block, std::size_t s, std::size_t i) { return 4 * block + 2 * s + i; };
  std::vector<Polynomial> ps;
  for (std::size_t idx = 0; idx < 16; ++idx) {
    const std::size_t I[4] = {(idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1};
    Polynomial left(nv), right(nv);
    for (std::size_t s = 0; s < 2; ++s) {
      Exponents l(nv, 0), r(nv, 0);
      for (std::size_t b = 0; b < 4; ++b) ++l[var(b, s, I[b])], ++r[var(b + 4, s, I[b])];
      left = left + Polynomial(nv, {Term{1.0, l}});
      right = right + Polynomial(nv, {Term{1.0, r}});
    }
    ps.push_back(left * right);
  }
  return custom(PolynomialSystem(nv, ps), "hadamard_sigma2_segre_1111");
}

inline void hadamard_110(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  const AbstractJoin J = build_abstract_join({hadamard_segre_product()}, JoinMode::AffineCone, rng);
  rep.expect_eq<std::size_t>("dim", image_dimension(J, rng).dim_image, 15);
  ctx.log("degree of the Hadamard product hypersurface by monodromy");
  const PseudoWitnessSet pw = pseudowitness_set(J, rng);
  rep.expect_eq<std::size_t>("deg", pw.image_deg, 110);
  const CVec v = cvec({2, 3, 0, -1, 4, 2, 0, 1, 1, -2, 2, 0, 1, 0, -4, 3});
  const CVec w = cvec({2528064, -3079104, -2340576, 2038176, -1804032, 2398464, 1539648, -1524096, 1104000, 456086, -2403720, 284016,
                       -511104, -502072, 1220472, -23424});
  rep.expect_eq("v_in_M", membership_test(pw, v, rng).in_closure, false);
  const MembershipReport mw = membership_test(pw, w / w.norm(), rng);
  rep.expect_eq("w_in_M", mw.in_closure, true);
  rep.values["w_constructible"] = to_string(mw.constructible);
}

inline void low_rank_approximation(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  const Polynomial T = ternary({{0.1023, {4, 0, 0}},      {0.0197, {0, 4, 0}},     {0.1869, {0, 0, 4}},      {0.0039, {2, 2, 0}},
                                {0.0407, {2, 0, 2}},      {-0.00017418, {0, 2, 2}}, {-0.002, {3, 1, 0}},      {0.0581, {3, 0, 1}},
                                {0.0107, {1, 3, 0}},      {0.0196, {1, 0, 3}},     {0.0029, {0, 3, 1}},      {-0.0021, {0, 1, 3}},
                                {-0.00032569, {2, 1, 1}}, {-0.0012, {1, 2, 1}},    {-0.0011, {1, 1, 2}}});
  ctx.log("sigma_2(nu_4(P^2)) by monodromy");
  const PseudoWitnessSet pw = pseudowitness_set(secant(veronese(2, 4), 2, rng), rng);
  rep.expect_eq<std::size_t>("deg", pw.image_deg, 75);
  rep.expect_eq("T_in_S", membership_test(pw, form_coords(T, 4), rng).in_closure, false);
  // The 195 ED critical points need the 148 defining cubics, which are not reproduced here.
}

inline void grassmannian_g37(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  const AbstractJoin J3 = secant(wedge(3, 7), 3, rng);
  rep.expect_eq<std::size_t>("dim_sigma3", image_dimension(J3, rng).dim_image, 34);
  ctx.log("sigma_3(G(3,7)) hypersurface degree by monodromy");
  rep.expect_eq<std::size_t>("deg_sigma3", pseudowitness_set(J3, rng).image_deg, 7);
  const AbstractJoin J2 = secant(wedge(3, 7), 2, rng);
  rep.expect_eq<std::size_t>("dim_sigma2", image_dimension(J2, rng).dim_image, 26);
  ctx.log("sigma_2(G(3,7)) degree by monodromy");
  rep.expect_eq<std::size_t>("deg_sigma2", pseudowitness_set(J2, rng).image_deg, 735);
}

inline void matrix_multiplication(ExampleReport& rep, ExampleContext& ctx, Rng& rng) {
  const AbstractJoin J4 = secant(segre({3, 4, 4}), 4, rng), J5 = secant(segre({3, 4, 4}), 5, rng);
  rep.expect_eq<std::size_t>("dim_sigma4", image_dimension(J4, rng).dim_image, 36);
  rep.expect_eq<std::size_t>("dim_sigma5", image_dimension(J5, rng).dim_image, 44);
  ctx.log("sigma_5(C^3 x C^4 x C^4) degree by monodromy");
  rep.expect_eq<std::size_t>("deg_sigma5", pseudowitness_set(J5, rng).image_deg, 1716);
  ctx.log("sigma_4(C^3 x C^4 x C^4) degree by monodromy");
  rep.expect_eq<std::size_t>("deg_sigma4", pseudowitness_set(J4, rng).image_deg, 252776);
}

}  // namespace examples

inline const std::vector<Example>& registry() {
  static const std::vector<Example> r{
      {"witness-basics", "witness set of the twisted cubic and its plane projection", false, examples::witness_basics},
      {"veronese-degrees", "degrees of Veronese cones and a secant of the quartic curve", false, examples::veronese_degrees},
      {"x2y-borderrank", "border rank, rank and real rank of x^2 y", false, examples::x2y_borderrank},
      {"boundary-quartic", "rank-3 binary cubics on a line", false, examples::boundary_quartic},
      {"x2y-realrank", "critical points of the distance to rank-3 decompositions of x^2 y", false, examples::x2y_realrank},
      {"complex-multiplication", "complex multiplication tensor over C and R", false, examples::complex_multiplication},
      {"multiplicity", "multiplicities of the circle puncture and the cusp", false, examples::multiplicity},
      {"waring-defectivity", "dimensions of r squares of quadrics plus s fourth powers", false, examples::waring_defectivity},
      {"generic-decompositions", "single-path decompositions of plane cubics, a quintic and a septic", false, examples::generic_decompositions},
      {"extended-targets", "long computations are wired as opt-in targets", false, examples::extended_wiring},
      {"property-suites", "Jacobian, conjugate pairs, reconstruction, trace test, determinism", false, examples::property_suites},
      {"cw-tensor", "Coppersmith-Winograd tensor against sigma_3 of C^3 x C^3 x C^3", true, examples::cw_tensor},
      {"cactus-rank", "border rank 5 of a cubic in five variables", true, examples::cactus_rank},
      {"hadamard-110", "degree 110 Hadamard product hypersurface", true, examples::hadamard_110},
      {"low-rank-approximation", "sigma_2 of plane quartics and a noisy tensor", true, examples::low_rank_approximation},
      {"grassmannian-g37", "secant varieties of G(3,7)", true, examples::grassmannian_g37},
      {"matrix-multiplication", "secants of C^3 x C^4 x C^4", true, examples::matrix_multiplication},
  };
  return r;
}

inline const Example* find_example(const std::string& id) {
  for (const auto& e : registry())
    if (e.id == id) return &e;
  return nullptr;
}

inline ExampleReport run_example(const Example& e, ExampleContext& ctx) {
  ExampleReport rep;
  rep.id = e.id;
  rep.title = e.title;
  Rng rng(ctx.config.seed);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    e.run(rep, ctx, rng);
  } catch (const std::exception& ex) {
    rep.expect(false, std::string("exception: ") + ex.what());
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline json to_json(const ExampleReport& r) {
  return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"values", r.values}, {"failures", r.failures}, {"seconds", r.seconds}};
}

}  // namespace joinrank
