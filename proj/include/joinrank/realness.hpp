#pragma once

#include "solver.hpp"

namespace joinrank {

enum class RealFlag { Real, Borderline, Nonreal };

inline const char* to_string(RealFlag f) {
  switch (f) {
    case RealFlag::Real: return "Real";
    case RealFlag::Borderline: return "Borderline";
    case RealFlag::Nonreal: return "Nonreal";
  }
  return "?";
}

struct CriticalPoint {
  CVec x;
  CVec lambda;  // unit norm, first nonzero coordinate real and positive
  RealFlag flag = RealFlag::Nonreal;
  double distance = 0.0;  // squared distance of Re x to the center
  double residual = 0.0;
};

enum class CriticalMethod { TotalDegree, Multihomogeneous, Monodromy };

inline const char* to_string(CriticalMethod m) {
  switch (m) {
    case CriticalMethod::TotalDegree: return "total-degree";
    case CriticalMethod::Multihomogeneous: return "multihomogeneous";
    case CriticalMethod::Monodromy: return "monodromy";
  }
  return "?";
}

struct CriticalOptions {
  TrackOptions track;
  CriticalMethod method = CriticalMethod::Multihomogeneous;
  double real_tol = 1e-8;
  double dedup_tol = 1e-6;
  std::size_t stall_limit = 10;  // monodromy only
  std::vector<std::size_t> distance_coords;  // coordinates seen by the distance; empty means all
};

struct CriticalPointSet {
  CVec center;
  Eigen::VectorXd chart;  // sum chart_i lambda_i = 1
  std::vector<std::size_t> distance_coords;  // empty means all
  std::vector<CriticalPoint> points;  // distinct x
  std::vector<CVec> projected_limits;  // transported paths only: limits on distance_coords, lambda may diverge
  std::size_t pairs = 0;  // distinct (x, lambda)
  std::size_t start_count = 0;
  std::size_t paths = 0;
  std::size_t singular = 0;
  std::size_t lambda0_zero = 0;  // critical points of the singular locus of V(F)
  CriticalMethod method = CriticalMethod::Multihomogeneous;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  std::size_t count(RealFlag f) const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [&](const auto& p) { return p.flag == f; }));
  }
  std::size_t real_count() const { return count(RealFlag::Real); }

  // Real points come first, sorted by distance.
  const CriticalPoint* nearest_real() const {
    return !points.empty() && points.front().flag == RealFlag::Real ? &points.front() : nullptr;
  }
};

namespace detail {

inline bool has_real_coefficients(const PolynomialSystem& F) {
  for (const auto& p : F.polys())
    for (const auto& t : p.terms())
      if (std::abs(t.coeff.imag()) > 1e-14 * std::max(1.0, std::abs(t.coeff))) return false;
  return true;
}

inline Eigen::VectorXd random_chart(std::size_t n, Rng& rng) {
  Eigen::VectorXd c(static_cast<Index>(n));
  for (Index i = 0; i < c.size(); ++i) c[i] = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.0);
  return c;
}

inline RealFlag real_flag(const CVec& x, double tol) {
  double worst = 0.0;
  for (Index j = 0; j < x.size(); ++j) worst = std::max(worst, std::abs(x[j].imag()) / (1.0 + std::abs(x[j].real())));
  if (worst < tol) return RealFlag::Real;
  if (worst < 10 * tol) return RealFlag::Borderline;
  return RealFlag::Nonreal;
}

inline CVec normalize_projective(CVec v) {
  const double n = v.norm();
  if (n == 0.0) return v;
  v /= n;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 1e-12) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      break;
    }
  return v;
}

// Rows F, then lambda0 (x - q) + sum lambda_i grad F_i, then the chart; q enters only constants.
inline PolynomialSystem lagrange_system(const PolynomialSystem& F, const CVec& q, const Eigen::VectorXd& chart,
                                        const std::vector<std::size_t>& dist = {}) {
  const std::size_t N = F.num_vars(), n = F.size(), V = N + n + 1;
  std::vector<std::size_t> xmap(N);
  std::iota(xmap.begin(), xmap.end(), 0);
  std::vector<Polynomial> rows;
  for (const auto& p : F.polys()) rows.push_back(p.embed(V, xmap));
  const auto lam = [&](std::size_t i) { return Polynomial::variable(V, N + i); };
  for (std::size_t j = 0; j < N; ++j) {
    const bool seen = dist.empty() || std::find(dist.begin(), dist.end(), j) != dist.end();
    Polynomial r = seen ? lam(0) * (Polynomial::variable(V, j) - Polynomial::constant(V, q[static_cast<Index>(j)])) : Polynomial(V);
    for (std::size_t i = 0; i < n; ++i) r = r + lam(i + 1) * F[i].derivative(j).embed(V, xmap);
    rows.push_back(r);
  }
  rows.push_back(Polynomial::linear(V, iota_coords(N, V), chart.cast<Complex>(), -1.0));
  return PolynomialSystem(V, std::move(rows));
}

inline void check_critical_input(const PolynomialSystem& F, const CVec& x_star) {
  if (static_cast<std::size_t>(x_star.size()) != F.num_vars())
    throw Error(ErrorKind::Input, "critical system: center has the wrong length");
  if (!has_real_coefficients(F)) throw Error(ErrorKind::Precondition, "critical system: F must have real coefficients");
  if (F.residual(x_star) <= 1e-6) throw Error(ErrorKind::Precondition, "critical system: the center lies on V(F)");
}

}  // namespace detail

// G(x, lambda) with a real affine chart on lambda; variables are x then lambda_0..lambda_n.
inline PolynomialSystem build_critical_system(const PolynomialSystem& F, const CVec& x_star, const Eigen::VectorXd& chart,
                                              const std::vector<std::size_t>& distance_coords = {}) {
  detail::check_critical_input(F, x_star);
  if (static_cast<std::size_t>(chart.size()) != F.size() + 1) throw Error(ErrorKind::Input, "critical system: chart has the wrong length");
  return detail::lagrange_system(F, x_star, chart, distance_coords);
}

inline PolynomialSystem build_critical_system(const PolynomialSystem& F, const CVec& x_star, Rng& rng,
                                              const std::vector<std::size_t>& distance_coords = {}) {
  return build_critical_system(F, x_star, detail::random_chart(F.size() + 1, rng), distance_coords);
}

namespace detail {

// Refines, deduplicates by x and flags reality; fills everything in `out` except provenance.
inline void collect_critical(const PolynomialSystem& G, std::size_t N, const std::vector<CVec>& sols, const CriticalOptions& co,
                             CriticalPointSet& out) {
  std::vector<CVec> seen_pairs;
  for (const auto& s : sols) {
    const RefineResult r = newton_refine(G, s, 1e-13);
    if (!r.point.allFinite() || r.residual > 1e-8) continue;
    const CVec x = r.point.head(static_cast<Index>(N));
    const CVec lam = normalize_projective(r.point.tail(r.point.size() - static_cast<Index>(N)));
    CVec pair(x.size() + lam.size());
    pair << x, lam;
    bool dup_pair = false;
    for (const auto& p : seen_pairs) dup_pair = dup_pair || relative_distance(p, pair) < co.dedup_tol;
    if (dup_pair) continue;
    seen_pairs.push_back(pair);
    bool dup_x = false;
    for (const auto& p : out.points) dup_x = dup_x || relative_distance(p.x, x) < co.dedup_tol;
    if (dup_x) continue;
    CriticalPoint cp;
    cp.x = x;
    cp.lambda = lam;
    cp.flag = real_flag(x, co.real_tol);
    const std::vector<std::size_t> dc = out.distance_coords.empty() ? iota_coords(0, N) : out.distance_coords;
    cp.distance = (restrict_coords(x, dc).real() - restrict_coords(out.center, dc).real()).squaredNorm();
    cp.residual = r.residual;
    if (std::abs(lam[0]) < 1e-8) ++out.lambda0_zero;
    out.points.push_back(std::move(cp));
  }
  out.pairs = seen_pairs.size();
  std::stable_sort(out.points.begin(), out.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    const bool ra = a.flag == RealFlag::Real, rb = b.flag == RealFlag::Real;
    if (ra != rb) return ra;
    return ra && a.distance < b.distance;
  });
  if (out.pairs != out.points.size())
    out.notes.push_back(std::to_string(out.pairs) + " distinct (x, lambda) pairs over " + std::to_string(out.points.size()) + " distinct x");
  if (out.singular)
    out.notes.push_back(std::to_string(out.singular) + " singular endpoint(s) discarded; a cluster of them may mean a positive-dimensional critical locus");
  if (out.lambda0_zero)
    out.notes.push_back(std::to_string(out.lambda0_zero) + " point(s) with lambda0 = 0 lie on the singular locus of V(F)");
  std::size_t nonreal = 0;
  for (const auto& p : out.points) nonreal += p.flag != RealFlag::Real;
  if (nonreal % 2) out.notes.push_back("odd number of nonreal critical points: a conjugate partner was missed");
}

inline std::vector<CVec> endpoints(const std::vector<PathResult>& paths, std::size_t* singular) {
  std::vector<CVec> out;
  for (const auto& p : paths) {
    if (p.status == PathStatus::Converged) out.push_back(p.endpoint);
    else if (p.status == PathStatus::Singular && singular) ++*singular;
  }
  return out;
}

// A complex center for which x (a point of V(F)) is critical, with its multiplier vector.
inline std::pair<CVec, CVec> center_through(const PolynomialSystem& F, const CVec& x, const Eigen::VectorXd& chart, Rng& rng) {
  const std::size_t n = F.size();
  CVec lam(static_cast<Index>(n + 1));
  lam[0] = 1.0;
  lam.tail(static_cast<Index>(n)) = rng.unit_complex_vector(static_cast<Index>(n));
  const CMat J = F.jacobian(x);
  const CVec q = x + J.transpose() * lam.tail(static_cast<Index>(n));
  const Complex s = chart.cast<Complex>().dot(lam);
  return {q, lam / s};
}

}  // namespace detail

// Transports critical points computed for the center `from` to the center `to` by a straight
// segment in the center; x-limits are recorded for paths whose lambda diverges.
struct CenterTransport {
  std::vector<PathResult> paths;
  std::vector<CVec> x_limits;  // one per path with a finite x-limit
};

inline CenterTransport transport_center(const PolynomialSystem& F, const Eigen::VectorXd& chart, const CVec& from,
                                        const std::vector<CVec>& points, const CVec& to, const TrackOptions& opts = {},
                                        const std::vector<std::size_t>& observe = {}) {
  const std::size_t N = F.num_vars();
  const Homotopy h = Homotopy::between(detail::lagrange_system(F, from, chart, observe), detail::lagrange_system(F, to, chart, observe), 1.0);
  CenterTransport out;
  out.paths = track_batch(h, points, opts);
  const std::vector<std::size_t> xs = observe.empty() ? iota_coords(0, N) : observe;
  for (const auto& p : out.paths) {
    if (p.status == PathStatus::Truncated) continue;
    const CVec lim = p.limit_on(xs, opts.t_min);
    if (lim.allFinite() && lim.norm() < 1e6) out.x_limits.push_back(lim);
  }
  return out;
}

// Moves a complete critical set at a generic center to `target_center`.
inline CriticalPointSet parameter_homotopy_center(const PolynomialSystem& F, const CriticalPointSet& solved_at, const CVec& target_center,
                                                  const CriticalOptions& co = {}) {
  detail::check_critical_input(F, target_center);
  const std::size_t N = F.num_vars();
  std::vector<CVec> starts;
  for (const auto& p : solved_at.points) {
    // back to the chart
    const Complex s = solved_at.chart.cast<Complex>().dot(p.lambda);
    CVec z(static_cast<Index>(N) + p.lambda.size());
    z << p.x, p.lambda / s;
    starts.push_back(z);
  }
  CriticalPointSet out;
  out.center = target_center;
  out.chart = solved_at.chart;
  out.distance_coords = solved_at.distance_coords;
  out.method = solved_at.method;
  out.seed = solved_at.seed;
  out.start_count = starts.size();
  TrackOptions o = co.track;
  CenterTransport tr = transport_center(F, out.chart, solved_at.center, starts, target_center, o, out.distance_coords);
  // crossing paths show up as duplicate endpoints; rerun once with tighter steps
  auto distinct = [&](const std::vector<PathResult>& ps) {
    SolutionSet s;
    s.dedup_tol = co.dedup_tol;
    std::size_t conv = 0;
    for (const auto& p : ps)
      if (p.status == PathStatus::Converged) ++conv, s.insert(p.endpoint, 0.0);
    return conv == s.size();
  };
  if (!distinct(tr.paths)) {
    o = o.tightened();
    tr = transport_center(F, out.chart, solved_at.center, starts, target_center, o, out.distance_coords);
    out.notes.push_back("path crossing detected; rerun with tightened steps");
  }
  out.paths = tr.paths.size();
  out.projected_limits = tr.x_limits;
  const std::vector<CVec> ends = detail::endpoints(tr.paths, &out.singular);
  detail::collect_critical(detail::lagrange_system(F, target_center, out.chart, out.distance_coords), N, ends, co, out);
  return out;
}

// Critical points of the squared distance from x_star on V(F).
inline CriticalPointSet solve_critical(const PolynomialSystem& F, const CVec& x_star, Rng& rng, const CriticalOptions& co = {},
                                       const std::vector<CVec>& seeds = {}) {
  detail::check_critical_input(F, x_star);
  const std::size_t N = F.num_vars(), n = F.size(), V = N + n + 1;
  CriticalPointSet out;
  out.center = x_star;
  out.seed = rng.seed();
  out.method = co.method;
  out.distance_coords = co.distance_coords;
  out.chart = detail::random_chart(n + 1, rng);
  const auto& dc = co.distance_coords;
  const PolynomialSystem G = detail::lagrange_system(F, x_star, out.chart, dc);
  if (co.method == CriticalMethod::Monodromy) {
    if (seeds.empty()) throw Error(ErrorKind::Precondition, "solve_critical: monodromy needs seed points on V(F)");
    for (const auto& s : seeds)
      if (F.residual(s) > 1e-8) throw Error(ErrorKind::Precondition, "solve_critical: a seed point is not on V(F)");
    // every seed is critical for its own generic center; all are moved to the first one
    auto [q0, l0] = detail::center_through(F, seeds[0], out.chart, rng);
    SolutionSet start;
    start.dedup_tol = co.dedup_tol;
    CVec z0(static_cast<Index>(V));
    z0 << seeds[0], l0;
    start.insert(z0, 0.0);
    for (std::size_t k = 1; k < seeds.size(); ++k) {
      auto [qk, lk] = detail::center_through(F, seeds[k], out.chart, rng);
      CVec zk(static_cast<Index>(V));
      zk << seeds[k], lk;
      const auto moved = track_batch(Homotopy::between(detail::lagrange_system(F, qk, out.chart, dc), detail::lagrange_system(F, q0, out.chart, dc), 1.0),
                                     {zk}, co.track);
      if (moved[0].status == PathStatus::Converged) start.insert(moved[0].endpoint, moved[0].residual);
    }
    const PolynomialSystem base = detail::lagrange_system(F, q0, out.chart, dc);
    const MemberFn member = [&](Rng& r) {
      CVec q = r.unit_complex_vector(static_cast<Index>(N));
      return detail::lagrange_system(F, q, out.chart, dc);
    };
    MonodromyStats stats;
    const SolutionSet generic = monodromy_populate_family(base, member, start, rng, co.stall_limit, co.track, {}, &stats);
    CriticalPointSet at_q0;
    at_q0.center = q0;
    at_q0.chart = out.chart;
    at_q0.distance_coords = dc;
    at_q0.method = co.method;
    CriticalOptions loose = co;
    loose.real_tol = 0.0;
    detail::collect_critical(base, N, generic.points, loose, at_q0);
    out = parameter_homotopy_center(F, at_q0, x_star, co);
    out.seed = rng.seed();
    out.notes.insert(out.notes.begin(), std::to_string(generic.size()) + " critical points at a generic complex center after " +
                                            std::to_string(stats.loops) + " monodromy loops");
    return out;
  }
  SolveReport sr;
  if (co.method == CriticalMethod::TotalDegree) {
    sr = total_degree_solve_report(G, rng, co.track);
  } else {
    sr = multihomogeneous_solve_report(G, {iota_coords(0, N), iota_coords(N, V)}, rng, co.track);
  }
  out.start_count = sr.start_count;
  out.paths = sr.paths.size();
  const std::vector<CVec> ends = detail::endpoints(sr.paths, &out.singular);
  detail::collect_critical(G, N, ends, co, out);
  if (out.points.empty() && out.start_count > 0)
    out.notes.push_back("EmptyCritical: no finite critical points; the critical locus is likely positive-dimensional");
  return out;
}

struct GradientDescentResult {
  PathResult path;
  std::optional<CriticalPoint> point;
  std::string diagnostic;  // NoLocalCertificate reason when point is empty
};

// The Newton homotopy F(z) - t F(x*) with multipliers started at [1, 0, ..., 0]; real data
// keeps the path real, so a smooth convergent path ends at a real critical point.
inline GradientDescentResult gradient_descent_homotopy(const PolynomialSystem& F, const Eigen::VectorXd& x_star,
                                                       const TrackOptions& opts = {}) {
  const CVec xs = x_star.cast<Complex>();
  detail::check_critical_input(F, xs);
  const std::size_t N = F.num_vars(), n = F.size(), V = N + n + 1;
  Eigen::VectorXd chart = Eigen::VectorXd::Zero(static_cast<Index>(n + 1));
  chart[0] = 1.0;
  const PolynomialSystem G = detail::lagrange_system(F, xs, chart);
  std::vector<Polynomial> shifted = G.polys();
  const CVec Fx = F.evaluate(xs);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = shifted[i] - Polynomial::constant(V, Fx[static_cast<Index>(i)]);
  const Homotopy h = Homotopy::between(PolynomialSystem(V, shifted), G, 1.0);
  CVec z0 = CVec::Zero(static_cast<Index>(V));
  z0.head(static_cast<Index>(N)) = xs;
  z0[static_cast<Index>(N)] = 1.0;
  GradientDescentResult out;
  out.path = track(h, z0, opts);
  if (out.path.status != PathStatus::Converged) {
    out.diagnostic = std::string("NoLocalCertificate: path ended ") + to_string(out.path.status);
    return out;
  }
  const RefineResult r = newton_refine(G, out.path.endpoint, 1e-13);
  CriticalPoint cp;
  cp.x = r.point.head(static_cast<Index>(N));
  cp.lambda = detail::normalize_projective(r.point.tail(static_cast<Index>(n + 1)));
  cp.flag = detail::real_flag(cp.x, 1e-8);
  cp.distance = (cp.x.real() - x_star).squaredNorm();
  cp.residual = r.residual;
  out.point = cp;
  return out;
}

}  // namespace joinrank
