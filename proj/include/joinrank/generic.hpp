#pragma once

#include "boundary.hpp"

namespace joinrank {

enum class SeedProvenance { RandomStart, UserSeed, FiberPoint };

inline const char* to_string(SeedProvenance s) {
  switch (s) {
    case SeedProvenance::RandomStart: return "random_start";
    case SeedProvenance::UserSeed: return "user_seed";
    case SeedProvenance::FiberPoint: return "fiber_point";
  }
  return "?";
}

enum class DecomposeOutcome { Success, GenericFailure, FiberMiss, AtInfinity };

inline const char* to_string(DecomposeOutcome o) {
  switch (o) {
    case DecomposeOutcome::Success: return "Success";
    case DecomposeOutcome::GenericFailure: return "GenericFailure";
    case DecomposeOutcome::FiberMiss: return "FiberMiss";
    case DecomposeOutcome::AtInfinity: return "AtInfinity";
  }
  return "?";
}

struct Decomposition {
  std::vector<CVec> parameters;  // one vector per factor
  double reconstruction_residual = 0.0;  // |sum phi_i(a_i) - P| / (1 + |P|)
  bool is_real = false;
  SeedProvenance provenance = SeedProvenance::RandomStart;
  std::string seed_source;
};

struct DecomposeResult {
  DecomposeOutcome outcome = DecomposeOutcome::GenericFailure;
  std::optional<Decomposition> decomposition;
  PathResult path;  // the last path tracked
  std::size_t attempts = 0;
  CVec endpoint;     // full incidence point (dehomogenized when finite)
  CVec image_limit;  // projection of the endpoint
  double scale = 1.0;
  std::string diagnostic;
};

struct GenericOptions {
  TrackOptions track;
  std::size_t retries = 3;
  bool rescale = true;
  double real_tol = 1e-8;
  double fiber_tol = 1e-6;
};

namespace detail {

inline bool params_real(const std::vector<CVec>& ps, double tol) {
  for (const auto& p : ps)
    for (Index j = 0; j < p.size(); ++j)
      if (std::abs(p[j].imag()) > tol * (1.0 + std::abs(p[j].real()))) return false;
  return true;
}

inline double reconstruction_residual(const AbstractJoin& J, const std::vector<CVec>& params, const CVec& P) {
  return (J.reconstruct(params) - P).norm() / (1.0 + P.norm());
}

// Coefficient rescaling: P is divided coordinatewise by `coord`, the parameters of the scaled
// problem are multiplied by `param` to get back decompositions of P.
struct JoinScaling {
  Eigen::VectorXd coord;
  std::vector<Eigen::VectorXd> param;

  CVec scale_point(const CVec& P) const { return P.cwiseQuotient(coord.cast<Complex>()); }
  std::vector<CVec> unscale(std::vector<CVec> ps) const {
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i] = ps[i].cwiseProduct(param[i].cast<Complex>());
    return ps;
  }
  std::vector<CVec> scale(std::vector<CVec> ps) const {
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i] = ps[i].cwiseQuotient(param[i].cast<Complex>());
    return ps;
  }
};

inline JoinScaling identity_scaling(const AbstractJoin& J) {
  JoinScaling s;
  s.coord = Eigen::VectorXd::Ones(static_cast<Index>(J.ambient));
  for (const auto& f : J.factors) s.param.push_back(Eigen::VectorXd::Ones(static_cast<Index>(f.param_dim())));
  return s;
}

// Weighted fit of log2 |P| when every factor carries the same coordinate weights; otherwise a
// common power of two for max |P| when every factor can absorb it; otherwise no scaling.
inline JoinScaling join_scaling(const AbstractJoin& J, const CVec& P) {
  JoinScaling s = identity_scaling(J);
  const double m = P.cwiseAbs().maxCoeff();
  if (!(m > 0.0)) return s;
  bool weighted = true, common = true;
  for (const auto& f : J.factors) {
    weighted = weighted && f.coord_weights.size() > 0 && f.coord_weights.rows() == J.factors[0].coord_weights.rows() &&
               f.coord_weights.cols() == J.factors[0].coord_weights.cols() && f.coord_weights == J.factors[0].coord_weights;
    common = common && !f.scale_exponents.empty();
  }
  if (weighted) {
    const Eigen::MatrixXd& C = J.factors[0].coord_weights;
    std::vector<Index> rows;
    for (Index j = 0; j < P.size(); ++j)
      if (std::abs(P[j]) > 1e-12 * m) rows.push_back(j);
    Eigen::MatrixXd A(static_cast<Index>(rows.size()), C.cols());
    Eigen::VectorXd b(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      A.row(static_cast<Index>(r)) = C.row(rows[r]);
      b[static_cast<Index>(r)] = std::log2(std::abs(P[rows[r]]));
    }
    const Eigen::VectorXd w = A.completeOrthogonalDecomposition().solve(b).array().round().matrix();
    s.coord = (C * w).unaryExpr([](double e) { return std::exp2(e); });
    for (std::size_t i = 0; i < J.factors.size(); ++i)
      s.param[i] = (J.factors[i].param_weights * w).unaryExpr([](double e) { return std::exp2(e); });
    return s;
  }
  if (common) {
    const int e = static_cast<int>(std::lround(std::log2(m)));
    s.coord.setConstant(std::ldexp(1.0, e));
    for (std::size_t i = 0; i < J.factors.size(); ++i)
      for (Index j = 0; j < s.param[i].size(); ++j)
        s.param[i][j] = std::exp2(e * J.factors[i].scale_exponents[static_cast<std::size_t>(j)]);
  }
  return s;
}

// Sum phi_i(a_i) - Q in the parameter variables only.
inline PolynomialSystem fiber_equations(const AbstractJoin& J, const CVec& Q) {
  const std::size_t np = J.num_params();
  std::vector<Polynomial> eqs(J.ambient, Polynomial::constant(np, 0.0));
  std::size_t off = 0;
  for (const auto& f : J.factors) {
    std::vector<std::size_t> map(f.param_dim());
    std::iota(map.begin(), map.end(), off);
    const PolynomialSystem e = f.map.embed(np, map);
    for (std::size_t c = 0; c < J.ambient; ++c) eqs[c] = eqs[c] + e[c];
    off += f.param_dim();
  }
  for (std::size_t c = 0; c < J.ambient; ++c) eqs[c] = eqs[c] - Polynomial::constant(np, Q[static_cast<Index>(c)]);
  return PolynomialSystem(np, std::move(eqs));
}

inline CVec flatten(const std::vector<CVec>& params) {
  Index n = 0;
  for (const auto& p : params) n += p.size();
  CVec x(n);
  Index k = 0;
  for (const auto& p : params) x.segment(k, p.size()) = p, k += p.size();
  return x;
}

inline std::vector<CVec> split_params(const AbstractJoin& J, const CVec& x) {
  std::vector<CVec> out;
  Index k = 0;
  for (const auto& f : J.factors) {
    const Index m = static_cast<Index>(f.param_dim());
    out.push_back(x.segment(k, m));
    k += m;
  }
  return out;
}

inline bool complex_less(const CVec& a, const CVec& b) {
  for (Index j = 0; j < a.size(); ++j) {
    const double tol = 1e-6 * (1.0 + std::abs(a[j]));
    if (std::abs(a[j].real() - b[j].real()) > tol) return a[j].real() < b[j].real();
    if (std::abs(a[j].imag() - b[j].imag()) > tol) return a[j].imag() < b[j].imag();
  }
  return false;
}

// Blocks of identical factors sorted, so that reordering summands gives the same key.
inline KeyFn permutation_key(const AbstractJoin& J) {
  return [J](const CVec& x) {
    std::vector<CVec> ps = split_params(J, x);
    std::map<std::string, std::vector<std::size_t>> same;
    for (std::size_t i = 0; i < J.factors.size(); ++i) same[J.factors[i].name].push_back(i);
    std::vector<CVec> out = ps;
    for (const auto& [name, idx] : same) {
      std::vector<CVec> group;
      for (auto i : idx) group.push_back(ps[i]);
      std::sort(group.begin(), group.end(), complex_less);
      for (std::size_t g = 0; g < idx.size(); ++g) out[idx[g]] = group[g];
    }
    return flatten(out);
  };
}

inline Decomposition make_decomposition(const AbstractJoin& J, std::vector<CVec> params, const CVec& P, SeedProvenance prov,
                                        double real_tol, std::string source = {}) {
  Decomposition d;
  d.reconstruction_residual = reconstruction_residual(J, params, P);
  d.is_real = params_real(params, real_tol);
  d.parameters = std::move(params);
  d.provenance = prov;
  d.seed_source = std::move(source);
  return d;
}

}  // namespace detail

// One Newton-homotopy path in the fiber over t P* + (1 - t) P, sliced to a curve through the start.
inline DecomposeResult decompose_generic(const AbstractJoin& J, const CVec& P, Rng& rng, const GenericOptions& go = {},
                                         const std::optional<std::vector<CVec>>& start = std::nullopt) {
  if (static_cast<std::size_t>(P.size()) != J.ambient) throw Error(ErrorKind::Input, "decompose_generic: point has the wrong length");
  if (J.mode != JoinMode::AffineCone) throw Error(ErrorKind::Input, "decompose_generic: affine cone joins only");
  const ImageDimension id = image_dimension(J, rng);
  if (id.dim_image < J.ambient)
    throw Error(ErrorKind::Precondition, "decompose_generic: the join does not fill its ambient space; use decompose_via_projection");
  const std::size_t d = J.num_params() - J.ambient;  // generic fiber dimension
  DecomposeResult res;
  const detail::JoinScaling sc = go.rescale ? detail::join_scaling(J, P) : detail::identity_scaling(J);
  res.scale = sc.coord.maxCoeff();
  const CVec Ph = sc.scale_point(P);
  const std::size_t tries = start ? 1 : std::max<std::size_t>(1, go.retries);
  for (std::size_t k = 0; k < tries; ++k) {
    ++res.attempts;
    std::vector<CVec> a0;
    if (start) {
      a0 = sc.scale(*start);
    } else {
      for (const auto& f : J.factors) a0.push_back(rng.unit_complex_vector(static_cast<Index>(f.param_dim())));
    }
    const CVec x0 = detail::flatten(a0);
    const CVec Pstar = J.reconstruct(a0);
    PolynomialSystem at1 = detail::fiber_equations(J, Pstar), at0 = detail::fiber_equations(J, Ph);
    if (d > 0) {
      const LinearSlice L = random_slice(J.num_params(), d, x0, rng);
      at1 = at1 | L.as_system();
      at0 = at0 | L.as_system();
    }
    res.path = track(Homotopy::between(at1, at0, 1.0), x0, go.track);
    if (res.path.status != PathStatus::Converged) {
      res.diagnostic = std::string("path ended ") + to_string(res.path.status);
      continue;
    }
    const RefineResult r = newton_refine(at0, res.path.endpoint, 1e-13);
    const std::vector<CVec> params = sc.unscale(detail::split_params(J, r.point));
    Decomposition dec = detail::make_decomposition(J, params, P, start ? SeedProvenance::UserSeed : SeedProvenance::RandomStart, go.real_tol);
    if (dec.reconstruction_residual > 1e-6) {
      res.diagnostic = "endpoint does not reconstruct P";
      continue;
    }
    res.endpoint = J.point_from_params(dec.parameters);
    res.image_limit = P;
    res.decomposition = std::move(dec);
    res.outcome = DecomposeOutcome::Success;
    res.diagnostic.clear();
    return res;
  }
  res.outcome = DecomposeOutcome::GenericFailure;
  return res;
}

// Newton homotopy in psi-coordinates: psi(pi(x)) = t psi(pi(x*)) + (1 - t) psi(P) on the incidence.
// The fiber coordinates are compactified when `compactify` is set (finite psi-fibers only), so a
// path whose decomposition escapes to infinity still has an endpoint.
struct ProjectionOptions {
  TrackOptions track;
  bool compactify = true;
  double fiber_tol = 1e-6;
  double real_tol = 1e-8;
  double infinity_tol = 1e-8;
};

inline DecomposeResult decompose_via_projection(const Incidence& inc, const CVec& P, const CMat& psi, const CVec& start,
                                                Rng& rng, const ProjectionOptions& po = {}) {
  const std::size_t n = inc.num_vars(), m = inc.image_coords.size();
  const std::size_t rows = static_cast<std::size_t>(psi.rows());
  if (static_cast<std::size_t>(P.size()) != m || static_cast<std::size_t>(psi.cols()) != m)
    throw Error(ErrorKind::Input, "decompose_via_projection: point or psi has the wrong shape");
  if (static_cast<std::size_t>(start.size()) != n) throw Error(ErrorKind::Input, "decompose_via_projection: start has the wrong length");
  if (inc.system.residual(start) > 1e-8) throw Error(ErrorKind::Precondition, "decompose_via_projection: start is not on the incidence");
  if (rows > inc.dim) throw Error(ErrorKind::Input, "decompose_via_projection: psi has more rows than the incidence dimension");
  const std::size_t d = inc.dim - rows;
  const bool homog = po.compactify && d == 0;

  const CVec Qs = psi * inc.image(start), Q = psi * P;
  auto pinned = [&](const CVec& q, std::size_t nv) {
    std::vector<Polynomial> eqs;
    for (std::size_t r = 0; r < rows; ++r) {
      CVec c(static_cast<Index>(m));
      for (std::size_t j = 0; j < m; ++j) c[static_cast<Index>(j)] = psi(static_cast<Index>(r), static_cast<Index>(j));
      eqs.push_back(Polynomial::linear(nv, inc.image_coords, c, -q[static_cast<Index>(r)]));
    }
    return PolynomialSystem(nv, std::move(eqs));
  };
  DecomposeResult res;
  res.attempts = 1;
  const std::vector<std::size_t> fiber = complement_coords(n, inc.image_coords);
  PolynomialSystem base = inc.system;
  CVec x0 = start;
  std::size_t N = n;
  if (homog) {
    base = detail::homogenize_in(inc.system, fiber);
    N = n + 1;
    std::vector<std::size_t> pv = fiber;
    pv.push_back(n);
    const CVec c = rng.unit_complex_vector(static_cast<Index>(pv.size()));
    base = base | PolynomialSystem(N, {Polynomial::linear(N, pv, c, -1.0)});
    CVec h(static_cast<Index>(N));
    h.head(static_cast<Index>(n)) = start;
    h[static_cast<Index>(n)] = 1.0;
    Complex s = 0.0;
    for (std::size_t j = 0; j < pv.size(); ++j) s += c[static_cast<Index>(j)] * h[static_cast<Index>(pv[j])];
    for (auto v : pv) h[static_cast<Index>(v)] /= s;
    x0 = h;
  }
  PolynomialSystem at1 = base | pinned(Qs, N), at0 = base | pinned(Q, N);
  if (d > 0) {
    const LinearSlice L = random_slice(N, d, x0, rng);
    at1 = at1 | L.as_system();
    at0 = at0 | L.as_system();
  }
  res.path = track(Homotopy::between(at1, at0, 1.0), x0, po.track);
  if (!res.path.finite()) {
    res.outcome = DecomposeOutcome::GenericFailure;
    res.diagnostic = std::string("path ended ") + to_string(res.path.status);
    return res;
  }
  CVec e = res.path.status == PathStatus::Converged ? newton_refine(at0, res.path.endpoint, 1e-13).point : res.path.limit(po.track.t_min);
  res.image_limit = restrict_coords(e, inc.image_coords);
  bool infinite = false;
  if (homog) {
    const Complex y0 = e[static_cast<Index>(n)];
    infinite = std::abs(y0) < po.infinity_tol * e.norm();
    if (!infinite)
      for (auto v : fiber) e[static_cast<Index>(v)] /= y0;
    e.conservativeResize(static_cast<Index>(n));
  }
  res.endpoint = e;
  if (relative_distance(res.image_limit, P) > po.fiber_tol) {
    res.outcome = DecomposeOutcome::FiberMiss;
    res.diagnostic = "the path reached another point of the psi-fiber";
    return res;
  }
  if (infinite) {
    res.outcome = DecomposeOutcome::AtInfinity;
    res.diagnostic = "P is a limit of the path but its fiber point is at infinity";
    return res;
  }
  res.outcome = DecomposeOutcome::Success;
  Decomposition dec;
  dec.parameters = {restrict_coords(e, fiber)};
  dec.reconstruction_residual = inc.system.residual(e);
  dec.is_real = detail::params_real({e}, po.real_tol) && res.path.status == PathStatus::Converged;
  dec.provenance = SeedProvenance::UserSeed;
  res.decomposition = std::move(dec);
  return res;
}

// Join form of the projection variant: the start is a parameter seed; decompositions are split per factor.
inline DecomposeResult decompose_via_projection(const AbstractJoin& J, const CVec& P, const CMat& psi,
                                                const std::optional<std::vector<CVec>>& seed, Rng& rng,
                                                const ProjectionOptions& po = {}) {
  if (J.mode != JoinMode::AffineCone) throw Error(ErrorKind::Input, "decompose_via_projection: affine cone joins only");
  std::vector<CVec> a0;
  if (seed) {
    a0 = *seed;
  } else {
    for (const auto& f : J.factors) a0.push_back(rng.unit_complex_vector(static_cast<Index>(f.param_dim())));
  }
  const Incidence inc = J.incidence();
  DecomposeResult r = decompose_via_projection(inc, P, psi, J.point_from_params(a0), rng, po);
  if (r.decomposition) {
    auto params = J.params_of(r.endpoint);
    *r.decomposition = detail::make_decomposition(J, params, P, seed ? SeedProvenance::UserSeed : SeedProvenance::RandomStart,
                                                  po.real_tol);
    r.decomposition->is_real = r.decomposition->is_real && r.path.status == PathStatus::Converged;
    if (r.decomposition->reconstruction_residual > 1e-6) {
      r.outcome = DecomposeOutcome::FiberMiss;
      r.diagnostic = "endpoint does not reconstruct P";
    }
  }
  return r;
}

struct FiberSet {
  std::vector<Decomposition> decompositions;  // distinct up to reordering identical summands
  MonodromyStats stats;
  std::vector<std::string> warnings;
};

// All decompositions in a finite fiber reachable by monodromy over the point, starting from known ones.
inline FiberSet fiber_monodromy(const AbstractJoin& J, const CVec& P, const std::vector<Decomposition>& seeds, Rng& rng,
                                std::size_t stall_limit = 8, const GenericOptions& go = {}) {
  if (J.num_params() != J.ambient) throw Error(ErrorKind::Input, "fiber_monodromy: the fiber of the parameter map must be finite");
  if (seeds.empty()) throw Error(ErrorKind::Precondition, "fiber_monodromy: no seed decompositions");
  const detail::JoinScaling sc = go.rescale ? detail::join_scaling(J, P) : detail::identity_scaling(J);
  const CVec Ph = sc.scale_point(P);
  const PolynomialSystem base = detail::fiber_equations(J, Ph);
  SolutionSet start;
  for (const auto& d : seeds) start.insert(detail::flatten(sc.scale(d.parameters)), d.reconstruction_residual);
  const MemberFn member = [&](Rng& r) { return detail::fiber_equations(J, r.unit_complex_vector(static_cast<Index>(J.ambient))); };
  FiberSet out;
  const SolutionSet all = monodromy_populate_family(base, member, start, rng, stall_limit, go.track, detail::permutation_key(J), &out.stats);
  for (const auto& x : all.points) {
    const RefineResult r = newton_refine(base, x, 1e-13);
    auto params = sc.unscale(detail::split_params(J, r.point));
    out.decompositions.push_back(detail::make_decomposition(J, params, P, SeedProvenance::FiberPoint, go.real_tol));
  }
  return out;
}

struct TransportResult {
  std::vector<Decomposition> decompositions;  // endpoints that reconstruct the target
  std::vector<PathResult> paths;
  std::vector<std::string> warnings;
};

// Moves a complete fiber over `from` (in psi-coordinates, psi = identity when empty) to the fiber over P.
inline TransportResult fiber_count_transport(const AbstractJoin& J, const CVec& from, const CVec& P,
                                             const std::vector<Decomposition>& known_fiber, const GenericOptions& go = {}) {
  if (J.num_params() != J.ambient) throw Error(ErrorKind::Input, "fiber_count_transport: the fiber of the parameter map must be finite");
  const detail::JoinScaling sc = go.rescale ? detail::join_scaling(J, P) : detail::identity_scaling(J);
  const PolynomialSystem at1 = detail::fiber_equations(J, sc.scale_point(from)), at0 = detail::fiber_equations(J, sc.scale_point(P));
  std::vector<CVec> starts;
  TransportResult out;
  for (const auto& d : known_fiber) {
    const CVec x = detail::flatten(sc.scale(d.parameters));
    if (at1.residual(x) > 1e-8) out.warnings.push_back("a known fiber point is not over the start point");
    starts.push_back(x);
  }
  out.paths = track_batch(Homotopy::between(at1, at0, 1.0), starts, go.track);
  SolutionSet seen;
  const KeyFn key = detail::permutation_key(J);
  for (const auto& p : out.paths) {
    if (p.status != PathStatus::Converged) {
      out.warnings.push_back(std::string("transport path ended ") + to_string(p.status));
      continue;
    }
    const RefineResult r = newton_refine(at0, p.endpoint, 1e-13);
    if (!seen.insert(key(r.point), 0.0)) {
      out.warnings.push_back("two paths reached the same decomposition");
      continue;
    }
    auto params = sc.unscale(detail::split_params(J, r.point));
    Decomposition d = detail::make_decomposition(J, params, P, SeedProvenance::FiberPoint, go.real_tol);
    if (d.reconstruction_residual < 1e-6) out.decompositions.push_back(std::move(d));
  }
  return out;
}

}  // namespace joinrank
