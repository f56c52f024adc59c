#pragma once

#include "membership.hpp"

namespace joinrank {

struct BoundaryOptions {
  TrackOptions track = [] {
    TrackOptions o;
    o.t_min = 1e-3;  // the P coordinates decouple as y0 -> 0; stop early and extrapolate
    return o;
  }();
  double cluster_tol = 1e-6;
  double max_norm = 1e6;
};

struct BoundaryCandidate {
  CVec point;
  std::size_t paths = 0;  // endpoints clustered onto this point
  bool confirmed = false;
  std::string evidence;
};

struct BoundaryReport {
  std::vector<BoundaryCandidate> candidates;
  std::size_t start_points = 0;
  std::size_t paths_tracked = 0;
  std::size_t diverged = 0;
  double beta_abs = 0.0;
};

namespace detail {

// Homogenizes every equation in the variables `fiber` with the new variable y0 = index n.
inline PolynomialSystem homogenize_in(const PolynomialSystem& f, const std::vector<std::size_t>& fiber) {
  const std::size_t n = f.num_vars(), y0 = n;
  std::vector<Polynomial> out;
  for (const auto& p : f.polys()) {
    const int d = p.degree_in(fiber);
    std::vector<Term> terms;
    for (const auto& t : p.terms()) {
      Exponents e(t.exps);
      e.resize(n + 1, 0);
      int dt = 0;
      for (auto v : fiber) dt += t.exps[v];
      e[y0] = d - dt;
      terms.push_back({t.coeff, e});
    }
    out.emplace_back(n + 1, terms);
  }
  return PolynomialSystem(n + 1, out);
}

}  // namespace detail

// Points of C \ pi(J_C) for the curve C = J cut by `curve_slice` (codim dim J - 1, on the image
// coordinates): the fiber coordinates of the section curve are homogenized by y0 and pushed to
// infinity, y0 = beta * t, t: 1 -> 0. Finite image limits are the candidates.
inline BoundaryReport boundary_candidates(const PseudoWitnessSet& pw, const LinearSlice& curve_slice, Rng& rng,
                                          const BoundaryOptions& bo = {}) {
  const Incidence& inc = pw.inc;
  const std::size_t n = inc.num_vars();
  if (curve_slice.num_vars() != inc.image_coords.size())
    throw Error(ErrorKind::Input, "boundary_candidates: curve slice must be written in the image coordinates");
  if (curve_slice.codim() + 1 != pw.image_dim)
    throw Error(ErrorKind::Input, "boundary_candidates: curve slice must have codimension dim J - 1");
  // lift the slice to all variables
  LinearSlice L;
  L.A = CMat::Zero(curve_slice.A.rows(), static_cast<Index>(n));
  for (std::size_t i = 0; i < inc.image_coords.size(); ++i) L.A.col(static_cast<Index>(inc.image_coords[i])) = curve_slice.A.col(static_cast<Index>(i));
  L.b = curve_slice.b;
  const std::vector<std::size_t> fiber = complement_coords(n, inc.image_coords);
  const LinearSlice M2 = random_slice(n, pw.fiber_dim, std::nullopt, rng);
  const PolynomialSystem curve = inc.system | L.as_system() | M2.as_system();
  const PolynomialSystem G = detail::homogenize_in(curve, fiber);
  const std::size_t N = n + 1;
  // random patch on (y0, fiber)
  std::vector<std::size_t> pv = fiber;
  pv.push_back(n);
  const CVec c = rng.unit_complex_vector(static_cast<Index>(pv.size() + 1));
  const Polynomial patch = Polynomial::linear(N, pv, c.head(static_cast<Index>(pv.size())), -1.0);
  const Complex beta = rng.unit_complex();
  const Polynomial y0 = Polynomial::variable(N, n);
  const PolynomialSystem start = G | PolynomialSystem(N, {patch, y0 - Polynomial::constant(N, beta)});
  const PolynomialSystem target = G | PolynomialSystem(N, {patch, y0});

  BoundaryReport rep;
  rep.beta_abs = std::abs(beta);
  Rng srng = rng.split();
  const SolveReport sr = total_degree_solve_report(start, srng, bo.track.t_min < 1e-5 ? bo.track : TrackOptions{});
  rep.start_points = sr.solutions.size();
  const Homotopy h = Homotopy::between(start, target, 1.0);
  const auto paths = track_batch(h, sr.solutions.points, bo.track);
  rep.paths_tracked = paths.size();
  std::vector<std::size_t> img(inc.image_coords);
  for (const auto& p : paths) {
    if (!p.finite() && p.status != PathStatus::Diverged) continue;
    const CVec Q = p.limit_on(img, bo.track.t_min);
    if (p.status == PathStatus::Diverged || !Q.allFinite() || Q.norm() > bo.max_norm) {
      ++rep.diverged;
      continue;
    }
    bool merged = false;
    for (auto& cand : rep.candidates)
      if (relative_distance(cand.point, Q) < bo.cluster_tol) {
        ++cand.paths;
        merged = true;
        break;
      }
    if (!merged) rep.candidates.push_back({Q, 1, false, ""});
  }
  return rep;
}

// A candidate is confirmed when no decomposition lies over it. The candidate is an extrapolated
// limit, accurate to about 1e-9, and a point that close to the boundary has a finite fiber with
// families of large decompositions hugging it; only endpoints found once P is pinned by every
// m_i count as decompositions.
inline bool boundary_confirm(const AbstractJoin& J, BoundaryCandidate& cand, Rng& rng, const TrackOptions& opts = {}) {
  const FiberDecomposition fd = fiber_decomposition(J, cand.point, rng, opts);
  std::size_t pinned = 0, loose = 0;
  for (const auto& c : fd.components) (c.pinned ? pinned : loose) += c.deg;
  cand.confirmed = pinned == 0;
  cand.evidence = cand.confirmed ? "no decomposition over the point (" + fd.diagnostic + ")"
                                 : std::to_string(pinned) + " decomposition(s) over the point";
  if (loose) cand.evidence += "; " + std::to_string(loose) + " near-miss point(s) before P was pinned";
  return cand.confirmed;
}

}  // namespace joinrank
