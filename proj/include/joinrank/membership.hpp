#pragma once

#include <map>
#include <numeric>

#include "varieties.hpp"

namespace joinrank {

enum class Constructible { InJ0, NotInJ0, Inconclusive };

inline const char* to_string(Constructible c) {
  switch (c) {
    case Constructible::InJ0: return "InJ0";
    case Constructible::NotInJ0: return "NotInJ0";
    case Constructible::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct PathEvidence {
  PathStatus status = PathStatus::Truncated;
  CVec image_limit;
  bool projects_to_P = false;
  bool limit_in_incidence = false;
  std::string item;
};

struct MembershipReport {
  bool in_closure = false;
  std::size_t multiplicity = 0;
  Constructible constructible = Constructible::Inconclusive;
  std::optional<CVec> decomposition;  // a point of the incidence variety over P
  std::size_t paths_tracked = 0;
  std::vector<CVec> limiting_projections;
  std::vector<PathEvidence> evidence;
  std::vector<std::string> notes;
};

struct MembershipOptions {
  TrackOptions track;
  double point_tol = 1e-6;
  int reruns = 2;
};

namespace detail {

inline CVec lift_image(const Incidence& inc, const CVec& P) {
  CVec x = CVec::Zero(static_cast<Index>(inc.num_vars()));
  for (std::size_t i = 0; i < inc.image_coords.size(); ++i) x[static_cast<Index>(inc.image_coords[i])] = P[static_cast<Index>(i)];
  return x;
}

// A finite limit lies on the incidence variety unless the patch scalar lambda_0 vanishes there.
inline bool in_incidence(const Incidence& inc, const PathResult& p) {
  if (!p.finite()) return false;
  if (inc.system.residual(p.endpoint) > 1e-6) return false;
  if (inc.scalar_coord) {
    const double l0 = std::abs(p.endpoint[static_cast<Index>(*inc.scalar_coord)]);
    return l0 > 1e-6 * (1.0 + p.endpoint.norm());
  }
  return true;
}

// Gauss-Newton on the incidence equations plus pi(x) = P.
inline CVec polish_over(const Incidence& inc, const CVec& x, const CVec& P) {
  std::vector<Polynomial> eqs = inc.system.polys();
  const std::size_t n = inc.num_vars();
  for (std::size_t i = 0; i < inc.image_coords.size(); ++i)
    eqs.push_back(Polynomial::variable(n, inc.image_coords[i]) - Polynomial::constant(n, P[static_cast<Index>(i)]));
  return newton_refine_ls(PolynomialSystem(n, eqs), x, 1e-14, 12).point;
}

inline PathEvidence classify(const Incidence& inc, const PathResult& p, const CVec& P, double tol, double t_min) {
  PathEvidence e;
  e.status = p.status;
  e.image_limit = restrict_coords(p.limit(t_min), inc.image_coords);
  e.limit_in_incidence = in_incidence(inc, p);
  const bool image_ok = e.image_limit.allFinite() && e.image_limit.norm() < 1e8;
  e.projects_to_P = image_ok && relative_distance(e.image_limit, P) < tol;
  return e;
}

// Early step-size collapse or truncation means the path was lost, not that it ended singular.
inline bool path_failed(const PathResult& p, const TrackOptions& o) {
  return p.status == PathStatus::Truncated || (p.status == PathStatus::Singular && p.t_reached > o.t_min * 1.0000001);
}

}  // namespace detail

// Prop. 1 Items 1-4 from a pseudowitness set.
inline MembershipReport membership_test(const PseudoWitnessSet& pw, const CVec& P, Rng& rng, const MembershipOptions& mo = {}) {
  const Incidence& inc = pw.inc;
  if (static_cast<std::size_t>(P.size()) != inc.image_coords.size()) throw Error(ErrorKind::Input, "membership_test: point has wrong length");
  const std::vector<CVec> Uprime = pw.one_lift_each();
  const std::size_t n = inc.num_vars();
  MembershipReport rep;
  std::vector<PathResult> paths;
  LinearSlice target;
  for (int attempt = 0; attempt <= mo.reruns; ++attempt) {
    const LinearSlice LP = random_slice_on(n, inc.image_coords, pw.image_dim, detail::lift_image(inc, P), rng);
    target = stack(LP, pw.slice_fiber);
    paths = move_slice(inc.system, pw.slice(), Uprime, target, rng.unit_complex(), mo.track);
    rep.paths_tracked += paths.size();
    bool failed = false;
    for (const auto& p : paths) failed = failed || detail::path_failed(p, mo.track);
    if (!failed) break;
    warn("membership_test: SingularPath before classification; retrying with a fresh slice");
    rep.notes.push_back("SingularPath warning on attempt " + std::to_string(attempt));
  }
  bool all_in_incidence = true;
  for (const auto& p : paths) {
    PathEvidence e = detail::classify(inc, p, P, mo.point_tol, mo.track.t_min);
    e.item = "Item1";
    all_in_incidence = all_in_incidence && e.limit_in_incidence;
    rep.limiting_projections.push_back(e.image_limit);
    if (e.projects_to_P) {
      ++rep.multiplicity;
      if (e.limit_in_incidence && !rep.decomposition) {
        rep.decomposition = p.endpoint;
        e.item = "Item2";
      }
    }
    rep.evidence.push_back(e);
  }
  rep.in_closure = rep.multiplicity >= 1;
  if (rep.decomposition) rep.decomposition = detail::polish_over(inc, *rep.decomposition, P);
  if (!rep.in_closure) {
    rep.constructible = Constructible::NotInJ0;
    rep.notes.push_back(all_in_incidence ? "Item3: every lift converges and none projects to P" : "Item1: P is not in the closure");
    return rep;
  }
  if (rep.decomposition) {
    rep.constructible = Constructible::InJ0;
    return rep;
  }
  // Item 2 failed on U'; escalate to the remaining lifts in U.
  std::vector<CVec> rest;
  for (const auto& u : pw.points.points) {
    bool in_prime = false;
    for (const auto& v : Uprime)
      if (relative_distance(u, v) < pw.points.dedup_tol) in_prime = true;
    if (!in_prime) rest.push_back(u);
  }
  if (!rest.empty()) {
    const auto more = move_slice(inc.system, pw.slice(), rest, target, rng.unit_complex(), mo.track);
    rep.paths_tracked += more.size();
    for (const auto& p : more) {
      PathEvidence e = detail::classify(inc, p, P, mo.point_tol, mo.track.t_min);
      e.item = "Item2 (escalated to U)";
      if (e.projects_to_P && e.limit_in_incidence && !rep.decomposition) rep.decomposition = p.endpoint;
      rep.evidence.push_back(e);
    }
  }
  if (rep.decomposition) {
    rep.decomposition = detail::polish_over(inc, *rep.decomposition, P);
    rep.constructible = Constructible::InJ0;
    return rep;
  }
  rep.constructible = Constructible::Inconclusive;
  rep.notes.push_back(
      "Item4: every lift projecting to P has no limit in the incidence variety, so either P is in the join minus the "
      "constructible join, or the fiber over P has dimension above the generic fiber dimension");
  return rep;
}

// ---------------------------------------------------------------------------------------------

struct FiberComponent {
  std::size_t dim = 0;
  std::size_t deg = 0;
  SolutionSet witness_points;
  LinearSlice slice;  // the remaining general slice rows, codim = dim
  bool trace_verified = false;
  bool pinned = false;  // found after every m_i was imposed
};

struct FiberDecomposition {
  std::vector<FiberComponent> components;
  bool nonempty = false;
  PolynomialSystem fiber_system;        // incidence system plus the linear conditions fixing P
  std::vector<std::size_t> stage_counts;  // finite endpoints after each swap
  std::vector<std::size_t> fiber_counts;  // of which on the fiber
  std::size_t witness_degree = 0;
  std::string diagnostic;
};

namespace detail {

// Union-find grouping of witness points by monodromy plus per-group trace tests.
inline std::vector<std::vector<std::size_t>> group_by_monodromy(const PolynomialSystem& g, const LinearSlice& slice,
                                                               const std::vector<CVec>& pts, Rng& rng, const TrackOptions& opts,
                                                               std::size_t stall_limit = 5) {
  const std::size_t m = pts.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  auto groups_of = [&] {
    std::map<std::size_t, std::vector<std::size_t>> gm;
    for (std::size_t i = 0; i < m; ++i) gm[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [k, v] : gm) out.push_back(v);
    return out;
  };
  auto all_complete = [&] {
    for (const auto& grp : groups_of()) {
      std::vector<CVec> sub;
      for (auto i : grp) sub.push_back(pts[i]);
      if (!trace_test(g, slice, sub, rng, {}, std::nullopt, opts).passed) return false;
    }
    return true;
  };
  if (m <= 1 || slice.codim() == 0) return groups_of();
  std::size_t stall = 0;
  for (std::size_t loop = 0; loop < 200 && stall < stall_limit; ++loop) {
    const LinearSlice mid = random_slice(g.num_vars(), slice.codim(), std::nullopt, rng);
    const auto out = move_slice(g, slice, pts, mid, rng.unit_complex(), opts);
    std::vector<CVec> midpts;
    std::vector<std::size_t> origin;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i].status == PathStatus::Converged) {
        midpts.push_back(out[i].endpoint);
        origin.push_back(i);
      }
    const auto back = move_slice(g, mid, midpts, slice, rng.unit_complex(), opts);
    bool merged = false;
    for (std::size_t j = 0; j < back.size(); ++j) {
      if (back[j].status != PathStatus::Converged) continue;
      for (std::size_t i = 0; i < m; ++i)
        if (relative_distance(back[j].endpoint, pts[i]) < 1e-6) {
          const std::size_t a = find(origin[j]), b = find(i);
          if (a != b) {
            parent[a] = b;
            merged = true;
          }
        }
    }
    stall = merged ? 0 : stall + 1;
    if (groups_of().size() == 1) break;
    if (stall >= stall_limit / 2 + 1 && all_complete()) break;
  }
  return groups_of();
}

}  // namespace detail

// Cascade: starting from a witness set of the incidence variety, swap the general slice rows
// one at a time for general hyperplanes through the fiber over P.
// A point counts as over P when its image agrees to fiber_tol; the m_i pass through P exactly,
// so genuine fiber points match to solver precision.
inline FiberDecomposition fiber_decomposition(const Incidence& inc, const CVec& P, Rng& rng, const TrackOptions& opts = {},
                                              std::size_t image_constraints = 0, double fiber_tol = 1e-8) {
  const std::size_t n = inc.num_vars();
  const std::size_t D = inc.dim;
  const std::size_t M = image_constraints ? image_constraints : inc.image_coords.size();
  const std::size_t swaps = std::min(M, D);
  FiberDecomposition fd;

  const WitnessSet w = witness_set(inc.system, D, rng, opts);
  fd.witness_degree = w.deg;
  const CVec xP = detail::lift_image(inc, P);
  // m_i: general hyperplanes in the image coordinates through P
  const LinearSlice mslice = random_slice_on(n, inc.image_coords, M, xP, rng);
  auto mrow = [&](std::size_t i) {
    LinearSlice s;
    s.A = mslice.A.row(static_cast<Index>(i));
    s.b = mslice.b.segment(static_cast<Index>(i), 1);
    return s;
  };
  auto on_fiber = [&](const CVec& x) { return relative_distance(inc.image(x), P) < fiber_tol; };

  LinearSlice current = w.slice;
  std::vector<CVec> live = w.points.points;
  for (std::size_t i = 0; i < swaps; ++i) {
    LinearSlice next = current;
    next.A.row(static_cast<Index>(i)) = mslice.A.row(static_cast<Index>(i));
    next.b[static_cast<Index>(i)] = mslice.b[static_cast<Index>(i)];
    const auto paths = move_slice(inc.system, current, live, next, rng.unit_complex(), opts);
    PolynomialSystem check = inc.system | next.as_system();
    // With more image conditions than slice rows, the leftover m's are imposed as a filter.
    const bool last = i + 1 == swaps;
    SolutionSet ends;
    for (const auto& p : paths)
      if (p.status == PathStatus::Converged) ends.insert(p.endpoint, check.residual(p.endpoint));
    std::vector<CVec> fiber_pts, rest;
    const std::size_t cdim_here = D - (i + 1);
    // Before every m_i is imposed, P is not pinned: keep a point only if it stays over P when
    // the remaining general rows are translated.
    const bool pinned = i + 1 >= M;
    LinearSlice rem_here;
    rem_here.A = next.A.bottomRows(static_cast<Index>(cdim_here));
    rem_here.b = next.b.tail(static_cast<Index>(cdim_here));
    LinearSlice fixed_here;
    fixed_here.A = next.A.topRows(static_cast<Index>(i + 1));
    fixed_here.b = next.b.head(static_cast<Index>(i + 1));
    const PolynomialSystem g_here = inc.system | fixed_here.as_system();
    const CVec shift = rng.unit_complex_vector(static_cast<Index>(cdim_here));
    for (const auto& x : ends.points) {
      bool fib = on_fiber(x);
      if (fib && !pinned && cdim_here > 0) {
        const auto moved = move_slice(g_here, rem_here, std::vector<CVec>{x}, rem_here.translated(shift, 0.1), rng.unit_complex(), opts);
        fib = moved[0].status == PathStatus::Converged && on_fiber(moved[0].endpoint);
      }
      (fib ? fiber_pts : rest).push_back(x);
    }
    fd.stage_counts.push_back(ends.size());
    fd.fiber_counts.push_back(fiber_pts.size());
    if (!fiber_pts.empty()) {
      const std::size_t cdim = D - (i + 1);
      // Remaining general rows (i+1 .. D-1) cut the component down to points.
      LinearSlice rem;
      rem.A = next.A.bottomRows(static_cast<Index>(cdim));
      rem.b = next.b.tail(static_cast<Index>(cdim));
      LinearSlice fixed;
      fixed.A = next.A.topRows(static_cast<Index>(i + 1));
      fixed.b = next.b.head(static_cast<Index>(i + 1));
      const PolynomialSystem g = inc.system | fixed.as_system();
      // Junk: points lying on a higher-dimensional component already found.
      std::vector<CVec> clean;
      for (const auto& x : fiber_pts) {
        bool junk = false;
        for (const auto& c : fd.components) {
          if (c.dim <= cdim) continue;
          const LinearSlice through = c.slice.through(x);
          const auto tp = move_slice(fd.fiber_system, c.slice, c.witness_points.points, through, rng.unit_complex(), opts);
          for (const auto& q : tp)
            if (q.status == PathStatus::Converged && relative_distance(q.endpoint, x) < 1e-6) junk = true;
        }
        if (!junk) clean.push_back(x);
      }
      if (fd.fiber_system.num_vars() == 0) fd.fiber_system = g;
      if (!clean.empty()) {
        const auto groups = detail::group_by_monodromy(g, rem, clean, rng, opts);
        for (const auto& grp : groups) {
          FiberComponent c;
          c.dim = cdim;
          c.pinned = pinned;
          c.slice = rem;
          for (auto k : grp) c.witness_points.insert(clean[k], 0.0);
          c.deg = c.witness_points.size();
          c.trace_verified = cdim == 0 || trace_test(g, rem, c.witness_points.points, rng, {}, std::nullopt, opts).passed;
          fd.components.push_back(std::move(c));
        }
      }
    }
    live = rest;
    current = next;
    if (live.empty() && !last) {
      fd.diagnostic = "EmptyFiber: all paths lost after swap " + std::to_string(i + 1) + " of " + std::to_string(swaps);
      break;
    }
  }
  if (fd.fiber_system.num_vars() == 0) {
    LinearSlice fixed;
    fixed.A = current.A.topRows(static_cast<Index>(swaps));
    fixed.b = current.b.head(static_cast<Index>(swaps));
    fd.fiber_system = inc.system | fixed.as_system();
  }
  fd.nonempty = !fd.components.empty();
  if (!fd.nonempty && fd.diagnostic.empty()) fd.diagnostic = "EmptyFiber: no endpoint of the final stage lies over P";
  return fd;
}

inline FiberDecomposition fiber_decomposition(const AbstractJoin& J, const CVec& P, Rng& rng, const TrackOptions& opts = {},
                                              double fiber_tol = 1e-8) {
  return fiber_decomposition(J.incidence(), P, rng, opts, J.mode == JoinMode::PatchWithScalars ? J.ambient - 1 : J.ambient, fiber_tol);
}

// Degenerates the remaining general rows of a fiber component one at a time to general
// hyperplanes vanishing on {x_coords = 0}; returns the endpoint counts per stage and whether
// any final point has all those coordinates zero.
struct RestrictionResult {
  std::vector<std::size_t> stage_counts;
  std::vector<std::size_t> zero_counts;
  std::vector<CVec> final_points;
};

inline RestrictionResult restrict_fiber(const PolynomialSystem& fiber_system, const FiberComponent& comp,
                                        const std::vector<std::size_t>& coords, std::size_t rows, Rng& rng,
                                        const TrackOptions& opts = {}) {
  if (rows > comp.slice.codim()) throw Error(ErrorKind::Input, "restrict_fiber: more rows than the component slice has");
  const std::size_t n = fiber_system.num_vars();
  RestrictionResult out;
  const LinearSlice r = random_slice_on(n, coords, rows, CVec::Zero(static_cast<Index>(n)), rng);
  LinearSlice current = comp.slice;
  std::vector<CVec> live = comp.witness_points.points;
  for (std::size_t i = 0; i < rows; ++i) {
    LinearSlice next = current;
    next.A.row(static_cast<Index>(i)) = r.A.row(static_cast<Index>(i));
    next.b[static_cast<Index>(i)] = r.b[static_cast<Index>(i)];
    const auto paths = move_slice(fiber_system, current, live, next, rng.unit_complex(), opts);
    const PolynomialSystem check = fiber_system | next.as_system();
    SolutionSet ends;
    for (const auto& p : paths)
      if (p.status == PathStatus::Converged) ends.insert(p.endpoint, check.residual(p.endpoint));
    std::size_t zeros = 0;
    for (const auto& x : ends.points)
      if (restrict_coords(x, coords).norm() < 1e-6 * (1 + x.norm())) ++zeros;
    out.stage_counts.push_back(ends.size());
    out.zero_counts.push_back(zeros);
    live = ends.points;
    current = next;
    if (live.empty()) {
      for (std::size_t j = i + 1; j < rows; ++j) {
        out.stage_counts.push_back(0);
        out.zero_counts.push_back(0);
      }
      break;
    }
  }
  out.final_points = live;
  return out;
}

// ---------------------------------------------------------------------------------------------

// Reduction to the curve case. Slice the image by a general codim (d-1) space L_P through P.
// Witness points of pi^{-1}(C_P) for a general slice over all coordinates expose components
// lying over {P}; components dominating C_P are transported to a general hyperplane m through P
// and judged by Item 5.
inline MembershipReport curve_section_membership(const PseudoWitnessSet& pw, const CVec& P, Rng& rng,
                                                 const MembershipOptions& mo = {}) {
  const Incidence& inc = pw.inc;
  const std::size_t n = inc.num_vars();
  const std::size_t d = pw.image_dim;
  if (d < 1) throw Error(ErrorKind::Precondition, "curve_section_membership: image dimension must be positive");
  MembershipReport rep;
  const CVec xP = detail::lift_image(inc, P);
  const LinearSlice LP = random_slice_on(n, inc.image_coords, d - 1, xP, rng);
  const std::vector<CVec>& U = pw.points.points;

  // (a) general slice over all coordinates: points of the section curve's incidence variety
  const LinearSlice G = random_slice(n, pw.fiber_dim + 1, std::nullopt, rng);
  const auto wp = move_slice(inc.system, pw.slice(), U, stack(LP, G), rng.unit_complex(), mo.track);
  rep.paths_tracked += wp.size();
  for (const auto& p : wp) {
    if (p.status != PathStatus::Converged) continue;
    if (relative_distance(inc.image(p.endpoint), P) < mo.point_tol && detail::in_incidence(inc, p)) {
      rep.decomposition = p.endpoint;
      PathEvidence e;
      e.status = p.status;
      e.image_limit = inc.image(p.endpoint);
      e.projects_to_P = e.limit_in_incidence = true;
      e.item = "fiber evidence: a component of the section lies over P";
      rep.evidence.push_back(e);
      break;
    }
  }

  // (b) components dominating C_P: general image hyperplane m1, then m1 -> hyperplane through P
  const LinearSlice m1 = random_slice_on(n, inc.image_coords, 1, std::nullopt, rng);
  const LinearSlice start = stack(stack(LP, m1), pw.slice_fiber);
  const auto first = move_slice(inc.system, pw.slice(), U, start, rng.unit_complex(), mo.track);
  rep.paths_tracked += first.size();
  std::vector<CVec> curve_pts;
  for (const auto& p : first)
    if (p.status == PathStatus::Converged) {
      bool seen = false;
      for (const auto& q : curve_pts)
        if (relative_distance(q, p.endpoint) < 1e-6) seen = true;
      if (!seen) curve_pts.push_back(p.endpoint);
    }
  const LinearSlice mP = random_slice_on(n, inc.image_coords, 1, xP, rng);
  const LinearSlice target = stack(stack(LP, mP), pw.slice_fiber);
  const auto second = move_slice(inc.system, start, curve_pts, target, rng.unit_complex(), mo.track);
  rep.paths_tracked += second.size();
  for (const auto& p : second) {
    PathEvidence e = detail::classify(inc, p, P, mo.point_tol, mo.track.t_min);
    e.item = "Item5";
    rep.limiting_projections.push_back(e.image_limit);
    if (e.projects_to_P) {
      ++rep.multiplicity;
      if (e.limit_in_incidence && !rep.decomposition) rep.decomposition = p.endpoint;
    }
    rep.evidence.push_back(e);
  }
  rep.in_closure = rep.multiplicity >= 1 || rep.decomposition.has_value();
  if (rep.decomposition) {
    rep.decomposition = detail::polish_over(inc, *rep.decomposition, P);
    rep.constructible = Constructible::InJ0;
  } else {
    rep.constructible = Constructible::NotInJ0;
    rep.notes.push_back("Item5 on the section curve: no lift converges in the incidence variety over P, and no component of the "
                        "section lies over P");
  }
  return rep;
}

}  // namespace joinrank
