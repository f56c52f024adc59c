#pragma once

#include <functional>
#include <numbers>

#include "tracker.hpp"

namespace joinrank {

struct SolutionSet {
  std::vector<CVec> points;
  std::vector<double> residuals;
  double dedup_tol = 1e-6;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  // Index of a point within dedup_tol of x, if any.
  std::optional<std::size_t> find(const CVec& x) const {
    for (std::size_t i = 0; i < points.size(); ++i)
      if (relative_distance(points[i], x) < dedup_tol) return i;
    return std::nullopt;
  }

  bool insert(const CVec& x, double residual) {
    if (find(x)) return false;
    points.push_back(x);
    residuals.push_back(residual);
    return true;
  }
};

using KeyFn = std::function<CVec(const CVec&)>;

// Set equality of two point lists up to tolerance (each point matched to a distinct partner).
inline bool same_point_set(const std::vector<CVec>& a, const std::vector<CVec>& b, double tol = 1e-6) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& p : a) {
    bool hit = false;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!used[j] && relative_distance(p, b[j]) < tol) {
        used[j] = hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

struct SolveReport {
  SolutionSet solutions;
  std::vector<PathResult> paths;
  std::size_t start_count = 0;
};

// Square an m x n system (m > n) with a fixed random n x m combination.
inline PolynomialSystem square_up(const PolynomialSystem& f, std::size_t n, Rng& rng) {
  if (f.size() == n) return f;
  if (f.size() < n) throw Error(ErrorKind::Input, "square_up: underdetermined system");
  CMat R(static_cast<Index>(n), static_cast<Index>(f.size()));
  for (Index i = 0; i < R.rows(); ++i)
    for (Index j = 0; j < R.cols(); ++j) R(i, j) = rng.unit_complex();
  return f.combine(R);
}

// Keeps converged endpoints with small residual against `check`, deduplicated in path order.
inline SolutionSet collect_finite(const std::vector<PathResult>& paths, const PolynomialSystem& check, std::uint64_t seed,
                                  double dedup_tol = 1e-6) {
  SolutionSet s;
  s.seed = seed;
  s.dedup_tol = dedup_tol;
  for (const auto& p : paths) {
    if (p.status != PathStatus::Converged) continue;
    CVec x = p.endpoint;
    double r = check.residual(x);
    if (r >= 1e-8 && check.size() > check.num_vars()) {
      const RefineResult rr = newton_refine_ls(check, x);
      x = rr.point;
      r = rr.residual;
    }
    if (r < 1e-8) s.insert(x, r);
  }
  return s;
}

inline SolveReport total_degree_solve_report(const PolynomialSystem& f_in, Rng& rng, const TrackOptions& opts = {}) {
  const std::size_t n = f_in.num_vars();
  if (f_in.size() < n) throw Error(ErrorKind::Input, "total_degree_solve: fewer equations than variables");
  const std::uint64_t seed = rng.next_u64();
  Rng local(seed);
  const PolynomialSystem f = f_in.size() == n ? f_in : square_up(f_in, n, local);
  const auto deg = f.degrees();
  std::vector<Polynomial> g;
  std::size_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] < 1) throw Error(ErrorKind::Input, "total_degree_solve: equation of degree 0");
    Exponents e(n, 0);
    e[i] = deg[i];
    g.emplace_back(n, std::vector<Term>{{1.0, e}, {-1.0, Exponents(n, 0)}});
    count *= static_cast<std::size_t>(deg[i]);
  }
  const Homotopy h = make_segment_homotopy(PolynomialSystem(n, g), f, local);
  std::vector<CVec> starts;
  starts.reserve(count);
  std::vector<int> digit(n, 0);
  for (std::size_t k = 0; k < count; ++k) {
    CVec x(static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) x[static_cast<Index>(i)] = std::polar(1.0, 2.0 * std::numbers::pi * digit[i] / deg[i]);
    starts.push_back(x);
    for (std::size_t i = 0; i < n; ++i) {
      if (++digit[i] < deg[i]) break;
      digit[i] = 0;
    }
  }
  SolveReport rep;
  rep.start_count = count;
  rep.paths = track_batch(h, starts, opts);
  rep.solutions = collect_finite(rep.paths, f_in, seed);
  return rep;
}

inline SolutionSet total_degree_solve(const PolynomialSystem& f, Rng& rng, const TrackOptions& opts = {}) {
  if (f.size() != f.num_vars()) throw Error(ErrorKind::Input, "total_degree_solve: system is not square");
  return total_degree_solve_report(f, rng, opts).solutions;
}

// Linear-product start system respecting a partition of the variables into groups: each
// equation's start polynomial is a product of random affine forms, deg_k(f_i) of them in
// group k. The path count is the multihomogeneous Bezout number.
inline SolveReport multihomogeneous_solve_report(const PolynomialSystem& f, const std::vector<std::vector<std::size_t>>& groups,
                                                 Rng& rng, const TrackOptions& opts = {}) {
  const std::size_t n = f.num_vars();
  if (f.size() != n) throw Error(ErrorKind::Input, "multihomogeneous_solve: system is not square");
  std::size_t covered = 0;
  for (const auto& g : groups) covered += g.size();
  if (covered != n) throw Error(ErrorKind::Input, "multihomogeneous_solve: groups must partition the variables");
  const std::uint64_t seed = rng.next_u64();
  Rng local(seed);
  const std::size_t K = groups.size();
  // forms[i][k][j] = coefficient vector (group vars then constant)
  std::vector<std::vector<std::vector<CVec>>> forms(n, std::vector<std::vector<CVec>>(K));
  std::vector<Polynomial> g;
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial prod = Polynomial::constant(n, 1.0);
    for (std::size_t k = 0; k < K; ++k) {
      const int d = f[i].degree_in(groups[k]);
      for (int j = 0; j < d; ++j) {
        CVec c = local.unit_complex_vector(static_cast<Index>(groups[k].size() + 1));
        forms[i][k].push_back(c);
        prod = prod * Polynomial::linear(n, groups[k], c.head(static_cast<Index>(groups[k].size())), c[c.size() - 1]);
      }
    }
    g.push_back(prod);
  }
  const Homotopy h = make_segment_homotopy(PolynomialSystem(n, g), f, local);

  std::vector<CVec> starts;
  std::vector<std::size_t> remaining(K);
  for (std::size_t k = 0; k < K; ++k) remaining[k] = groups[k].size();
  std::vector<std::pair<std::size_t, std::size_t>> choice(n);  // (group, factor)
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      CVec x(static_cast<Index>(n));
      for (std::size_t k = 0; k < K; ++k) {
        const Index m = static_cast<Index>(groups[k].size());
        CMat A(m, m);
        CVec b(m);
        Index row = 0;
        for (std::size_t e = 0; e < n; ++e)
          if (choice[e].first == k) {
            const CVec& c = forms[e][k][choice[e].second];
            A.row(row) = c.head(m).transpose();
            b[row] = -c[m];
            ++row;
          }
        const CVec xk = A.partialPivLu().solve(b);
        for (Index v = 0; v < m; ++v) x[static_cast<Index>(groups[k][static_cast<std::size_t>(v)])] = xk[v];
      }
      starts.push_back(x);
      return;
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (remaining[k] == 0) continue;
      --remaining[k];
      for (std::size_t j = 0; j < forms[i][k].size(); ++j) {
        choice[i] = {k, j};
        rec(i + 1);
      }
      ++remaining[k];
    }
  };
  rec(0);
  SolveReport rep;
  rep.start_count = starts.size();
  rep.paths = track_batch(h, starts, opts);
  rep.solutions = collect_finite(rep.paths, f, seed);
  return rep;
}

inline std::vector<PathResult> move_slice(const PolynomialSystem& f, const LinearSlice& from, const std::vector<CVec>& points,
                                          const LinearSlice& to, Complex gamma, const TrackOptions& opts = {}) {
  auto lost = [&](const std::vector<PathResult>& ps) {
    std::size_t k = 0;
    for (const auto& p : ps)
      if (p.status == PathStatus::Truncated || (p.status == PathStatus::Singular && p.t_reached > 100 * opts.t_min)) ++k;
    return k;
  };
  std::vector<PathResult> best = track_batch(make_slice_homotopy(f, from, to, gamma), points, opts);
  std::size_t best_lost = lost(best);
  // Paths lost mid-way: the whole batch is re-run with a rotated gamma so that the
  // start-to-end correspondence stays that of a single homotopy.
  for (int k = 1; k <= 2 && best_lost > 0; ++k) {
    const Complex g = gamma * std::polar(1.0, 2.399963 * k);
    auto again = track_batch(make_slice_homotopy(f, from, to, g), points, opts);
    const std::size_t l = lost(again);
    if (l < best_lost) {
      best = std::move(again);
      best_lost = l;
    }
  }
  return best;
}

inline std::vector<PathResult> move_slice(const PolynomialSystem& f, const LinearSlice& from, const SolutionSet& points,
                                          const LinearSlice& to, Rng& rng, const TrackOptions& opts = {}) {
  return move_slice(f, from, points.points, to, rng.unit_complex(), opts);
}

struct MonodromyStats {
  std::size_t loops = 0;
  std::size_t discarded = 0;
};

using MemberFn = std::function<PolynomialSystem(Rng&)>;

// Monodromy over any family whose members are affine in their parameters: base and each
// random member are joined by gamma-trick segments, out and back with independent gammas.
inline SolutionSet monodromy_populate_family(const PolynomialSystem& base, const MemberFn& random_member, const SolutionSet& seeds,
                                             Rng& rng, std::size_t stall_limit = 10, const TrackOptions& opts = {},
                                             const KeyFn& key = {}, MonodromyStats* stats = nullptr,
                                             std::size_t max_loops = 1000, std::size_t target_count = 0) {
  if (seeds.empty()) throw Error(ErrorKind::Precondition, "monodromy: no seed points");
  const std::uint64_t seed = rng.next_u64();
  const Rng master(seed);
  SolutionSet found;
  found.seed = seed;
  found.dedup_tol = seeds.dedup_tol;
  std::vector<CVec> keys;
  auto keyed = [&](const CVec& x) { return key ? key(x) : x; };
  auto add = [&](const CVec& x, double r) {
    const CVec kx = keyed(x);
    for (const auto& k : keys)
      if (relative_distance(k, kx) < found.dedup_tol) return false;
    keys.push_back(kx);
    found.points.push_back(x);
    found.residuals.push_back(r);
    return true;
  };
  for (std::size_t i = 0; i < seeds.size(); ++i) add(seeds.points[i], seeds.residuals.empty() ? 0.0 : seeds.residuals[i]);

  std::size_t stall = 0, discarded_run = 0;
  MonodromyStats local_stats;
  for (std::size_t loop = 0; loop < max_loops && stall < stall_limit; ++loop) {
    if (target_count && found.size() >= target_count) break;
    Rng lr = master.child(loop);
    const PolynomialSystem member = random_member(lr);
    const Complex g1 = lr.unit_complex(), g2 = lr.unit_complex();
    const Homotopy out = Homotopy::between(scaled(base, g1), member, g1);
    const auto forward = track_batch(out, found.points, opts);
    std::vector<CVec> mid;
    for (const auto& p : forward)
      if (p.status == PathStatus::Converged) mid.push_back(p.endpoint);
    const Homotopy back = Homotopy::between(scaled(member, g2), base, g2);
    const auto backward = track_batch(back, mid, opts);
    ++local_stats.loops;
    std::size_t ok = 0, added = 0;
    for (const auto& p : backward) {
      if (p.status != PathStatus::Converged) continue;
      ++ok;
      if (base.residual(p.endpoint) < 1e-8 && add(p.endpoint, p.residual)) ++added;
    }
    if (ok == 0) {
      ++local_stats.discarded;
      warn("monodromy loop discarded: all paths failed");
      if (++discarded_run >= 5) throw Error(ErrorKind::Internal, "monodromy: five consecutive loops discarded");
      continue;
    }
    discarded_run = 0;
    stall = added ? 0 : stall + 1;
  }
  if (stats) *stats = local_stats;
  return found;
}

inline SolutionSet monodromy_populate(const PolynomialSystem& f, const LinearSlice& slice, const SolutionSet& seeds, Rng& rng,
                                      std::size_t stall_limit = 10, const TrackOptions& opts = {}, const KeyFn& key = {},
                                      MonodromyStats* stats = nullptr, const std::vector<std::size_t>& slice_coords = {}) {
  const PolynomialSystem base = f | slice.as_system();
  const std::vector<std::size_t> coords = slice_coords.empty() ? iota_coords(0, f.num_vars()) : slice_coords;
  MemberFn member = [&](Rng& r) {
    LinearSlice s = random_slice_on(f.num_vars(), coords, slice.codim(), std::nullopt, r);
    return f | s.as_system();
  };
  return monodromy_populate_family(base, member, seeds, rng, stall_limit, opts, key, stats);
}

struct TraceResult {
  bool passed = false;
  double second_difference = 0.0;
  double first_difference = 0.0;
  std::string diagnostic;
};

// Affine trace test: the coordinate sum (over `coords`) of the transported points must move
// affine-linearly when the slice offset is translated by s*v, s in {-0.1, 0, 0.1}.
inline TraceResult trace_test(const PolynomialSystem& f, const LinearSlice& slice, const std::vector<CVec>& points, Rng& rng,
                              const std::vector<std::size_t>& coords = {}, const std::optional<CVec>& direction = std::nullopt,
                              const TrackOptions& opts = {}) {
  TraceResult res;
  if (points.empty()) {
    res.diagnostic = "no points";
    return res;
  }
  const auto cs = coords.empty() ? iota_coords(0, f.num_vars()) : coords;
  const CVec v = direction ? *direction : rng.unit_complex_vector(static_cast<Index>(slice.codim()));
  const double s = 0.1;
  CVec sum0 = CVec::Zero(static_cast<Index>(cs.size()));
  for (const auto& p : points) sum0 += restrict_coords(p, cs);
  std::array<CVec, 2> sums;
  for (int k = 0; k < 2; ++k) {
    const LinearSlice to = slice.translated(v, k == 0 ? -s : s);
    const auto paths = move_slice(f, slice, points, to, rng.unit_complex(), opts);
    sums[k] = CVec::Zero(static_cast<Index>(cs.size()));
    for (const auto& p : paths) {
      if (p.status != PathStatus::Converged) {
        res.diagnostic = std::string("transported path ") + to_string(p.status) + "; set incomplete or slice unlucky";
        return res;
      }
      sums[k] += restrict_coords(p.endpoint, cs);
    }
  }
  res.first_difference = (sums[1] - sums[0]).norm();
  res.second_difference = (sums[1] - 2.0 * sum0 + sums[0]).norm();
  res.passed = res.second_difference < 1e-6 * (1.0 + res.first_difference);
  if (!res.passed) res.diagnostic = "trace is not affine in the slice translation";
  return res;
}

inline bool trace_test(const PolynomialSystem& f, const LinearSlice& slice, const SolutionSet& points, Rng& rng) {
  return trace_test(f, slice, points.points, rng).passed;
}

}  // namespace joinrank
