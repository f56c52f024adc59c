#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "homotopy.hpp"
#include "parallel.hpp"

namespace joinrank {

struct TrackOptions {
  double step_init = 0.1;
  double step_min = 1e-9;
  double newton_tol = 1e-10;
  int newton_max_iters = 3;
  double t_min = 1e-6;
  double divergence_norm = 1e8;
  std::size_t max_steps = 50000;
  double step_max = 0.1;

  void validate() const {
    if (!(0 < step_min && step_min < step_init && step_init <= 0.5)) throw Error(ErrorKind::Input, "TrackOptions: need 0 < step_min < step_init <= 0.5");
    if (!(0 < t_min && t_min < 1)) throw Error(ErrorKind::Input, "TrackOptions: need 0 < t_min < 1");
  }

  TrackOptions tightened() const {
    TrackOptions o = *this;
    o.step_init = std::max(step_min * 2, step_init / 8);
    o.step_max = std::max(step_min * 2, step_max / 8);
    return o;
  }
};

enum class PathStatus { Converged, Diverged, Singular, Truncated };

inline const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::Converged: return "Converged";
    case PathStatus::Diverged: return "Diverged";
    case PathStatus::Singular: return "Singular";
    case PathStatus::Truncated: return "Truncated";
  }
  return "?";
}

struct PathSample {
  double t;
  CVec x;
};

struct PathResult {
  PathStatus status = PathStatus::Truncated;
  CVec start;
  CVec endpoint;
  double t_reached = 1.0;
  double residual = 0.0;
  std::size_t steps_taken = 0;
  double condition_estimate = 0.0;
  std::vector<PathSample> samples;  // checkpoints near t = 0, decreasing t
  bool rerun = false;

  // Converged or singular-but-bounded: the path has a finite limit.
  bool finite() const { return status == PathStatus::Converged || status == PathStatus::Singular; }

  // Limit of the path as t -> 0: the endpoint when converged, otherwise Richardson
  // extrapolation through the samples at t_min, 2 t_min and 4 t_min when available.
  CVec limit(double t_min = 1e-6) const {
    if (status == PathStatus::Converged) return endpoint;
    const PathSample *s1 = nullptr, *s2 = nullptr, *s4 = nullptr;
    for (const auto& s : samples) {
      if (std::abs(s.t - t_min) <= 1e-12 * t_min) s1 = &s;
      if (std::abs(s.t - 2 * t_min) <= 1e-12 * t_min) s2 = &s;
      if (std::abs(s.t - 4 * t_min) <= 1e-12 * t_min) s4 = &s;
    }
    if (s1 && s2 && s4) return (8.0 * s1->x - 6.0 * s2->x + s4->x) / 3.0;
    if (!samples.empty()) return samples.back().x;
    return endpoint;
  }

  CVec limit_on(const std::vector<std::size_t>& coords, double t_min = 1e-6) const {
    return restrict_coords(limit(t_min), coords);
  }
};

struct RefineResult {
  CVec point;
  double residual = 0.0;
  bool singular = false;
  int iterations = 0;
};

namespace detail {

using EvalFn = std::function<void(const CVec&, CVec&, CMat&)>;
using ResidualFn = std::function<double(const CVec&)>;

inline double rcond_of(const Eigen::PartialPivLU<CMat>& lu) {
  const double r = lu.rcond();
  return std::isfinite(r) ? r : 0.0;
}

inline RefineResult newton_refine_impl(const EvalFn& eval, const ResidualFn& resid, const CVec& point, double tol,
                                       int max_iters = 20) {
  RefineResult out{point, resid(point), false, 0};
  if (!std::isfinite(out.residual)) {
    out.singular = true;
    return out;
  }
  if (out.residual < tol) return out;
  CVec x = point, F;
  CMat J;
  double r = out.residual;
  double prev_step = -1;
  int linear_run = 0;
  for (int it = 0; it < max_iters; ++it) {
    eval(x, F, J);
    Eigen::PartialPivLU<CMat> lu(J);
    if (rcond_of(lu) < 1e-12) {
      out = RefineResult{point, resid(point), true, it};
      return out;
    }
    const CVec dx = lu.solve(-F);
    if (!dx.allFinite()) return RefineResult{point, resid(point), true, it};
    double alpha = 1.0;
    CVec xn = x + dx;
    double rn = resid(xn);
    while (!(rn <= r) && alpha > 1.0 / 64) {
      alpha *= 0.5;
      xn = x + alpha * dx;
      rn = resid(xn);
    }
    const double step = alpha * dx.norm();
    if (prev_step > 0) {
      const double ratio = step / prev_step;
      linear_run = (ratio > 0.3 && ratio < 1.2) ? linear_run + 1 : 0;
    }
    prev_step = step;
    x = xn;
    r = rn;
    out.iterations = it + 1;
    if (r < tol && linear_run == 0) {
      out.point = x;
      out.residual = r;
      return out;
    }
    if (linear_run >= 3) return RefineResult{point, resid(point), true, out.iterations};
    if (step <= 1e-15 * (1.0 + x.norm())) break;
  }
  if (r < out.residual) {
    out.point = x;
    out.residual = r;
  }
  return out;
}

}  // namespace detail

inline RefineResult newton_refine(const PolynomialSystem& f, const CVec& point, double tol = 1e-12) {
  if (f.size() != f.num_vars()) throw Error(ErrorKind::Input, "newton_refine needs a square system");
  return detail::newton_refine_impl([&](const CVec& x, CVec& F, CMat& J) { f.evaluate_with_jacobian(x, F, J); },
                                    [&](const CVec& x) { return f.residual(x); }, point, tol);
}

// Gauss-Newton variant for overdetermined systems (least-squares steps).
inline RefineResult newton_refine_ls(const PolynomialSystem& f, const CVec& point, double tol = 1e-12, int iters = 8) {
  CVec x = point, F;
  CMat J;
  double r = f.residual(x);
  for (int it = 0; it < iters && r >= tol; ++it) {
    f.evaluate_with_jacobian(x, F, J);
    const CVec dx = J.completeOrthogonalDecomposition().solve(-F);
    if (!dx.allFinite()) break;
    const CVec xn = x + dx;
    const double rn = f.residual(xn);
    if (!(rn < r)) break;
    x = xn;
    r = rn;
  }
  return RefineResult{x, r, false, 0};
}

namespace detail {

struct TrackerState {
  const Homotopy& h;
  CVec H, Ht;
  CMat Hx;

  // dx/dt from the Davidenko equation Hx * dx/dt = -Ht.
  bool velocity(const CVec& x, double t, CVec& v) {
    h.evaluate(x, t, nullptr, &Hx, &Ht);
    Eigen::PartialPivLU<CMat> lu(Hx);
    v = lu.solve(-Ht);
    return v.allFinite();
  }
};

inline bool corrector_converged(const CVec& dx, const CVec& x, double tol) {
  bool comp = true;
  for (Index j = 0; j < x.size(); ++j)
    if (std::abs(dx[j]) > tol * (1.0 + std::abs(x[j]))) {
      comp = false;
      break;
    }
  return comp || dx.norm() <= 1e-13 * (1.0 + x.norm());
}

inline PathResult track_once(const Homotopy& h, const CVec& start, const TrackOptions& o) {
  o.validate();
  if (h.size() != h.num_vars()) throw Error(ErrorKind::Input, "track: homotopy is not square");
  if (static_cast<std::size_t>(start.size()) != h.num_vars()) throw Error(ErrorKind::Input, "track: start point length mismatch");
  const double r0 = h.residual(start, 1.0);
  if (!(r0 < 1e-8)) throw Error(ErrorKind::Precondition, "track: start point residual " + std::to_string(r0) + " is not below 1e-8");

  PathResult res;
  res.start = start;
  detail::TrackerState st{h, {}, {}, {}};
  std::vector<double> checkpoints;
  for (double c : {100.0, 4.0, 2.0, 1.0})
    if (c * o.t_min < 1.0) checkpoints.push_back(c * o.t_min);
  std::size_t ci = 0;

  CVec x = start, k1, k2, k3, k4, xp, F, dx;
  CMat J;
  double t = 1.0, step = std::min(o.step_init, o.step_max);
  int successes = 0;
  bool underflow = false;
  bool blowup = false;

  while (t > o.t_min) {
    if (res.steps_taken >= o.max_steps) {
      res.status = PathStatus::Truncated;
      res.endpoint = x;
      res.t_reached = t;
      res.residual = h.residual(x, 0.0);
      return res;
    }
    const double stop = checkpoints[ci];
    const double dt = std::min(step, t - stop);
    const bool lands = dt == t - stop;
    const double tn = lands ? stop : t - dt;
    ++res.steps_taken;

    bool ok = st.velocity(x, t, k1) && st.velocity(x - 0.5 * dt * k1, t - 0.5 * dt, k2) &&
              st.velocity(x - 0.5 * dt * k2, t - 0.5 * dt, k3) && st.velocity(x - dt * k3, tn, k4);
    if (ok) {
      xp = x - (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ok = false;
      double prev = -1;
      for (int it = 0; it < o.newton_max_iters; ++it) {
        h.evaluate(xp, tn, &F, &J, nullptr);
        Eigen::PartialPivLU<CMat> lu(J);
        dx = lu.solve(-F);
        if (!dx.allFinite()) break;
        const double nd = dx.norm();
        if (it == 0 && nd > 0.05 * (1.0 + xp.norm())) break;
        if (prev >= 0 && nd > 0.5 * prev && nd > 1e-13 * (1.0 + xp.norm())) break;
        xp += dx;
        prev = nd;
        if (detail::corrector_converged(dx, xp, 10 * o.newton_tol)) {
          ok = true;
          break;
        }
      }
    }
    if (ok) {
      x = xp;
      t = tn;
      if (++successes >= 5) {
        step = std::min(step * 1.5, o.step_max);
        successes = 0;
      }
      if (inf_norm(x) > o.divergence_norm) {
        blowup = true;
        break;
      }
      if (lands) {
        res.samples.push_back({t, x});
        ++ci;
      }
    } else {
      successes = 0;
      step *= 0.5;
      if (step < o.step_min) {
        underflow = true;
        break;
      }
    }
  }

  res.t_reached = t;
  res.endpoint = x;
  auto target_eval = [&](const CVec& y, CVec& F2, CMat& J2) { h.evaluate(y, 0.0, &F2, &J2, nullptr); };
  auto target_resid = [&](const CVec& y) { return h.residual(y, 0.0); };
  auto cond_at = [&](const CVec& y) {
    CMat J2;
    h.evaluate(y, 0.0, nullptr, &J2, nullptr);
    Eigen::PartialPivLU<CMat> lu(J2);
    const double rc = detail::rcond_of(lu);
    return rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  };

  if (blowup) {
    res.status = PathStatus::Diverged;
    res.samples.push_back({t, x});
    res.residual = target_resid(x);
    res.condition_estimate = std::numeric_limits<double>::infinity();
    return res;
  }
  if (underflow) {
    res.status = PathStatus::Singular;
    res.samples.push_back({t, x});
    res.residual = target_resid(x);
    res.condition_estimate = cond_at(x);
    return res;
  }

  // Final sharpening against the target system. A path still moving fast at t_min is
  // compared against its extrapolated limit rather than x(t_min).
  const CVec xlim = res.limit(o.t_min);
  const RefineResult rr = detail::newton_refine_impl(target_eval, target_resid, x, o.newton_tol);
  const double near = std::min((rr.point - x).norm(), (rr.point - xlim).norm());
  if (!rr.singular && rr.residual < 10 * o.newton_tol && near <= 1e-3 * (1.0 + x.norm())) {
    res.status = PathStatus::Converged;
    res.endpoint = rr.point;
    res.residual = rr.residual;
    res.t_reached = 0.0;
    res.condition_estimate = cond_at(rr.point);
    return res;
  }

  // Not sharpened: decide between a singular finite endpoint and a slow blowup by the
  // growth rate of the coordinates over the last two decades of t.
  double growth = 0.0;
  const PathSample* far = nullptr;
  for (const auto& s : res.samples)
    if (std::abs(s.t - 100 * o.t_min) <= 1e-12) far = &s;
  if (far) growth = std::log((1.0 + x.norm()) / (1.0 + far->x.norm())) / std::log(far->t / t);
  res.status = growth > 0.1 ? PathStatus::Diverged : PathStatus::Singular;
  res.endpoint = res.status == PathStatus::Singular ? res.limit(o.t_min) : x;
  res.residual = target_resid(res.endpoint);
  res.condition_estimate = cond_at(res.endpoint);
  return res;
}

}  // namespace detail

// A path that reaches t_min without sharpening is re-tracked to a much smaller t_min once:
// clusters of nearly coincident regular roots only separate very close to t = 0.
inline PathResult track(const Homotopy& h, const CVec& start, const TrackOptions& o = {}) {
  PathResult r = detail::track_once(h, start, o);
  // Step collapse mid-path: one retry with finer steps.
  if (r.status == PathStatus::Singular && r.t_reached > 100 * o.t_min) {
    TrackOptions fine = o.tightened();
    fine.step_min = std::min(o.step_min, 1e-13);
    PathResult f = detail::track_once(h, start, fine);
    f.rerun = true;
    if (f.status != PathStatus::Singular || f.t_reached < r.t_reached) r = f;
  }
  if (r.status == PathStatus::Singular && r.t_reached <= o.t_min * (1 + 1e-9) && o.t_min > 1e-13) {
    TrackOptions deep = o;
    deep.t_min = std::max(o.t_min * 1e-6, 1e-14);
    deep.step_min = std::min(o.step_min, deep.t_min);
    PathResult d = detail::track_once(h, start, deep);
    if (d.status == PathStatus::Converged) return d;
  }
  return r;
}

// Tracks a batch of starts; converged endpoints that coincide (a sign of path jumping)
// are re-tracked once with a smaller step.
inline std::vector<PathResult> track_batch(const Homotopy& h, const std::vector<CVec>& starts, const TrackOptions& o = {}) {
  std::vector<PathResult> out(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { out[i] = track(h, starts[i], o); });
  std::vector<std::size_t> suspects;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].status != PathStatus::Converged || out[i].condition_estimate > 1e8) continue;
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (out[j].status != PathStatus::Converged || out[j].condition_estimate > 1e8) continue;
      if (relative_distance(out[i].endpoint, out[j].endpoint) < 1e-6 && relative_distance(starts[i], starts[j]) > 1e-6) {
        suspects.push_back(i);
        suspects.push_back(j);
      }
    }
  }
  std::sort(suspects.begin(), suspects.end());
  suspects.erase(std::unique(suspects.begin(), suspects.end()), suspects.end());
  if (!suspects.empty()) {
    warn("path crossing suspected on " + std::to_string(suspects.size()) + " paths; re-tracking with tighter steps");
    const TrackOptions tight = o.tightened();
    parallel_for(suspects.size(), [&](std::size_t k) {
      out[suspects[k]] = track(h, starts[suspects[k]], tight);
      out[suspects[k]].rerun = true;
    });
  }
  return out;
}

}  // namespace joinrank
