#pragma once

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "varieties.hpp"

namespace joinrank {

using json = nlohmann::json;

// Complex numbers are [re, im]; vectors are arrays of those; matrices are arrays of rows.
inline json to_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Input, "complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const CVec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(to_json(v[i]));
  return a;
}

inline CVec cvec_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Input, "vector must be an array");
  CVec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = complex_from_json(j[i]);
  return v;
}

inline json to_json(const CMat& m) {
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(to_json(CVec(m.row(r).transpose())));
  return a;
}

inline CMat cmat_from_json(const json& j, std::size_t cols) {
  if (!j.is_array()) throw Error(ErrorKind::Input, "matrix must be an array of rows");
  CMat m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const CVec row = cvec_from_json(j[r]);
    if (static_cast<std::size_t>(row.size()) != cols) throw Error(ErrorKind::Input, "matrix rows have the wrong length");
    m.row(static_cast<Index>(r)) = row.transpose();
  }
  return m;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::File, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::File, path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::File, "cannot write " + path);
  out << j.dump(2) << '\n';
}

// ---- .psys.json --------------------------------------------------------------------------

inline json to_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& t : p.terms()) terms.push_back({{"c", to_json(t.coeff)}, {"e", t.exps}});
  return {{"terms", terms}};
}

inline Polynomial polynomial_from_json(const json& j, std::size_t nvars) {
  std::vector<Term> ts;
  for (const auto& t : j.at("terms")) {
    Exponents e = t.at("e").get<Exponents>();
    if (e.size() != nvars) throw Error(ErrorKind::Input, "term exponent vector has the wrong length");
    for (int x : e)
      if (x < 0) throw Error(ErrorKind::Input, "negative exponent");
    ts.push_back({complex_from_json(t.at("c")), std::move(e)});
  }
  return Polynomial(nvars, std::move(ts));
}

inline json to_json(const PolynomialSystem& f) {
  json polys = json::array();
  for (const auto& p : f.polys()) polys.push_back(to_json(p));
  return {{"num_vars", f.num_vars()}, {"polys", polys}};
}

inline PolynomialSystem system_from_json(const json& j) {
  try {
    const std::size_t n = j.at("num_vars").get<std::size_t>();
    std::vector<Polynomial> ps;
    for (const auto& p : j.at("polys")) ps.push_back(polynomial_from_json(p, n));
    return PolynomialSystem(n, std::move(ps));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, std::string("polynomial system: ") + e.what());
  }
}

// ---- .slice.json / .pts.json -------------------------------------------------------------

inline json to_json(const LinearSlice& L) { return {{"seed", L.seed}, {"num_vars", L.num_vars()}, {"A", to_json(L.A)}, {"b", to_json(L.b)}}; }

inline LinearSlice slice_from_json(const json& j) {
  LinearSlice L;
  L.seed = j.value("seed", std::uint64_t{0});
  L.A = cmat_from_json(j.at("A"), j.at("num_vars").get<std::size_t>());
  L.b = cvec_from_json(j.at("b"));
  if (L.b.size() != L.A.rows()) throw Error(ErrorKind::Input, "slice: A and b disagree");
  return L;
}

inline json to_json(const SolutionSet& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(to_json(p));
  return {{"seed", s.seed}, {"dedup_tol", s.dedup_tol}, {"points", pts}, {"residuals", s.residuals}};
}

inline SolutionSet solution_set_from_json(const json& j) {
  SolutionSet s;
  s.seed = j.value("seed", std::uint64_t{0});
  s.dedup_tol = j.value("dedup_tol", 1e-6);
  for (const auto& p : j.at("points")) s.points.push_back(cvec_from_json(p));
  s.residuals = j.value("residuals", std::vector<double>(s.points.size(), 0.0));
  if (s.residuals.size() != s.points.size()) throw Error(ErrorKind::Input, "solution set: residual count differs from point count");
  return s;
}

// ---- .pt.json ----------------------------------------------------------------------------

struct PointFile {
  CVec coords;
  bool projective = false;
};

// Unit norm, first nonzero coordinate real and positive.
inline CVec normalize_projective_point(CVec v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::Input, "projective point is zero");
  v /= n;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 1e-14) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      v[i] = std::abs(v[i]);
      break;
    }
  return v;
}

inline PointFile point_from_json(const json& j) {
  PointFile p;
  p.coords = cvec_from_json(j.at("coords"));
  const std::string space = j.value("space", "affine");
  if (space != "affine" && space != "projective") throw Error(ErrorKind::Input, "point space must be affine or projective");
  p.projective = space == "projective";
  if (p.projective) p.coords = normalize_projective_point(p.coords);
  return p;
}

inline json to_json(const PointFile& p) { return {{"coords", to_json(p.coords)}, {"space", p.projective ? "projective" : "affine"}}; }

inline PointFile read_point(const std::string& path) {
  try {
    return point_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::File, path + ": " + e.what());
  }
}

// ---- .model.json -------------------------------------------------------------------------
//
// {"name": ..., "mode": "affine_cone" | "patch_with_scalars", "factors": [factor, ...]}
// factor: {"kind": "veronese", "n", "d", "multinomial"} | {"kind": "segre", "dims"} |
//         {"kind": "wedge", "k", "n"} | {"kind": "form_power", "n", "e", "power"} |
//         {"kind": "scaled_linear_power", "n", "d"} |
//         {"kind": "custom", "map": psys, "name", "scale_exponents", "cone_dim"}
// with an optional "count" repeating the factor. A family model replaces "factors" by
// {"family": {"vars": [...], "factors": [...], "cases": [[...], ...]}} where a count may name a var.

inline Parameterization parameterization_from_json(const json& f) {
  const std::string kind = f.at("kind").get<std::string>();
  if (kind == "veronese") return veronese(f.at("n").get<std::size_t>(), f.at("d").get<std::size_t>(), f.value("multinomial", true));
  if (kind == "segre") return segre(f.at("dims").get<std::vector<std::size_t>>());
  if (kind == "wedge") return wedge(f.at("k").get<std::size_t>(), f.at("n").get<std::size_t>());
  if (kind == "form_power") return form_power(f.at("n").get<std::size_t>(), f.at("e").get<int>(), f.at("power").get<int>());
  if (kind == "scaled_linear_power") return scaled_linear_power(f.at("n").get<std::size_t>(), f.at("d").get<int>());
  if (kind == "custom") {
    std::optional<std::size_t> cd;
    if (f.contains("cone_dim")) cd = f["cone_dim"].get<std::size_t>();
    return custom(system_from_json(f.at("map")), f.value("name", "custom"), f.value("scale_exponents", std::vector<double>{}), cd);
  }
  throw Error(ErrorKind::Input, "unknown factor kind '" + kind + "'");
}

struct Model {
  std::string name;
  std::string description;
  JoinMode mode = JoinMode::AffineCone;
  std::vector<Parameterization> factors;  // empty for families
  json raw;

  bool is_family() const { return raw.contains("family"); }
  std::vector<std::string> family_vars() const { return raw.at("family").at("vars").get<std::vector<std::string>>(); }
  std::vector<std::vector<int>> family_cases() const { return raw.at("family").at("cases").get<std::vector<std::vector<int>>>(); }
  json reference() const { return raw.value("reference", json::object()); }

  // Factors of one family member, counts resolved against `values`.
  std::vector<Parameterization> instantiate(const std::vector<int>& values) const {
    const auto vars = family_vars();
    if (values.size() != vars.size()) throw Error(ErrorKind::Input, "family case has the wrong number of values");
    std::vector<Parameterization> out;
    for (const auto& f : raw.at("family").at("factors")) {
      int count = 1;
      if (f.contains("count")) {
        if (f["count"].is_number_integer()) {
          count = f["count"].get<int>();
        } else {
          const auto it = std::find(vars.begin(), vars.end(), f["count"].get<std::string>());
          if (it == vars.end()) throw Error(ErrorKind::Input, "factor count names an unknown family variable");
          count = values[static_cast<std::size_t>(it - vars.begin())];
        }
      }
      if (count < 0) throw Error(ErrorKind::Input, "negative factor count");
      if (count == 0) continue;
      const Parameterization p = parameterization_from_json(f);
      for (int c = 0; c < count; ++c) out.push_back(p);
    }
    if (out.empty()) throw Error(ErrorKind::Input, "family case has no factors");
    return out;
  }

  AbstractJoin join(Rng& rng) const {
    if (is_family()) throw Error(ErrorKind::Input, "model '" + name + "' is a family; pick a case");
    return build_abstract_join(factors, mode, rng);
  }
};

inline Model model_from_json(const json& j) {
  Model m;
  try {
    m.raw = j;
    m.name = j.value("name", "model");
    m.description = j.value("description", "");
    const std::string mode = j.value("mode", "affine_cone");
    if (mode == "affine_cone") {
      m.mode = JoinMode::AffineCone;
    } else if (mode == "patch_with_scalars") {
      m.mode = JoinMode::PatchWithScalars;
    } else {
      throw Error(ErrorKind::Input, "unknown join mode '" + mode + "'");
    }
    if (!j.contains("family")) {
      for (const auto& f : j.at("factors")) {
        const int count = f.value("count", 1);
        if (count < 1) throw Error(ErrorKind::Input, "factor count must be positive");
        const Parameterization p = parameterization_from_json(f);
        for (int c = 0; c < count; ++c) m.factors.push_back(p);
      }
      if (m.factors.empty()) throw Error(ErrorKind::Input, "model has no factors");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, "model: " + std::string(e.what()));
  }
  return m;
}

inline Model read_model(const std::string& path) { return model_from_json(read_json_file(path)); }

// ---- .pwset.json -------------------------------------------------------------------------
// The incidence sampler is not serialized; a loaded set samples through witness computations.

inline json to_json(const PseudoWitnessSet& pw) {
  json j = {{"format", "joinrank.pwset"},
            {"name", pw.inc.name},
            {"system", to_json(pw.inc.system)},
            {"image_coords", pw.inc.image_coords},
            {"dim", pw.inc.dim},
            {"slice_image", to_json(pw.slice_image)},
            {"slice_fiber", to_json(pw.slice_fiber)},
            {"points", to_json(pw.points)},
            {"image_dim", pw.image_dim},
            {"image_deg", pw.image_deg},
            {"fiber_dim", pw.fiber_dim},
            {"fiber_deg", pw.fiber_deg},
            {"trace_verified", pw.trace_verified},
            {"warnings", pw.warnings}};
  j["scalar_coord"] = pw.inc.scalar_coord ? json(*pw.inc.scalar_coord) : json(nullptr);
  return j;
}

inline PseudoWitnessSet pwset_from_json(const json& j) {
  PseudoWitnessSet pw;
  try {
    if (j.value("format", "") != "joinrank.pwset") throw Error(ErrorKind::Input, "not a pseudowitness set file");
    pw.inc.name = j.value("name", "");
    pw.inc.system = system_from_json(j.at("system"));
    pw.inc.image_coords = j.at("image_coords").get<std::vector<std::size_t>>();
    pw.inc.dim = j.at("dim").get<std::size_t>();
    if (j.contains("scalar_coord") && !j["scalar_coord"].is_null()) pw.inc.scalar_coord = j["scalar_coord"].get<std::size_t>();
    pw.slice_image = slice_from_json(j.at("slice_image"));
    pw.slice_fiber = slice_from_json(j.at("slice_fiber"));
    pw.points = solution_set_from_json(j.at("points"));
    pw.image_dim = j.at("image_dim").get<std::size_t>();
    pw.image_deg = j.at("image_deg").get<std::size_t>();
    pw.fiber_dim = j.at("fiber_dim").get<std::size_t>();
    pw.fiber_deg = j.at("fiber_deg").get<std::size_t>();
    pw.trace_verified = j.value("trace_verified", false);
    pw.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, "pwset: " + std::string(e.what()));
  }
  const std::size_t n = pw.inc.num_vars();
  for (auto c : pw.inc.image_coords)
    if (c >= n) throw Error(ErrorKind::Input, "pwset: image coordinate out of range");
  if (pw.slice_fiber.num_vars() != n && pw.slice_fiber.codim() > 0) throw Error(ErrorKind::Input, "pwset: fiber slice has the wrong width");
  for (const auto& u : pw.points.points)
    if (static_cast<std::size_t>(u.size()) != n) throw Error(ErrorKind::Input, "pwset: point has the wrong length");
  return pw;
}

inline PseudoWitnessSet read_pwset(const std::string& path) { return pwset_from_json(read_json_file(path)); }

// ---- run configuration -------------------------------------------------------------------

struct RunConfig {
  std::uint64_t seed = 1;
  TrackOptions track;
  std::size_t threads = 0;  // 0: hardware count
  std::map<std::string, std::string> files;
};

inline json to_json(const TrackOptions& o) {
  return {{"step_init", o.step_init}, {"step_min", o.step_min},   {"step_max", o.step_max},
          {"newton_tol", o.newton_tol}, {"newton_max_iters", o.newton_max_iters}, {"t_min", o.t_min},
          {"divergence_norm", o.divergence_norm}, {"max_steps", o.max_steps}};
}

inline json to_json(const RunConfig& c) {
  return {{"seed", c.seed}, {"track", to_json(c.track)}, {"threads", c.threads}, {"files", c.files}};
}

}  // namespace joinrank
