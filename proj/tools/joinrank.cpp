// joinrank: ranks, border ranks and decompositions over join varieties.
#include <ctime>
#include <iostream>

#include "CLI11.hpp"
#include "joinrank/joinrank.hpp"

using namespace joinrank;

namespace {

enum Exit { Ok = 0, Usage = 2, NotInClosure = 3, Inconclusive = 4, NoRealDecomposition = 5, NumericalFailure = 6 };

const char* exit_codes_help =
    "Exit codes:\n"
    "  0  success; the point lies in the closure\n"
    "  2  usage, input or file error\n"
    "  3  the point is not in the closure\n"
    "  4  in the closure, but membership in the constructible join is inconclusive\n"
    "  5  no real decomposition (no real critical point)\n"
    "  6  numerical failure (path tracking, decomposition or an acceptance check)\n";

struct Cli {
  RunConfig config;
  std::string command;
  bool pretty = true;
};

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void emit(const Cli& cli, json body) {
  json out = {{"command", cli.command}, {"config", to_json(cli.config)}, {"timestamp", timestamp()}};
  out.update(body);
  std::cout << out.dump(cli.pretty ? 2 : -1) << "\n";
}

json factor_summary(const Parameterization& p) {
  return {{"name", p.name}, {"kind", to_string(p.kind)}, {"ambient_dim", p.ambient_dim()}, {"param_dim", p.param_dim()}};
}

json join_summary(const AbstractJoin& J) {
  json f = json::array();
  for (const auto& p : J.factors) f.push_back(factor_summary(p));
  return {{"mode", to_string(J.mode)}, {"ambient", J.ambient}, {"num_params", J.num_params()}, {"expected_dim", J.expected_dim()}, {"factors", f}};
}

json decomposition_json(const Decomposition& d) {
  json ps = json::array();
  for (const auto& p : d.parameters) ps.push_back(to_json(p));
  return {{"parameters", ps}, {"reconstruction_residual", d.reconstruction_residual}, {"is_real", d.is_real}, {"provenance", to_string(d.provenance)}};
}

std::vector<int> parse_case(const std::string& s) {
  std::vector<int> v;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      v.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Input, "--case expects comma-separated integers, got '" + s + "'");
    }
  }
  return v;
}

AbstractJoin join_of(const Model& m, const std::string& case_str, Rng& rng) {
  if (!m.is_family()) return m.join(rng);
  if (case_str.empty()) throw Error(ErrorKind::Input, "model '" + m.name + "' is a family; pass --case");
  return build_abstract_join(m.instantiate(parse_case(case_str)), m.mode, rng);
}

// Seeds given as {"parameters": [[[re,im],...], ...]} or a bare list of vectors.
std::vector<CVec> read_params(const std::string& path) {
  const json j = read_json_file(path);
  const json& ps = j.is_object() ? j.at("parameters") : j;
  std::vector<CVec> out;
  for (const auto& p : ps) out.push_back(cvec_from_json(p));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joinrank: ranks, border ranks and decompositions over join varieties"};
  app.footer(exit_codes_help);
  app.require_subcommand(1);
  Cli cli;
  app.add_option("--seed", cli.config.seed, "random seed (JOINRANK_SEED overrides)");
  app.add_option("--threads", cli.config.threads, "worker threads, 0 for the hardware count");
  app.add_flag("!--compact", cli.pretty, "print JSON on one line");
  app.add_option("--newton-tol", cli.config.track.newton_tol, "corrector tolerance");
  app.add_option("--max-steps", cli.config.track.max_steps, "step limit per path");

  std::string join_path, point_path, pwset_path, system_path, out_path, case_str, line_path, psi_path, start_path, method = "generic",
                                                                                                                 crit_method;
  std::size_t wdim = 0;
  bool table = false, curve = false, gradient = false, list = false, extended = false, all = false;
  std::vector<std::string> ids;

  auto* model = app.add_subcommand("model", "summarize a model file");
  model->add_option("--join", join_path, "model file")->required();
  model->add_option("--case", case_str, "family case, e.g. 2,1");

  auto* dim = app.add_subcommand("dim", "expected and actual dimension of a join");
  dim->add_option("--join", join_path, "model file")->required();
  dim->add_option("--case", case_str, "family case");
  dim->add_flag("--table", table, "every case of a family");

  auto* witness = app.add_subcommand("witness", "witness set of a polynomial system");
  witness->add_option("--system", system_path, "system file")->required();
  witness->add_option("--dim", wdim, "dimension of the component")->required();
  witness->add_option("--out", out_path, "write the points here");

  auto* pwset = app.add_subcommand("pwset", "pseudowitness set of a join");
  pwset->add_option("--join", join_path, "model file")->required();
  pwset->add_option("--case", case_str, "family case");
  pwset->add_option("--out", out_path, "pwset file to write")->required();

  auto* member = app.add_subcommand("member", "is a point in the closure of the join");
  member->add_option("--pwset", pwset_path, "pwset file")->required();
  member->add_option("--point", point_path, "point file")->required();
  member->add_flag("--curve-section", curve, "restrict to a line through the point first");

  auto* decompose = app.add_subcommand("decompose", "decompose a point");
  decompose->add_option("--join", join_path, "model file")->required();
  decompose->add_option("--case", case_str, "family case");
  decompose->add_option("--point", point_path, "point file")->required();
  decompose->add_option("--method", method, "generic, projection or fiber")->check(CLI::IsMember({"generic", "projection", "fiber"}));
  decompose->add_option("--start", start_path, "seed decomposition file");
  decompose->add_option("--psi", psi_path, "projection matrix file (projection method)");

  auto* boundary = app.add_subcommand("boundary", "boundary points of the join along a line");
  boundary->add_option("--join", join_path, "model file")->required();
  boundary->add_option("--case", case_str, "family case");
  boundary->add_option("--pwset", pwset_path, "pwset file, computed if absent");
  boundary->add_option("--line", line_path, "slice file cutting a line in the ambient space")->required();

  auto* realrank = app.add_subcommand("realrank", "real critical points of the distance on a fiber system");
  realrank->add_option("--system", system_path, "fiber system file")->required();
  realrank->add_option("--center", point_path, "real point file")->required();
  realrank->add_option("--method", crit_method, "total-degree, multihomogeneous or monodromy")
      ->check(CLI::IsMember({"total-degree", "multihomogeneous", "monodromy"}));
  realrank->add_option("--start", start_path, "known solutions of the system (monodromy)");
  realrank->add_flag("--gradient", gradient, "also run the gradient descent homotopy");

  auto* reproduce = app.add_subcommand("reproduce", "run a named example and compare with its expected values");
  reproduce->add_option("id", ids, "example ids");
  reproduce->add_flag("--list", list, "list example ids");
  reproduce->add_flag("--extended", extended, "include the long opt-in targets");
  reproduce->add_flag("--all", all, "run every listed example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return Usage;
  }
  if (const char* s = std::getenv("JOINRANK_SEED")) {
    try {
      cli.config.seed = std::stoull(s);
    } catch (const std::exception&) {
      std::cerr << "InputError: JOINRANK_SEED is not an integer\n";
      return Usage;
    }
  }
  if (cli.config.threads) set_default_threads(cli.config.threads);
  cli.command = app.get_subcommands().front()->get_name();
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"join", join_path}, {"point", point_path}, {"pwset", pwset_path}, {"system", system_path}, {"line", line_path}, {"psi", psi_path},
           {"start", start_path}, {"out", out_path}})
    if (!v.empty()) cli.config.files[k] = v;
  Rng rng(cli.config.seed);

  try {
    if (cli.command == "model") {
      const Model m = read_model(join_path);
      json body = {{"name", m.name}, {"description", m.description}, {"family", m.is_family()}};
      if (m.is_family() && case_str.empty()) {
        body["vars"] = m.family_vars();
        body["cases"] = m.family_cases();
      } else {
        body["join"] = join_summary(join_of(m, case_str, rng));
      }
      emit(cli, body);
      return Ok;
    }

    if (cli.command == "dim") {
      const Model m = read_model(join_path);
      if (table) {
        if (!m.is_family()) throw Error(ErrorKind::Input, "--table needs a family model");
        const auto rows = examples::dimension_table(m, rng);
        json t = json::array();
        const auto vars = m.family_vars();
        for (const auto& r : rows) {
          json row;
          for (std::size_t i = 0; i < vars.size(); ++i) row[vars[i]] = r.values[i];
          row["expected"] = r.expected;
          row["actual"] = r.actual;
          row["defective"] = r.actual < r.expected;
          t.push_back(row);
        }
        emit(cli, {{"model", m.name}, {"table", t}});
        return Ok;
      }
      const AbstractJoin J = join_of(m, case_str, rng);
      const ImageDimension d = image_dimension(J, rng);
      emit(cli, {{"model", m.name}, {"expected", J.expected_dim()}, {"actual", d.dim_image}, {"defect", d.defect}});
      return Ok;
    }

    if (cli.command == "witness") {
      const PolynomialSystem f = system_from_json(read_json_file(system_path));
      const WitnessSet w = witness_set(f, wdim, rng, cli.config.track);
      json body = {{"dim", w.dim}, {"degree", w.deg}, {"slice", to_json(w.slice)}, {"points", to_json(w.points)}};
      if (!out_path.empty()) write_json_file(out_path, body);
      emit(cli, body);
      return Ok;
    }

    if (cli.command == "pwset") {
      const AbstractJoin J = join_of(read_model(join_path), case_str, rng);
      const PseudoWitnessSet pw = pseudowitness_set(J, rng);
      write_json_file(out_path, to_json(pw));
      emit(cli, {{"image_deg", pw.image_deg}, {"fiber_deg", pw.fiber_deg}, {"image_dim", pw.image_dim}, {"out", out_path}});
      return Ok;
    }

    if (cli.command == "member") {
      const PseudoWitnessSet pw = read_pwset(pwset_path);
      const CVec P = read_point(point_path).coords;
      MembershipOptions mo;
      mo.track = cli.config.track;
      const MembershipReport r = curve ? curve_section_membership(pw, P, rng, mo) : membership_test(pw, P, rng, mo);
      json ev = json::array();
      for (const auto& e : r.evidence) ev.push_back({{"status", to_string(e.status)}, {"projects_to_P", e.projects_to_P}});
      emit(cli, {{"in_closure", r.in_closure},
                 {"multiplicity", r.multiplicity},
                 {"constructible", to_string(r.constructible)},
                 {"paths_tracked", r.paths_tracked},
                 {"evidence", ev},
                 {"notes", r.notes}});
      if (!r.in_closure) return NotInClosure;
      return r.constructible == Constructible::Inconclusive ? Inconclusive : Ok;
    }

    if (cli.command == "decompose") {
      const AbstractJoin J = join_of(read_model(join_path), case_str, rng);
      const CVec P = read_point(point_path).coords;
      std::optional<std::vector<CVec>> start;
      if (!start_path.empty()) start = read_params(start_path);
      if (method == "fiber") {
        GenericOptions go;
        go.track = cli.config.track;
        const DecomposeResult d = decompose_generic(J, P, rng, go, start);
        if (!d.decomposition) {
          emit(cli, {{"outcome", to_string(d.outcome)}, {"diagnostic", d.diagnostic}});
          return NumericalFailure;
        }
        const FiberSet fs = fiber_monodromy(J, P, {*d.decomposition}, rng, 8, go);
        json ds = json::array();
        for (const auto& x : fs.decompositions) ds.push_back(decomposition_json(x));
        emit(cli, {{"decompositions", ds}, {"loops", fs.stats.loops}, {"warnings", fs.warnings}});
        return Ok;
      }
      DecomposeResult d;
      if (method == "generic") {
        GenericOptions go;
        go.track = cli.config.track;
        d = decompose_generic(J, P, rng, go, start);
      } else {
        ProjectionOptions po;
        po.track = cli.config.track;
        CMat psi;
        if (!psi_path.empty()) {
          psi = cmat_from_json(read_json_file(psi_path), J.ambient);
        } else {
          const std::size_t rows = image_dimension(J, rng).dim_image;
          psi = CMat(static_cast<Index>(rows), static_cast<Index>(J.ambient));
          for (Index i = 0; i < psi.rows(); ++i) psi.row(i) = rng.real_vector(J.ambient).cast<Complex>().transpose();
        }
        d = decompose_via_projection(J, P, psi, start, rng, po);
      }
      json body = {{"method", method}, {"outcome", to_string(d.outcome)}, {"attempts", d.attempts}, {"diagnostic", d.diagnostic}};
      if (d.decomposition) body["decomposition"] = decomposition_json(*d.decomposition);
      if (d.image_limit.size()) body["image_limit"] = to_json(d.image_limit);
      emit(cli, body);
      return d.outcome == DecomposeOutcome::Success ? Ok : NumericalFailure;
    }

    if (cli.command == "boundary") {
      const AbstractJoin J = join_of(read_model(join_path), case_str, rng);
      const PseudoWitnessSet pw = pwset_path.empty() ? pseudowitness_set(J, rng) : read_pwset(pwset_path);
      BoundaryOptions bo;
      BoundaryReport br = boundary_candidates(pw, slice_from_json(read_json_file(line_path)), rng, bo);
      json cs = json::array();
      for (auto& c : br.candidates) {
        boundary_confirm(J, c, rng, cli.config.track);
        cs.push_back({{"point", to_json(c.point)}, {"paths", c.paths}, {"confirmed", c.confirmed}, {"evidence", c.evidence}});
      }
      emit(cli, {{"candidates", cs}, {"start_points", br.start_points}, {"paths_tracked", br.paths_tracked}, {"diverged", br.diverged}});
      return Ok;
    }

    if (cli.command == "realrank") {
      const PolynomialSystem F = system_from_json(read_json_file(system_path));
      const PointFile c = read_point(point_path);
      CriticalOptions co;
      co.track = cli.config.track;
      if (crit_method == "total-degree") co.method = CriticalMethod::TotalDegree;
      if (crit_method == "monodromy") co.method = CriticalMethod::Monodromy;
      std::vector<CVec> seeds;
      if (!start_path.empty()) seeds = read_params(start_path);
      const CriticalPointSet cs = solve_critical(F, c.coords, rng, co, seeds);
      json pts = json::array();
      for (const auto& p : cs.points) pts.push_back({{"x", to_json(p.x)}, {"flag", to_string(p.flag)}, {"distance", p.distance}});
      json body = {{"method", to_string(cs.method)}, {"critical_points", cs.points.size()}, {"critical_pairs", cs.pairs},
                   {"real", cs.real_count()},         {"borderline", cs.count(RealFlag::Borderline)},
                   {"singular_endpoints", cs.singular}, {"points", pts}, {"notes", cs.notes}};
      if (gradient) {
        const GradientDescentResult g = gradient_descent_homotopy(F, c.coords.real(), co.track);
        body["gradient_descent"] = g.point ? json{{"x", to_json(g.point->x)}, {"flag", to_string(g.point->flag)}} : json{{"diagnostic", g.diagnostic}};
      }
      emit(cli, body);
      return cs.real_count() ? Ok : NoRealDecomposition;
    }

    if (cli.command == "reproduce") {
      if (list) {
        for (const auto& e : registry())
          if (!e.extended || extended) std::cout << e.id << (e.extended ? "  (extended)" : "") << "  " << e.title << "\n";
        return Ok;
      }
      if (all)
        for (const auto& e : registry())
          if (!e.extended || extended) ids.push_back(e.id);
      if (ids.empty()) throw Error(ErrorKind::Input, "reproduce needs an example id, --all or --list");
      ExampleContext ctx;
      ctx.config = cli.config;
      ctx.models_dir = JOINRANK_MODELS_DIR;
      ctx.log = [](const std::string& m) { std::cerr << ".. " << m << "\n"; };
      json reports = json::array();
      bool pass = true;
      for (const auto& id : ids) {
        const Example* e = find_example(id);
        if (!e) throw Error(ErrorKind::Input, "unknown example '" + id + "' (see reproduce --list)");
        if (e->extended && !extended) throw Error(ErrorKind::Input, "'" + id + "' is an extended target; pass --extended");
        const ExampleReport r = run_example(*e, ctx);
        pass = pass && r.pass;
        reports.push_back(to_json(r));
      }
      emit(cli, {{"reports", reports}, {"pass", pass}});
      return pass ? Ok : NumericalFailure;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Input:
      case ErrorKind::File:
      case ErrorKind::Precondition: return Usage;
      default: return NumericalFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return NumericalFailure;
  }
  return Usage;
}
