#pragma once

#include <functional>
#include <optional>
#include <string>

#include "linalg.hpp"
#include "solver.hpp"

namespace joinrank {

// All exponent vectors of total degree `degree` in `nvars` variables, lexicographically
// descending: for binary cubics (3,0), (2,1), (1,2), (0,3).
inline std::vector<Exponents> monomials(std::size_t nvars, int degree) {
  std::vector<Exponents> out;
  Exponents e(nvars, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == nvars) {
      e[i] = left;
      out.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[i] = k;
      rec(i + 1, left - k);
    }
  };
  if (nvars == 0) return out;
  rec(0, degree);
  return out;
}

inline double multinomial(const Exponents& e) {
  double r = 1.0;
  int n = 0;
  for (int k : e)
    for (int j = 1; j <= k; ++j) r = r * (++n) / j;
  return r;
}

// Groups a polynomial in (params, x) by its x-monomials of the given degree: coordinate j is
// the coefficient of the j-th monomial (lex descending), a polynomial in the params.
inline PolynomialSystem coefficients_in_x(const Polynomial& expr, std::size_t nparams, std::size_t nx, int degree) {
  const auto mons = monomials(nx, degree);
  std::map<Exponents, std::size_t> index;
  for (std::size_t j = 0; j < mons.size(); ++j) index[mons[j]] = j;
  std::vector<std::vector<Term>> coords(mons.size());
  for (const auto& t : expr.terms()) {
    Exponents xe(t.exps.begin() + static_cast<long>(nparams), t.exps.end());
    auto it = index.find(xe);
    if (it == index.end()) throw Error(ErrorKind::Input, "coefficients_in_x: expression is not homogeneous of the stated degree");
    coords[it->second].push_back({t.coeff, Exponents(t.exps.begin(), t.exps.begin() + static_cast<long>(nparams))});
  }
  std::vector<Polynomial> polys;
  for (auto& c : coords) polys.emplace_back(nparams, std::move(c));
  return PolynomialSystem(nparams, std::move(polys));
}

enum class ParamKind { Veronese, Segre, Wedge, Custom };

inline const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::Veronese: return "veronese";
    case ParamKind::Segre: return "segre";
    case ParamKind::Wedge: return "wedge";
    case ParamKind::Custom: return "custom";
  }
  return "?";
}

struct Parameterization {
  ParamKind kind = ParamKind::Custom;
  std::string name;
  std::size_t n = 0, d = 0;         // Veronese(n, d); Wedge(k = d, n)
  std::vector<std::size_t> dims;    // Segre
  bool multinomial = true;          // Veronese coordinate convention
  PolynomialSystem map;             // param_dim variables -> ambient_dim coordinates
  std::size_t cone_dim = 0;         // dimension of the image cone
  // phi(s^w * a) = s * phi(a) componentwise in the parameters; empty disables rescaling.
  std::vector<double> scale_exponents;
  // Finer weights w = (scalar, mu_1, ...): scaling parameter j by 2^(param_weights.row(j) . w)
  // scales coordinate m by 2^(coord_weights.row(m) . w). Empty when unavailable.
  Eigen::MatrixXd coord_weights, param_weights;

  std::size_t param_dim() const { return map.num_vars(); }
  std::size_t ambient_dim() const { return map.size(); }
  CVec apply(const CVec& a) const { return map.evaluate(a); }
};

// Coefficients of g^p where g is the generic form of degree e in n+1 variables; the
// parameters are g's coefficients (lex-descending monomial order).
inline PolynomialSystem form_power_map(std::size_t n, int e, int p) {
  const auto gm = monomials(n + 1, e);
  const std::size_t m = gm.size(), nv = m + n + 1;
  std::vector<Term> g;
  for (std::size_t j = 0; j < m; ++j) {
    Exponents ex(nv, 0);
    ex[j] = 1;
    for (std::size_t v = 0; v <= n; ++v) ex[m + v] = gm[j][v];
    g.push_back({1.0, ex});
  }
  return coefficients_in_x(Polynomial(nv, g).pow(p), m, n + 1, e * p);
}

inline Parameterization veronese(std::size_t n, std::size_t d, bool multinomial_coords = true) {
  Parameterization p;
  p.kind = ParamKind::Veronese;
  p.n = n;
  p.d = d;
  p.multinomial = multinomial_coords;
  p.name = "veronese(" + std::to_string(n) + "," + std::to_string(d) + ")";
  PolynomialSystem m = form_power_map(n, 1, static_cast<int>(d));
  if (!multinomial_coords) {
    const auto mons = monomials(n + 1, static_cast<int>(d));
    std::vector<Polynomial> ps;
    for (std::size_t j = 0; j < mons.size(); ++j) ps.push_back(Complex(1.0 / multinomial(mons[j])) * m[j]);
    m = PolynomialSystem(n + 1, ps);
  }
  p.map = m;
  p.cone_dim = n + 1;
  p.scale_exponents.assign(n + 1, 1.0 / static_cast<double>(d));
  const auto mons = monomials(n + 1, static_cast<int>(d));
  p.coord_weights = Eigen::MatrixXd::Zero(static_cast<Index>(mons.size()), static_cast<Index>(n + 1));
  for (std::size_t j = 0; j < mons.size(); ++j) {
    p.coord_weights(static_cast<Index>(j), 0) = 1.0;
    for (std::size_t v = 1; v <= n; ++v) p.coord_weights(static_cast<Index>(j), static_cast<Index>(v)) = mons[j][v];
  }
  p.param_weights = Eigen::MatrixXd::Identity(static_cast<Index>(n + 1), static_cast<Index>(n + 1));
  p.param_weights.col(0).setConstant(1.0 / static_cast<double>(d));
  return p;
}

// Squares (or higher powers) of generic forms: form_power(3, 2, 2) gives q^2 for quadrics q in 4 variables.
inline Parameterization form_power(std::size_t n, int e, int pw) {
  if (e == 1) return veronese(n, static_cast<std::size_t>(pw));
  Parameterization p;
  p.kind = ParamKind::Custom;
  p.name = "form_power(" + std::to_string(n) + "," + std::to_string(e) + "," + std::to_string(pw) + ")";
  p.map = form_power_map(n, e, pw);
  p.cone_dim = p.param_dim();
  p.scale_exponents.assign(p.param_dim(), 1.0 / pw);
  return p;
}

inline Parameterization segre(const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw Error(ErrorKind::Input, "segre: no factors");
  Parameterization p;
  p.kind = ParamKind::Segre;
  p.dims = dims;
  p.name = "segre(";
  std::size_t np = 0, amb = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    p.name += (i ? "," : "") + std::to_string(dims[i]);
    np += dims[i];
    amb *= dims[i];
  }
  p.name += ")";
  std::vector<Polynomial> ps;
  std::vector<std::size_t> idx(dims.size(), 0);
  for (std::size_t c = 0; c < amb; ++c) {
    Exponents e(np, 0);
    std::size_t off = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      e[off + idx[i]] = 1;
      off += dims[i];
    }
    ps.emplace_back(np, std::vector<Term>{{1.0, e}});
    for (std::size_t i = dims.size(); i-- > 0;) {
      if (++idx[i] < dims[i]) break;
      idx[i] = 0;
    }
  }
  p.map = PolynomialSystem(np, ps);
  p.cone_dim = np - (dims.size() - 1);
  p.scale_exponents.assign(np, 0.0);
  for (std::size_t j = 0; j < dims[0]; ++j) p.scale_exponents[j] = 1.0;
  return p;
}

// v_1 ^ ... ^ v_k in Pluecker coordinates (k-subsets of {0..n-1}, lex order).
inline Parameterization wedge(std::size_t k, std::size_t n) {
  if (k == 0 || k > n) throw Error(ErrorKind::Input, "wedge: need 1 <= k <= n");
  Parameterization p;
  p.kind = ParamKind::Wedge;
  p.d = k;
  p.n = n;
  p.name = "wedge(" + std::to_string(k) + "," + std::to_string(n) + ")";
  const std::size_t np = k * n;
  std::vector<Polynomial> ps;
  std::vector<std::size_t> cols(k);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t from) {
    if (i == k) {
      std::vector<std::size_t> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      std::vector<Term> terms;
      do {
        int inv = 0;
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = a + 1; b < k; ++b)
            if (perm[a] > perm[b]) ++inv;
        Exponents e(np, 0);
        for (std::size_t r = 0; r < k; ++r) e[r * n + cols[perm[r]]] += 1;
        terms.push_back({inv % 2 ? -1.0 : 1.0, e});
      } while (std::next_permutation(perm.begin(), perm.end()));
      ps.emplace_back(np, terms);
      return;
    }
    for (std::size_t c = from; c < n; ++c) {
      cols[i] = c;
      rec(i + 1, c + 1);
    }
  };
  rec(0, 0);
  p.map = PolynomialSystem(np, ps);
  p.cone_dim = k * (n - k) + 1;
  p.scale_exponents.assign(np, 0.0);
  for (std::size_t j = 0; j < n; ++j) p.scale_exponents[j] = 1.0;
  return p;
}

inline std::size_t jacobian_rank_at_random(const PolynomialSystem& f, Rng& rng);

inline Parameterization custom(const PolynomialSystem& map, std::string name = "custom",
                               std::vector<double> scale_exponents = {}, std::optional<std::size_t> cone_dim = std::nullopt) {
  Parameterization p;
  p.kind = ParamKind::Custom;
  p.name = std::move(name);
  p.map = map;
  p.scale_exponents = std::move(scale_exponents);
  if (!p.scale_exponents.empty() && p.scale_exponents.size() != map.num_vars())
    throw Error(ErrorKind::Input, "custom: scale_exponents length differs from parameter count");
  if (cone_dim) {
    p.cone_dim = *cone_dim;
  } else {
    Rng r(0x5eed);
    p.cone_dim = jacobian_rank_at_random(map, r);
  }
  return p;
}

// lambda * (x_0 + a_1 x_1 + ... + a_n x_n)^d with parameters (lambda, a_1..a_n).
inline Parameterization scaled_linear_power(std::size_t n, int d) {
  const std::size_t np = n + 1, nv = np + n + 1;
  std::vector<Term> lin;
  Exponents e0(nv, 0);
  e0[np] = 1;
  lin.push_back({1.0, e0});
  for (std::size_t j = 1; j <= n; ++j) {
    Exponents e(nv, 0);
    e[j] = 1;
    e[np + j] = 1;
    lin.push_back({1.0, e});
  }
  const Polynomial expr = Polynomial::variable(nv, 0) * Polynomial(nv, lin).pow(d);
  std::vector<double> w(np, 0.0);
  w[0] = 1.0;
  Parameterization p = custom(coefficients_in_x(expr, np, n + 1, d),
                              "scaled_linear_power(" + std::to_string(n) + "," + std::to_string(d) + ")", w, np);
  const auto mons = monomials(n + 1, d);
  p.coord_weights = Eigen::MatrixXd::Zero(static_cast<Index>(mons.size()), static_cast<Index>(np));
  for (std::size_t j = 0; j < mons.size(); ++j) {
    p.coord_weights(static_cast<Index>(j), 0) = 1.0;
    for (std::size_t v = 1; v <= n; ++v) p.coord_weights(static_cast<Index>(j), static_cast<Index>(v)) = mons[j][v];
  }
  p.param_weights = Eigen::MatrixXd::Identity(static_cast<Index>(np), static_cast<Index>(np));
  return p;
}

// ---------------------------------------------------------------------------------------------

// A variety X = component of V(system) with a coordinate projection; the common currency of
// witness, pseudowitness and membership computations.
struct Incidence {
  PolynomialSystem system;
  std::vector<std::size_t> image_coords;
  std::size_t dim = 0;
  std::function<CVec(Rng&)> sampler;           // random point of X, if cheaply available
  std::optional<std::size_t> scalar_coord;     // lambda_0 in the patch formulation
  std::string name;

  std::size_t num_vars() const { return system.num_vars(); }
  CVec image(const CVec& x) const { return restrict_coords(x, image_coords); }
};

enum class JoinMode { AffineCone, PatchWithScalars };

inline const char* to_string(JoinMode m) { return m == JoinMode::AffineCone ? "affine_cone" : "patch_with_scalars"; }

struct AbstractJoin {
  std::vector<Parameterization> factors;
  JoinMode mode = JoinMode::AffineCone;
  std::size_t ambient = 0;
  PolynomialSystem system;
  std::vector<std::vector<std::size_t>> blocks;  // variable indices of each a_i
  std::vector<std::size_t> lambda;               // patch mode only
  std::uint64_t patch_seed = 0;
  std::vector<CVec> patches;  // patch mode: coefficients (vars..., constant) for P, lambda, a_1..a_k

  std::size_t num_vars() const { return system.num_vars(); }
  std::size_t num_params() const {
    std::size_t s = 0;
    for (const auto& f : factors) s += f.param_dim();
    return s;
  }
  std::vector<std::size_t> image_coords() const { return iota_coords(0, ambient); }
  std::size_t incidence_dim() const { return mode == JoinMode::AffineCone ? num_params() : num_params() - 1; }
  std::size_t expected_dim() const {
    std::size_t s = 0;
    for (const auto& f : factors) s += f.cone_dim;
    return std::min(ambient, s);
  }

  // Sum of phi_i(a_i) for the parameter blocks of a full point (ignoring lambdas).
  CVec reconstruct(const std::vector<CVec>& params) const {
    CVec P = CVec::Zero(static_cast<Index>(ambient));
    for (std::size_t i = 0; i < factors.size(); ++i) P += factors[i].apply(params[i]);
    return P;
  }

  std::vector<CVec> params_of(const CVec& x) const {
    std::vector<CVec> out;
    for (const auto& b : blocks) out.push_back(restrict_coords(x, b));
    return out;
  }

  // Full variable vector from parameters (affine cone mode).
  CVec point_from_params(const std::vector<CVec>& params) const {
    if (mode != JoinMode::AffineCone) throw Error(ErrorKind::Input, "point_from_params: affine cone joins only");
    CVec x(static_cast<Index>(num_vars()));
    x.head(static_cast<Index>(ambient)) = reconstruct(params);
    for (std::size_t i = 0; i < blocks.size(); ++i)
      for (std::size_t j = 0; j < blocks[i].size(); ++j) x[static_cast<Index>(blocks[i][j])] = params[i][static_cast<Index>(j)];
    return x;
  }

  CVec random_point(Rng& rng) const {
    std::vector<CVec> params;
    for (const auto& f : factors) params.push_back(rng.unit_complex_vector(static_cast<Index>(f.param_dim())));
    if (mode == JoinMode::AffineCone) return point_from_params(params);
    // Patch mode: put each a_i on its patch, pick lambda_1..k, then fix lambda_0 and the
    // common lambda scaling from the P and lambda patches.
    auto project = [](CVec v, const CVec& c) {
      const Index m = v.size();
      Complex val = c[m];
      for (Index j = 0; j < m; ++j) val += c[j] * v[j];
      const CVec dir = c.head(m).conjugate();
      return CVec(v - (val / c.head(m).squaredNorm()) * dir);
    };
    for (std::size_t i = 0; i < params.size(); ++i) params[i] = project(params[i], patches[2 + i]);
    const std::size_t k = factors.size();
    CVec lam(static_cast<Index>(k + 1));
    CVec Q = CVec::Zero(static_cast<Index>(ambient));
    for (std::size_t i = 0; i < k; ++i) {
      lam[static_cast<Index>(i + 1)] = rng.unit_complex();
      Q += factors[i].apply(params[i]) * lam[static_cast<Index>(i + 1)];
    }
    const CVec& cP = patches[0];
    Complex cq = 0.0;
    for (Index j = 0; j < Q.size(); ++j) cq += cP[j] * Q[j];
    const Complex mu = -cP[static_cast<Index>(ambient)] / cq;
    lam[0] = 1.0 / mu;
    const CVec P = mu * Q;
    const CVec& cl = patches[1];
    Complex cv = 0.0;
    for (Index j = 0; j < lam.size(); ++j) cv += cl[j] * lam[j];
    lam *= -cl[static_cast<Index>(k + 1)] / cv;
    CVec x(static_cast<Index>(num_vars()));
    x.head(static_cast<Index>(ambient)) = P;
    for (std::size_t i = 0; i <= k; ++i) x[static_cast<Index>(lambda[i])] = lam[static_cast<Index>(i)];
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < blocks[i].size(); ++j) x[static_cast<Index>(blocks[i][j])] = params[i][static_cast<Index>(j)];
    return x;
  }

  Incidence incidence() const {
    Incidence inc;
    inc.system = system;
    inc.image_coords = image_coords();
    inc.dim = incidence_dim();
    const AbstractJoin self = *this;
    inc.sampler = [self](Rng& r) { return self.random_point(r); };
    if (mode == JoinMode::PatchWithScalars) inc.scalar_coord = lambda[0];
    inc.name = "join";
    return inc;
  }
};

inline AbstractJoin build_abstract_join(const std::vector<Parameterization>& factors, JoinMode mode, Rng& rng) {
  if (factors.empty()) throw Error(ErrorKind::Input, "build_abstract_join: no factors");
  const std::size_t amb = factors[0].ambient_dim();
  for (const auto& f : factors)
    if (f.ambient_dim() != amb) throw Error(ErrorKind::Input, "build_abstract_join: factors have different ambient dimensions");
  AbstractJoin J;
  J.factors = factors;
  J.mode = mode;
  J.ambient = amb;
  const std::size_t k = factors.size();
  std::size_t next = amb;
  if (mode == JoinMode::PatchWithScalars) {
    for (std::size_t i = 0; i <= k; ++i) J.lambda.push_back(next++);
  }
  for (const auto& f : factors) {
    std::vector<std::size_t> b;
    for (std::size_t j = 0; j < f.param_dim(); ++j) b.push_back(next++);
    J.blocks.push_back(b);
  }
  const std::size_t nv = next;
  std::vector<Polynomial> eqs;
  std::vector<PolynomialSystem> embedded;
  for (std::size_t i = 0; i < k; ++i) embedded.push_back(factors[i].map.embed(nv, J.blocks[i]));
  for (std::size_t c = 0; c < amb; ++c) {
    Polynomial p = Polynomial::variable(nv, c);
    if (mode == JoinMode::PatchWithScalars) p = p * Polynomial::variable(nv, J.lambda[0]);
    for (std::size_t i = 0; i < k; ++i) {
      Polynomial t = embedded[i][c];
      if (mode == JoinMode::PatchWithScalars) t = t * Polynomial::variable(nv, J.lambda[i + 1]);
      p = p - t;
    }
    eqs.push_back(p);
  }
  if (mode == JoinMode::PatchWithScalars) {
    J.patch_seed = rng.next_u64();
    Rng local(J.patch_seed);
    std::vector<std::vector<std::size_t>> groups{iota_coords(0, amb), J.lambda};
    for (const auto& b : J.blocks) groups.push_back(b);
    for (const auto& g : groups) {
      CVec c = local.unit_complex_vector(static_cast<Index>(g.size() + 1));
      J.patches.push_back(c);
      eqs.push_back(Polynomial::linear(nv, g, c.head(static_cast<Index>(g.size())), c[static_cast<Index>(g.size())]));
    }
  }
  J.system = PolynomialSystem(nv, eqs);
  return J;
}

// ---------------------------------------------------------------------------------------------

inline std::size_t jacobian_rank_at_random(const PolynomialSystem& f, Rng& rng) {
  const CVec a = rng.unit_complex_vector(static_cast<Index>(f.num_vars()));
  return numerical_rank(f.jacobian(a)).rank;
}

// A random point of X: from the sampler when present, otherwise from a witness computation.
inline CVec sample_point(const Incidence& inc, Rng& rng);

struct ImageDimension {
  std::size_t dim_image = 0;
  std::size_t dim_total = 0;
  long defect = 0;
  std::vector<double> singular_values;
};

// dim Y = dim X - dim Null [Jf(x*); B] at a random x* on X.
inline ImageDimension image_dimension(const Incidence& inc, Rng& rng, std::size_t expected = 0) {
  std::string diag;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const CVec x = sample_point(inc, rng);
    const CMat J = inc.system.jacobian(x);
    const RankInfo jr = numerical_rank(J);
    CMat S(J.rows() + static_cast<Index>(inc.image_coords.size()), J.cols());
    S.topRows(J.rows()) = J;
    S.bottomRows(static_cast<Index>(inc.image_coords.size())).setZero();
    for (std::size_t i = 0; i < inc.image_coords.size(); ++i) S(J.rows() + static_cast<Index>(i), static_cast<Index>(inc.image_coords[i])) = 1.0;
    const RankInfo sr = numerical_rank(S);
    if (jr.ambiguous || sr.ambiguous) {
      diag = "singular value gap below 1e6 at sample " + std::to_string(attempt);
      warn("image_dimension: " + diag + "; resampling");
      continue;
    }
    ImageDimension out;
    out.dim_total = jr.nullity;
    if (out.dim_total < sr.nullity) throw Error(ErrorKind::Internal, "image_dimension: inconsistent nullities");
    out.dim_image = out.dim_total - sr.nullity;
    out.defect = static_cast<long>(expected) - static_cast<long>(out.dim_image);
    for (Index i = 0; i < sr.singular_values.size(); ++i) out.singular_values.push_back(sr.singular_values[i]);
    return out;
  }
  throw Error(ErrorKind::GapAmbiguous, "image_dimension: " + diag);
}

inline ImageDimension image_dimension(const AbstractJoin& J, Rng& rng) {
  return image_dimension(J.incidence(), rng, J.expected_dim());
}

// ---------------------------------------------------------------------------------------------

struct WitnessSet {
  PolynomialSystem system;
  LinearSlice slice;
  SolutionSet points;
  std::size_t dim = 0;
  std::size_t deg = 0;
};

inline WitnessSet witness_set(const PolynomialSystem& f, std::size_t dim, Rng& rng, const TrackOptions& opts = {}) {
  const std::size_t n = f.num_vars();
  if (dim > n) throw Error(ErrorKind::Input, "witness_set: dim exceeds number of variables");
  if (f.size() + dim < n) throw Error(ErrorKind::Input, "witness_set: too few equations for the stated dimension");
  WitnessSet w;
  w.system = f;
  w.dim = dim;
  w.slice = random_slice(n, dim, std::nullopt, rng);
  Rng local = rng.split();
  const PolynomialSystem sq = square_up(f, n - dim, local) | w.slice.as_system();
  const PolynomialSystem full = f | w.slice.as_system();
  SolveReport rep = total_degree_solve_report(sq, local, opts);
  SolutionSet kept;
  kept.seed = rep.solutions.seed;
  for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
    const double r = full.residual(rep.solutions.points[i]);
    if (r < 1e-8) kept.insert(rep.solutions.points[i], r);
  }
  if (kept.empty()) throw Error(ErrorKind::EmptyWitness, "witness_set: no points on the slice (is the dimension right?)");
  w.points = kept;
  w.deg = kept.size();
  return w;
}

inline CVec sample_point(const Incidence& inc, Rng& rng) {
  if (inc.sampler) return inc.sampler(rng);
  const WitnessSet w = witness_set(inc.system, inc.dim, rng);
  return w.points.points[rng.uniform_index(w.points.size())];
}

// ---------------------------------------------------------------------------------------------

enum class PwMethod { FromWitness, Monodromy };

struct PseudoWitnessSet {
  Incidence inc;
  LinearSlice slice_image;  // M1: codim image_dim, supported on the image coordinates
  LinearSlice slice_fiber;  // M2: codim fiber_dim, general
  SolutionSet points;       // U
  std::size_t image_dim = 0, image_deg = 0, fiber_dim = 0, fiber_deg = 0;
  bool trace_verified = false;
  std::vector<std::string> warnings;

  LinearSlice slice() const { return stack(slice_image, slice_fiber); }

  std::vector<CVec> image_points() const {
    std::vector<CVec> out;
    for (const auto& u : points.points) {
      const CVec y = inc.image(u);
      bool seen = false;
      for (const auto& o : out)
        if (relative_distance(o, y) < points.dedup_tol) seen = true;
      if (!seen) out.push_back(y);
    }
    return out;
  }

  // U': one lift per image point.
  std::vector<CVec> one_lift_each() const {
    std::vector<CVec> out, imgs;
    for (const auto& u : points.points) {
      const CVec y = inc.image(u);
      bool seen = false;
      for (const auto& o : imgs)
        if (relative_distance(o, y) < points.dedup_tol) seen = true;
      if (!seen) {
        imgs.push_back(y);
        out.push_back(u);
      }
    }
    return out;
  }

  void recount() {
    image_deg = image_points().size();
    fiber_deg = image_deg ? points.size() / image_deg : 0;
    if (image_deg && points.size() % image_deg)
      warnings.push_back("lift counts differ between image points: |U| = " + std::to_string(points.size()) +
                         ", |pi(U)| = " + std::to_string(image_deg));
  }
};

inline std::vector<std::size_t> complement_coords(std::size_t n, const std::vector<std::size_t>& coords) {
  std::vector<bool> in(n, false);
  for (auto c : coords) in[c] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

// Image-coordinate trace test: translate only the M1 rows.
inline TraceResult pseudowitness_trace(const PseudoWitnessSet& pw, Rng& rng, const TrackOptions& opts = {}) {
  CVec dir = CVec::Zero(static_cast<Index>(pw.image_dim + pw.fiber_dim));
  dir.head(static_cast<Index>(pw.image_dim)) = rng.unit_complex_vector(static_cast<Index>(pw.image_dim));
  return trace_test(pw.inc.system, pw.slice(), pw.points.points, rng, pw.inc.image_coords, dir, opts);
}

inline PseudoWitnessSet pseudowitness_set(const Incidence& inc, std::size_t image_dim, Rng& rng, PwMethod method = PwMethod::Monodromy,
                                          const TrackOptions& opts = {}, std::size_t stall_limit = 10) {
  if (image_dim > inc.dim) throw Error(ErrorKind::Input, "pseudowitness_set: image dimension exceeds dim X");
  PseudoWitnessSet pw;
  pw.inc = inc;
  pw.image_dim = image_dim;
  pw.fiber_dim = inc.dim - image_dim;
  const std::size_t n = inc.num_vars();
  const PolynomialSystem& f = inc.system;
  if (method == PwMethod::FromWitness) {
    const WitnessSet w = witness_set(f, inc.dim, rng, opts);
    pw.slice_image = random_slice_on(n, inc.image_coords, image_dim, std::nullopt, rng);
    pw.slice_fiber = random_slice(n, pw.fiber_dim, std::nullopt, rng);
    const auto paths = move_slice(f, w.slice, w.points, pw.slice(), rng, opts);
    const PolynomialSystem full = f | pw.slice().as_system();
    pw.points.seed = w.points.seed;
    for (const auto& p : paths)
      if (p.status == PathStatus::Converged) pw.points.insert(p.endpoint, full.residual(p.endpoint));
  } else {
    // A slice nearly tangent at the sample stalls every monodromy loop; about 1% of draws
    // are that close, so redraw until the start system is reasonably conditioned.
    CVec x0;
    double best = -1.0;
    for (int attempt = 0; attempt < 8 && best < 1e-6; ++attempt) {
      const CVec x = sample_point(inc, rng);
      const LinearSlice si = random_slice_on(n, inc.image_coords, image_dim, x, rng);
      const LinearSlice sf = random_slice(n, pw.fiber_dim, x, rng);
      const CMat Jx = (f | stack(si, sf).as_system()).jacobian(x);
      const Eigen::JacobiSVD<CMat> svd(Jx);
      const double rc = svd.singularValues().minCoeff() / std::max(svd.singularValues().maxCoeff(), 1e-300);
      if (rc > best) best = rc, x0 = x, pw.slice_image = si, pw.slice_fiber = sf;
    }
    SolutionSet seeds;
    seeds.insert(x0, (f | pw.slice().as_system()).residual(x0));
    const PolynomialSystem base = f | pw.slice().as_system();
    const std::size_t idim = image_dim, fdim = pw.fiber_dim;
    const std::vector<std::size_t> ic = inc.image_coords;
    MemberFn member = [&f, n, ic, idim, fdim](Rng& r) {
      const LinearSlice a = random_slice_on(n, ic, idim, std::nullopt, r);
      const LinearSlice b = random_slice(n, fdim, std::nullopt, r);
      return f | stack(a, b).as_system();
    };
    pw.points = monodromy_populate_family(base, member, seeds, rng, stall_limit, opts);
  }
  if (pw.points.empty()) throw Error(ErrorKind::EmptyWitness, "pseudowitness_set: no points");
  pw.recount();
  const TraceResult tr = pseudowitness_trace(pw, rng, opts);
  pw.trace_verified = tr.passed;
  if (!tr.passed) {
    pw.warnings.push_back("IncompleteDegree: trace test failed (" + tr.diagnostic + ")");
    warn("pseudowitness_set: trace test failed; degree unverified");
  }
  return pw;
}

inline PseudoWitnessSet pseudowitness_set(const AbstractJoin& J, Rng& rng, PwMethod method = PwMethod::Monodromy,
                                          const TrackOptions& opts = {}) {
  const ImageDimension d = image_dimension(J, rng);
  return pseudowitness_set(J.incidence(), d.dim_image, rng, method, opts);
}

}  // namespace joinrank
