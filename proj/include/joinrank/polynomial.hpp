#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "core.hpp"

namespace joinrank {

using Exponents = std::vector<int>;

struct Term {
  Complex coeff;
  Exponents exps;
};

inline int exponent_sum(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

// Graded order, higher degree first, ties broken lexicographically (x0 before x1).
inline bool canonical_less(const Exponents& a, const Exponents& b) {
  const int da = exponent_sum(a), db = exponent_sum(b);
  if (da != db) return da > db;
  return a > b;
}

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}
  Polynomial(std::size_t nvars, std::vector<Term> terms) : nvars_(nvars), terms_(std::move(terms)) { canonicalize(); }

  static Polynomial constant(std::size_t nvars, Complex c) {
    return Polynomial(nvars, {Term{c, Exponents(nvars, 0)}});
  }

  static Polynomial variable(std::size_t nvars, std::size_t var, Complex c = 1.0) {
    Exponents e(nvars, 0);
    e.at(var) = 1;
    return Polynomial(nvars, {Term{c, e}});
  }

  // sum_j coeffs[j] * x_{vars[j]} + c0
  static Polynomial linear(std::size_t nvars, const std::vector<std::size_t>& vars, const CVec& coeffs,
                           Complex c0 = 0.0) {
    std::vector<Term> t;
    for (std::size_t j = 0; j < vars.size(); ++j) {
      Exponents e(nvars, 0);
      e.at(vars[j]) = 1;
      t.push_back({coeffs[static_cast<Index>(j)], e});
    }
    t.push_back({c0, Exponents(nvars, 0)});
    return Polynomial(nvars, std::move(t));
  }

  std::size_t num_vars() const { return nvars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int total_degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, exponent_sum(t.exps));
    return d;
  }

  int degree_in(const std::vector<std::size_t>& vars) const {
    int d = 0;
    for (const auto& t : terms_) {
      int s = 0;
      for (auto v : vars) s += t.exps[v];
      d = std::max(d, s);
    }
    return d;
  }

  Complex coefficient(const Exponents& e) const {
    for (const auto& t : terms_)
      if (t.exps == e) return t.coeff;
    return 0.0;
  }

  Complex evaluate(const CVec& x) const {
    Complex s = 0.0;
    for (const auto& t : terms_) {
      Complex m = t.coeff;
      for (std::size_t v = 0; v < nvars_; ++v)
        for (int k = 0; k < t.exps[v]; ++k) m *= x[static_cast<Index>(v)];
      s += m;
    }
    return s;
  }

  Polynomial derivative(std::size_t var) const {
    std::vector<Term> out;
    for (const auto& t : terms_) {
      if (t.exps[var] == 0) continue;
      Term d = t;
      d.coeff *= static_cast<double>(t.exps[var]);
      d.exps[var] -= 1;
      out.push_back(std::move(d));
    }
    return Polynomial(nvars_, std::move(out));
  }

  // Re-index variables: old variable i becomes new variable map[i].
  Polynomial embed(std::size_t new_nvars, const std::vector<std::size_t>& map) const {
    if (map.size() != nvars_) throw Error(ErrorKind::Input, "embed: map length mismatch");
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
      Exponents e(new_nvars, 0);
      for (std::size_t v = 0; v < nvars_; ++v) e.at(map[v]) += t.exps[v];
      out.push_back({t.coeff, std::move(e)});
    }
    return Polynomial(new_nvars, std::move(out));
  }

  Polynomial operator-() const {
    Polynomial p = *this;
    for (auto& t : p.terms_) t.coeff = -t.coeff;
    return p;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    check_same(a, b);
    std::vector<Term> t = a.terms_;
    t.insert(t.end(), b.terms_.begin(), b.terms_.end());
    return Polynomial(a.nvars_, std::move(t));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    check_same(a, b);
    std::map<Exponents, Complex, decltype(&canonical_less)> acc(&canonical_less);
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_) {
        Exponents e(a.nvars_);
        for (std::size_t v = 0; v < a.nvars_; ++v) e[v] = ta.exps[v] + tb.exps[v];
        acc[e] += ta.coeff * tb.coeff;
      }
    std::vector<Term> t;
    t.reserve(acc.size());
    for (auto& [e, c] : acc) t.push_back({c, e});
    return Polynomial(a.nvars_, std::move(t));
  }

  friend Polynomial operator*(Complex c, const Polynomial& p) {
    std::vector<Term> t = p.terms_;
    for (auto& x : t) x.coeff *= c;
    return Polynomial(p.nvars_, std::move(t));
  }

  Polynomial pow(int k) const {
    Polynomial r = constant(nvars_, 1.0);
    for (int i = 0; i < k; ++i) r = r * (*this);
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    if (a.nvars_ != b.nvars_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].coeff != b.terms_[i].coeff || a.terms_[i].exps != b.terms_[i].exps) return false;
    return true;
  }

 private:
  static void check_same(const Polynomial& a, const Polynomial& b) {
    if (a.nvars_ != b.nvars_) throw Error(ErrorKind::Input, "polynomial variable count mismatch");
  }

  void canonicalize() {
    for (const auto& t : terms_)
      if (t.exps.size() != nvars_) throw Error(ErrorKind::Input, "exponent vector length differs from num_vars");
    std::map<Exponents, Complex, decltype(&canonical_less)> acc(&canonical_less);
    for (auto& t : terms_) {
      for (int e : t.exps)
        if (e < 0) throw Error(ErrorKind::Input, "negative exponent");
      acc[t.exps] += t.coeff;
    }
    terms_.clear();
    for (auto& [e, c] : acc)
      if (c != Complex(0.0)) terms_.push_back({c, e});
  }

  std::size_t nvars_ = 0;
  std::vector<Term> terms_;
};

namespace detail {

// Flattened monomial table shared by systems and homotopies. Each term carries two
// coefficients; systems only use c0, homotopies use t*c1 + (1-t)*c0.
class Kernel {
 public:
  struct Factor {
    std::uint32_t var;
    std::int32_t exp;
  };
  struct Mono {
    std::uint32_t eq;
    std::uint32_t fbegin, fend;
  };

  Kernel() = default;

  Kernel(std::size_t nvars, std::size_t neqs) : nvars_(nvars), neqs_(neqs), max_deg_(nvars, 0) {}

  void add(std::size_t eq, const Exponents& e, Complex c1, Complex c0) {
    Mono m{static_cast<std::uint32_t>(eq), static_cast<std::uint32_t>(factors_.size()), 0};
    for (std::size_t v = 0; v < nvars_; ++v)
      if (e[v] > 0) {
        factors_.push_back({static_cast<std::uint32_t>(v), e[v]});
        max_deg_[v] = std::max(max_deg_[v], e[v]);
      }
    m.fend = static_cast<std::uint32_t>(factors_.size());
    monos_.push_back(m);
    c1_.push_back(c1);
    c0_.push_back(c0);
  }

  void finalize() {
    offset_.assign(nvars_ + 1, 0);
    for (std::size_t v = 0; v < nvars_; ++v) offset_[v + 1] = offset_[v] + static_cast<std::size_t>(max_deg_[v]) + 1;
  }

  std::size_t num_vars() const { return nvars_; }
  std::size_t num_eqs() const { return neqs_; }
  std::size_t num_terms() const { return monos_.size(); }

  // Evaluates values (and optionally Jacobian and t-derivative) with coefficient weights
  // w1 on c1 and w0 on c0. For plain systems w1 = 0, w0 = 1.
  void eval(const CVec& x, double t, bool homotopy, CVec* val, CMat* jac, CVec* dt, double* scale = nullptr) const {
    thread_local std::vector<Complex> pw;
    pw.resize(offset_.empty() ? 0 : offset_.back());
    for (std::size_t v = 0; v < nvars_; ++v) {
      Complex* p = pw.data() + offset_[v];
      p[0] = 1.0;
      const Complex xv = x[static_cast<Index>(v)];
      for (int k = 1; k <= max_deg_[v]; ++k) p[k] = p[k - 1] * xv;
    }
    if (val) val->setZero(static_cast<Index>(neqs_));
    if (jac) jac->setZero(static_cast<Index>(neqs_), static_cast<Index>(nvars_));
    if (dt) dt->setZero(static_cast<Index>(neqs_));
    if (scale) std::fill(scale, scale + neqs_, 0.0);
    std::array<Complex, 40> pre{}, suf{};
    for (std::size_t i = 0; i < monos_.size(); ++i) {
      const Mono& m = monos_[i];
      const Complex c = homotopy ? t * c1_[i] + (1.0 - t) * c0_[i] : c0_[i];
      const std::size_t k = m.fend - m.fbegin;
      Complex mv = 1.0;
      for (std::uint32_t f = m.fbegin; f < m.fend; ++f) mv *= pw[offset_[factors_[f].var] + factors_[f].exp];
      const Index eq = static_cast<Index>(m.eq);
      if (val) (*val)[eq] += c * mv;
      if (dt) (*dt)[eq] += (c1_[i] - c0_[i]) * mv;
      if (scale) scale[m.eq] += std::abs(c) * std::abs(mv);
      if (jac && k > 0) {
        if (k == 1) {
          const Factor& fa = factors_[m.fbegin];
          (*jac)(eq, fa.var) += c * static_cast<double>(fa.exp) * pw[offset_[fa.var] + fa.exp - 1];
        } else if (k <= pre.size()) {
          pre[0] = 1.0;
          for (std::size_t j = 1; j < k; ++j) {
            const Factor& fa = factors_[m.fbegin + j - 1];
            pre[j] = pre[j - 1] * pw[offset_[fa.var] + fa.exp];
          }
          suf[k - 1] = 1.0;
          for (std::size_t j = k - 1; j > 0; --j) {
            const Factor& fa = factors_[m.fbegin + j];
            suf[j - 1] = suf[j] * pw[offset_[fa.var] + fa.exp];
          }
          for (std::size_t j = 0; j < k; ++j) {
            const Factor& fa = factors_[m.fbegin + j];
            (*jac)(eq, fa.var) += c * static_cast<double>(fa.exp) * pw[offset_[fa.var] + fa.exp - 1] * pre[j] * suf[j];
          }
        } else {
          for (std::size_t j = 0; j < k; ++j) {
            const Factor& fa = factors_[m.fbegin + j];
            Complex d = c * static_cast<double>(fa.exp) * pw[offset_[fa.var] + fa.exp - 1];
            for (std::size_t l = 0; l < k; ++l)
              if (l != j) d *= pw[offset_[factors_[m.fbegin + l].var] + factors_[m.fbegin + l].exp];
            (*jac)(eq, fa.var) += d;
          }
        }
      }
    }
  }

 private:
  std::size_t nvars_ = 0, neqs_ = 0;
  std::vector<int> max_deg_;
  std::vector<std::size_t> offset_;
  std::vector<Factor> factors_;
  std::vector<Mono> monos_;
  std::vector<Complex> c1_, c0_;
};

}  // namespace detail

class PolynomialSystem {
 public:
  PolynomialSystem() : kernel_(std::make_shared<detail::Kernel>(0, 0)) {}

  PolynomialSystem(std::size_t nvars, std::vector<Polynomial> polys) : nvars_(nvars), polys_(std::move(polys)) {
    for (const auto& p : polys_)
      if (p.num_vars() != nvars_) throw Error(ErrorKind::Input, "polynomial num_vars differs from system");
    build();
  }

  std::size_t num_vars() const { return nvars_; }
  std::size_t size() const { return polys_.size(); }
  const std::vector<Polynomial>& polys() const { return polys_; }
  const Polynomial& operator[](std::size_t i) const { return polys_.at(i); }

  std::vector<int> degrees() const {
    std::vector<int> d;
    for (const auto& p : polys_) d.push_back(p.total_degree());
    return d;
  }

  const detail::Kernel& kernel() const { return *kernel_; }

  CVec evaluate(const CVec& x) const {
    check(x);
    CVec v;
    kernel_->eval(x, 0.0, false, &v, nullptr, nullptr);
    return v;
  }

  CMat jacobian(const CVec& x) const {
    check(x);
    CMat j;
    kernel_->eval(x, 0.0, false, nullptr, &j, nullptr);
    return j;
  }

  void evaluate_with_jacobian(const CVec& x, CVec& v, CMat& j) const {
    check(x);
    kernel_->eval(x, 0.0, false, &v, &j, nullptr);
  }

  // Max over equations of |f_i(x)| / max(1, sum of term magnitudes): absolute for
  // moderate coordinates, relative once terms get large.
  double residual(const CVec& x) const {
    check(x);
    CVec v;
    std::vector<double> s(polys_.size());
    kernel_->eval(x, 0.0, false, &v, nullptr, nullptr, s.data());
    double r = 0;
    for (std::size_t i = 0; i < polys_.size(); ++i) r = std::max(r, std::abs(v[static_cast<Index>(i)]) / std::max(1.0, s[i]));
    return r;
  }

  PolynomialSystem operator|(const PolynomialSystem& other) const {
    if (other.nvars_ != nvars_) throw Error(ErrorKind::Input, "concatenating systems with different num_vars");
    std::vector<Polynomial> p = polys_;
    p.insert(p.end(), other.polys_.begin(), other.polys_.end());
    return PolynomialSystem(nvars_, std::move(p));
  }

  PolynomialSystem embed(std::size_t new_nvars, const std::vector<std::size_t>& map) const {
    std::vector<Polynomial> p;
    for (const auto& q : polys_) p.push_back(q.embed(new_nvars, map));
    return PolynomialSystem(new_nvars, std::move(p));
  }

  // Random linear combinations R*f, used to square up overdetermined systems.
  PolynomialSystem combine(const CMat& R) const {
    if (static_cast<std::size_t>(R.cols()) != polys_.size()) throw Error(ErrorKind::Input, "combine: shape mismatch");
    std::vector<Polynomial> out;
    for (Index i = 0; i < R.rows(); ++i) {
      Polynomial acc(nvars_);
      for (Index j = 0; j < R.cols(); ++j) acc = acc + R(i, j) * polys_[static_cast<std::size_t>(j)];
      out.push_back(acc);
    }
    return PolynomialSystem(nvars_, std::move(out));
  }

  friend bool operator==(const PolynomialSystem& a, const PolynomialSystem& b) {
    return a.nvars_ == b.nvars_ && a.polys_ == b.polys_;
  }

 private:
  void check(const CVec& x) const {
    if (static_cast<std::size_t>(x.size()) != nvars_) throw Error(ErrorKind::Input, "point length differs from num_vars");
  }

  void build() {
    auto k = std::make_shared<detail::Kernel>(nvars_, polys_.size());
    for (std::size_t i = 0; i < polys_.size(); ++i)
      for (const auto& t : polys_[i].terms()) k->add(i, t.exps, 0.0, t.coeff);
    k->finalize();
    kernel_ = std::move(k);
  }

  std::size_t nvars_ = 0;
  std::vector<Polynomial> polys_;
  std::shared_ptr<const detail::Kernel> kernel_;
};

inline CVec evaluate(const PolynomialSystem& f, const CVec& x) { return f.evaluate(x); }
inline CMat jacobian(const PolynomialSystem& f, const CVec& x) { return f.jacobian(x); }

// Symbolic Jacobian as a matrix of polynomials.
inline std::vector<std::vector<Polynomial>> symbolic_jacobian(const PolynomialSystem& f) {
  std::vector<std::vector<Polynomial>> J;
  for (const auto& p : f.polys()) {
    std::vector<Polynomial> row;
    for (std::size_t v = 0; v < f.num_vars(); ++v) row.push_back(p.derivative(v));
    J.push_back(std::move(row));
  }
  return J;
}

}  // namespace joinrank
