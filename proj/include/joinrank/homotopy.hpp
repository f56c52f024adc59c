#pragma once

#include "polynomial.hpp"
#include "slice.hpp"

namespace joinrank {

struct HTerm {
  Complex c1;  // coefficient at t = 1
  Complex c0;  // coefficient at t = 0
  Exponents exps;
};

// Polynomial system whose coefficients are t*c1 + (1-t)*c0.
class Homotopy {
 public:
  Homotopy() = default;

  // at_t1 is used verbatim (callers pre-scale by gamma); at_t0 is reproduced bit-exactly at t = 0.
  static Homotopy between(const PolynomialSystem& at_t1, const PolynomialSystem& at_t0, Complex gamma = 1.0) {
    if (at_t1.num_vars() != at_t0.num_vars() || at_t1.size() != at_t0.size())
      throw Error(ErrorKind::Input, "homotopy endpoints have different shapes");
    Homotopy h;
    h.nvars_ = at_t1.num_vars();
    h.gamma_ = gamma;
    for (std::size_t i = 0; i < at_t1.size(); ++i) {
      const auto& a = at_t1[i].terms();
      const auto& b = at_t0[i].terms();
      std::vector<HTerm> row;
      std::size_t ia = 0, ib = 0;
      while (ia < a.size() || ib < b.size()) {
        if (ib == b.size() || (ia < a.size() && canonical_less(a[ia].exps, b[ib].exps))) {
          row.push_back({a[ia].coeff, 0.0, a[ia].exps});
          ++ia;
        } else if (ia == a.size() || canonical_less(b[ib].exps, a[ia].exps)) {
          row.push_back({0.0, b[ib].coeff, b[ib].exps});
          ++ib;
        } else {
          row.push_back({a[ia].coeff, b[ib].coeff, a[ia].exps});
          ++ia;
          ++ib;
        }
      }
      h.polys_.push_back(std::move(row));
    }
    h.build();
    return h;
  }

  std::size_t num_vars() const { return nvars_; }
  std::size_t size() const { return polys_.size(); }
  Complex gamma() const { return gamma_; }
  const std::vector<std::vector<HTerm>>& polys() const { return polys_; }

  void evaluate(const CVec& x, double t, CVec* H, CMat* Hx, CVec* Ht) const {
    kernel_->eval(x, t, true, H, Hx, Ht);
  }

  CVec value(const CVec& x, double t) const {
    CVec v;
    kernel_->eval(x, t, true, &v, nullptr, nullptr);
    return v;
  }

  double residual(const CVec& x, double t) const {
    CVec v;
    std::vector<double> s(polys_.size());
    kernel_->eval(x, t, true, &v, nullptr, nullptr, s.data());
    double r = 0;
    for (std::size_t i = 0; i < polys_.size(); ++i) r = std::max(r, std::abs(v[static_cast<Index>(i)]) / std::max(1.0, s[i]));
    return r;
  }

  PolynomialSystem at(double t) const {
    std::vector<Polynomial> ps;
    for (const auto& row : polys_) {
      std::vector<Term> terms;
      for (const auto& ht : row) terms.push_back({t * ht.c1 + (1.0 - t) * ht.c0, ht.exps});
      ps.emplace_back(nvars_, std::move(terms));
    }
    return PolynomialSystem(nvars_, std::move(ps));
  }

  PolynomialSystem target() const { return at(0.0); }

 private:
  void build() {
    auto k = std::make_shared<detail::Kernel>(nvars_, polys_.size());
    for (std::size_t i = 0; i < polys_.size(); ++i)
      for (const auto& t : polys_[i]) k->add(i, t.exps, t.c1, t.c0);
    k->finalize();
    kernel_ = std::move(k);
  }

  std::size_t nvars_ = 0;
  std::vector<std::vector<HTerm>> polys_;
  Complex gamma_ = 1.0;
  std::shared_ptr<const detail::Kernel> kernel_;
};

inline PolynomialSystem scaled(const PolynomialSystem& f, Complex c) {
  std::vector<Polynomial> ps;
  for (const auto& p : f.polys()) ps.push_back(c * p);
  return PolynomialSystem(f.num_vars(), std::move(ps));
}

// H(x,t) = t*gamma*start(x) + (1-t)*target(x).
inline Homotopy make_segment_homotopy(const PolynomialSystem& start, const PolynomialSystem& target, Complex gamma) {
  if (start.num_vars() != target.num_vars() || start.size() != target.size())
    throw Error(ErrorKind::Input, "make_segment_homotopy: shape mismatch");
  return Homotopy::between(scaled(start, gamma), target, gamma);
}

inline Homotopy make_segment_homotopy(const PolynomialSystem& start, const PolynomialSystem& target, Rng& rng) {
  return make_segment_homotopy(start, target, rng.unit_complex());
}

// f is shared by both ends; gamma multiplies only the slice rows.
inline Homotopy make_slice_homotopy(const PolynomialSystem& f, const LinearSlice& from, const LinearSlice& to, Complex gamma) {
  if (from.codim() != to.codim() || from.num_vars() != to.num_vars() || from.num_vars() != f.num_vars())
    throw Error(ErrorKind::Input, "slice homotopy: shape mismatch");
  return Homotopy::between(f | scaled(from.as_system(), gamma), f | to.as_system(), gamma);
}

}  // namespace joinrank
