#ifndef NONCLASS_POLYALG_HPP
#define NONCLASS_POLYALG_HPP

// Polynomial types used throughout the library:
//
//   HermBivarPoly  p(conj(a), a) = sum_{k,l} w_kl conj(a)^k a^l with w_kl = conj(w_lk).
//                  The same table is the normally ordered observable
//                  W = sum w_kl (a^dag)^k a^l.
//   RealBivarPoly  f(x, y) = sum c_ij x^i y^j, related to the above by a = x + i y.
//   UnivariatePoly f(r) = sum c_s r^s.
//   TrigPoly       q(theta) = sum_{l=-t..t} c_l e^{i l theta} with c_l = conj(c_{-l}).
//
// Exponent pairs are kept in graded-lexicographic order: total degree first,
// then descending first exponent, so x^2 < xy < y^2 within degree two.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonclass {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Exponent {
  int first = 0;
  int second = 0;
  int degree() const { return first + second; }
  friend bool operator==(const Exponent&, const Exponent&) = default;
};

struct GradedLex {
  bool operator()(const Exponent& a, const Exponent& b) const {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return a.first > b.first;
  }
};

/// All exponent pairs (i, j) with i + j <= degree, in graded-lex order.
inline std::vector<Exponent> monomials_up_to(int degree) {
  std::vector<Exponent> out;
  for (int d = 0; d <= degree; ++d)
    for (int i = d; i >= 0; --i) out.push_back({i, d - i});
  return out;
}

/// Index of (i, j) inside monomials_up_to(...).
inline int graded_lex_index(Exponent e) {
  const int d = e.degree();
  return d * (d + 1) / 2 + (d - e.first);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r > 1e15 ? r : std::round(r);
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline cplx ipow(cplx z, int n) {
  cplx r = 1.0;
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

inline double ipow(double z, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

enum class SupportMode { total, box };

inline std::string to_string(SupportMode m) { return m == SupportMode::total ? "total" : "box"; }

class HermBivarPoly {
 public:
  using Terms = std::map<Exponent, cplx, GradedLex>;

  HermBivarPoly() = default;
  explicit HermBivarPoly(int degree_bound, SupportMode mode = SupportMode::total)
      : degree_bound_(degree_bound), mode_(mode) {
    if (degree_bound < 0) throw Error("HermBivarPoly: negative degree bound");
  }

  int degree_bound() const { return degree_bound_; }
  SupportMode mode() const { return mode_; }
  const Terms& terms() const { return terms_; }

  bool admits(int k, int l) const {
    if (k < 0 || l < 0) return false;
    return mode_ == SupportMode::total ? k + l <= degree_bound_
                                       : k <= degree_bound_ && l <= degree_bound_;
  }

  cplx coeff(int k, int l) const {
    auto it = terms_.find({k, l});
    return it == terms_.end() ? cplx{} : it->second;
  }

  /// Sets w_kl and its mirror w_lk = conj(w_kl). Diagonal terms must be real.
  void set(int k, int l, cplx value) {
    if (!admits(k, l))
      throw Error("HermBivarPoly: exponent (" + std::to_string(k) + "," + std::to_string(l) +
                  ") outside support");
    if (k == l) {
      if (std::abs(value.imag()) > 1e-12 * std::max(1.0, std::abs(value)))
        throw Error("HermBivarPoly: diagonal coefficient must be real");
      value = value.real();
    }
    put(k, l, value);
    if (k != l) put(l, k, std::conj(value));
  }

  void add(int k, int l, cplx value) { set(k, l, coeff(k, l) + value); }

  /// Largest |k + l| over nonzero terms (-1 for the zero polynomial).
  int degree() const {
    int d = -1;
    for (const auto& [e, v] : terms_)
      if (v != cplx{}) d = std::max(d, e.degree());
    return d;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& [e, v] : terms_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_hermitian(double tol = 1e-12) const {
    const double scale = std::max(1.0, max_abs());
    for (const auto& [e, v] : terms_)
      if (std::abs(v - std::conj(coeff(e.second, e.first))) > tol * scale) return false;
    return true;
  }

  /// p(conj(a), a). Real by Hermitian symmetry.
  double evaluate(cplx alpha) const {
    cplx s = 0.0;
    const cplx ab = std::conj(alpha);
    for (const auto& [e, v] : terms_) s += v * ipow(ab, e.first) * ipow(alpha, e.second);
    return s.real();
  }

  cplx evaluate_complex(cplx alpha) const {
    cplx s = 0.0;
    const cplx ab = std::conj(alpha);
    for (const auto& [e, v] : terms_) s += v * ipow(ab, e.first) * ipow(alpha, e.second);
    return s;
  }

  HermBivarPoly& operator+=(const HermBivarPoly& o) {
    widen_to(o);
    for (const auto& [e, v] : o.terms_) put(e.first, e.second, coeff(e.first, e.second) + v);
    return *this;
  }

  HermBivarPoly& operator*=(double s) {
    for (auto& [e, v] : terms_) v *= s;
    return *this;
  }

  friend HermBivarPoly operator+(HermBivarPoly a, const HermBivarPoly& b) { return a += b; }
  friend HermBivarPoly operator*(double s, HermBivarPoly a) { return a *= s; }

  /// Drop coefficients with magnitude <= tol * max_abs().
  void prune(double tol = 0.0) {
    const double cut = tol * max_abs();
    std::erase_if(terms_, [cut](const auto& kv) { return std::abs(kv.second) <= cut; });
  }

  HermBivarPoly with_support(int degree_bound, SupportMode mode) const {
    HermBivarPoly out(degree_bound, mode);
    for (const auto& [e, v] : terms_) {
      if (v == cplx{}) continue;
      if (!out.admits(e.first, e.second)) throw Error("HermBivarPoly: term does not fit new support");
      out.put(e.first, e.second, v);
    }
    return out;
  }

 private:
  void put(int k, int l, cplx v) { terms_[{k, l}] = v; }

  void widen_to(const HermBivarPoly& o) {
    if (mode_ == o.mode_) {
      degree_bound_ = std::max(degree_bound_, o.degree_bound_);
    } else {
      int need = 0;
      for (const auto& [e, v] : terms_) need = std::max(need, e.degree());
      for (const auto& [e, v] : o.terms_) need = std::max(need, e.degree());
      mode_ = SupportMode::total;
      degree_bound_ = std::max({need, degree_bound_, o.degree_bound_});
    }
  }

  int degree_bound_ = 0;
  SupportMode mode_ = SupportMode::total;
  Terms terms_;
};

class RealBivarPoly {
 public:
  using Terms = std::map<Exponent, double, GradedLex>;

  RealBivarPoly() = default;
  RealBivarPoly(std::initializer_list<std::pair<Exponent, double>> init) {
    for (const auto& [e, v] : init) add(e.first, e.second, v);
  }

  const Terms& terms() const { return terms_; }
  double coeff(int i, int j) const {
    auto it = terms_.find({i, j});
    return it == terms_.end() ? 0.0 : it->second;
  }
  void set(int i, int j, double v) {
    if (i < 0 || j < 0) throw Error("RealBivarPoly: negative exponent");
    terms_[{i, j}] = v;
  }
  void add(int i, int j, double v) { set(i, j, coeff(i, j) + v); }

  int degree() const {
    int d = -1;
    for (const auto& [e, v] : terms_)
      if (v != 0.0) d = std::max(d, e.degree());
    return d;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& [e, v] : terms_) m = std::max(m, std::abs(v));
    return m;
  }

  double operator()(double x, double y) const {
    double s = 0.0;
    for (const auto& [e, v] : terms_) s += v * ipow(x, e.first) * ipow(y, e.second);
    return s;
  }

  friend RealBivarPoly operator*(const RealBivarPoly& a, const RealBivarPoly& b) {
    RealBivarPoly out;
    for (const auto& [ea, va] : a.terms_)
      for (const auto& [eb, vb] : b.terms_) out.add(ea.first + eb.first, ea.second + eb.second, va * vb);
    return out;
  }
  RealBivarPoly& operator+=(const RealBivarPoly& o) {
    for (const auto& [e, v] : o.terms_) add(e.first, e.second, v);
    return *this;
  }

  void prune(double tol = 0.0) {
    const double cut = tol * max_abs();
    std::erase_if(terms_, [cut](const auto& kv) { return std::abs(kv.second) <= cut; });
  }

 private:
  Terms terms_;
};

class UnivariatePoly {
 public:
  UnivariatePoly() = default;
  explicit UnivariatePoly(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double coeff(int s) const { return s >= 0 && s < static_cast<int>(c_.size()) ? c_[s] : 0.0; }
  bool is_zero() const { return c_.empty(); }

  double operator()(double r) const {
    double s = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * r + *it;
    return s;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

class TrigPoly {
 public:
  TrigPoly() : c_(1, 0.0) {}
  explicit TrigPoly(int half_degree) : t_(half_degree), c_(2 * half_degree + 1, 0.0) {
    if (half_degree < 0) throw Error("TrigPoly: negative half degree");
  }

  int half_degree() const { return t_; }
  cplx coeff(int l) const { return std::abs(l) > t_ ? cplx{} : c_[l + t_]; }
  void set(int l, cplx v) {
    if (std::abs(l) > t_) throw Error("TrigPoly: frequency outside half degree");
    c_[l + t_] = v;
    c_[-l + t_] = std::conj(v);
    if (l == 0) c_[t_] = v.real();
  }
  void add(int l, cplx v) {
    if (std::abs(l) > t_) grow(std::abs(l));
    c_[l + t_] += v;
  }

  /// Smallest t' <= t such that all coefficients beyond t' vanish.
  int effective_half_degree(double tol = 0.0) const {
    for (int l = t_; l > 0; --l)
      if (std::abs(c_[l + t_]) > tol || std::abs(c_[-l + t_]) > tol) return l;
    return 0;
  }

  bool is_real_valued(double tol = 1e-12) const {
    double scale = 1.0;
    for (const auto& v : c_) scale = std::max(scale, std::abs(v));
    for (int l = 0; l <= t_; ++l)
      if (std::abs(coeff(l) - std::conj(coeff(-l))) > tol * scale) return false;
    return true;
  }

  double operator()(double theta) const {
    cplx s = 0.0;
    for (int l = -t_; l <= t_; ++l) s += c_[l + t_] * std::polar(1.0, l * theta);
    return s.real();
  }

  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
    TrigPoly out(std::max(a.t_, b.t_));
    for (int l = -a.t_; l <= a.t_; ++l) out.c_[l + out.t_] += a.c_[l + a.t_];
    for (int l = -b.t_; l <= b.t_; ++l) out.c_[l + out.t_] += b.c_[l + b.t_];
    return out;
  }
  TrigPoly& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

 private:
  void grow(int t) {
    std::vector<cplx> c(2 * t + 1, 0.0);
    for (int l = -t_; l <= t_; ++l) c[l + t] = c_[l + t_];
    c_ = std::move(c);
    t_ = t;
  }
  int t_ = 0;
  std::vector<cplx> c_;
};

// ---------------------------------------------------------------------------
// Conversions

/// Substitutes a = x + i y into p(conj(a), a).
inline RealBivarPoly ladder_to_real(const HermBivarPoly& p) {
  std::map<Exponent, cplx, GradedLex> acc;
  const cplx I(0.0, 1.0);
  for (const auto& [e, w] : p.terms()) {
    if (w == cplx{}) continue;
    const int k = e.first, l = e.second;
    // (x - i y)^k (x + i y)^l
    for (int u = 0; u <= k; ++u) {
      const cplx cu = binomial(k, u) * ipow(-I, u);
      for (int v = 0; v <= l; ++v) {
        const cplx cv = binomial(l, v) * ipow(I, v);
        acc[{k + l - u - v, u + v}] += w * cu * cv;
      }
    }
  }
  RealBivarPoly out;
  for (const auto& [e, v] : acc) out.set(e.first, e.second, v.real());
  return out;
}

/// Free expansion of sum wq_kl :X^k P^l: with X -> (a + a^dag)/2 and
/// P -> (a - a^dag)/(2i), treating a and a^dag as commuting.
inline HermBivarPoly quadrature_to_ladder(const RealBivarPoly& wq) {
  int deg = std::max(0, wq.degree());
  HermBivarPoly out(deg, SupportMode::total);
  std::map<Exponent, cplx, GradedLex> acc;
  const cplx I(0.0, 1.0);
  for (const auto& [e, w] : wq.terms()) {
    if (w == 0.0) continue;
    const int k = e.first, l = e.second;
    const cplx pref = w / (std::pow(2.0, k) * ipow(2.0 * I, l));
    // x = (a + conj a)/2, y = (a - conj a)/(2i); count powers of conj(a).
    for (int u = 0; u <= k; ++u) {
      for (int v = 0; v <= l; ++v) {
        const double sgn = (v % 2 == 0) ? 1.0 : -1.0;
        acc[{u + v, k + l - u - v}] += pref * binomial(k, u) * binomial(l, v) * sgn;
      }
    }
  }
  for (const auto& [e, v] : acc)
    if (e.first <= e.second) out.set(e.first, e.second, e.first == e.second ? cplx(v.real()) : v);
  return out;
}

/// q_s(theta) = sum_{k+l=s} w_kl e^{i(l-k) theta}, s = 0..deg.
inline std::vector<TrigPoly> polar_decompose(const HermBivarPoly& p) {
  const int deg = std::max(0, p.degree());
  std::vector<TrigPoly> q;
  q.reserve(deg + 1);
  for (int s = 0; s <= deg; ++s) q.emplace_back(s);
  for (const auto& [e, w] : p.terms()) {
    if (w == cplx{}) continue;
    q[e.degree()].add(e.second - e.first, w);
  }
  for (auto& t : q) {
    const int eff = t.effective_half_degree();
    if (eff < t.half_degree()) {
      TrigPoly r(eff);
      for (int l = -eff; l <= eff; ++l) r.add(l, t.coeff(l));
      t = r;
    }
  }
  return q;
}

/// One Pascal-triangle step: coefficients of (1 + r) * sum_s q_s r^s.
inline std::vector<TrigPoly> pascal_step(const std::vector<TrigPoly>& q) {
  if (q.empty()) throw Error("pascal_step: empty sequence");
  std::vector<TrigPoly> out(q.size() + 1);
  out.front() = q.front();
  out.back() = q.back();
  for (std::size_t s = 1; s < q.size(); ++s) out[s] = q[s - 1] + q[s];
  return out;
}

inline std::vector<TrigPoly> pascal_steps(std::vector<TrigPoly> q, int b) {
  for (int i = 0; i < b; ++i) q = pascal_step(q);
  return q;
}

/// (1 + conj(a) a)^b p.
inline HermBivarPoly reznick_multiply(const HermBivarPoly& p, int b) {
  if (b < 0) throw Error("reznick_multiply: negative exponent");
  const int bound = p.degree_bound() + (p.mode() == SupportMode::total ? 2 * b : b);
  HermBivarPoly out(bound, p.mode());
  for (const auto& [e, w] : p.terms()) {
    if (w == cplx{} || e.first > e.second) continue;
    for (int j = 0; j <= b; ++j) out.add(e.first + j, e.second + j, binomial(b, j) * w);
  }
  return out;
}

/// (1 + x^2 + y^2)^b f.
inline RealBivarPoly reznick_multiply(const RealBivarPoly& f, int b) {
  if (b < 0) throw Error("reznick_multiply: negative exponent");
  RealBivarPoly mult{{{0, 0}, 1.0}, {{2, 0}, 1.0}, {{0, 2}, 1.0}};
  RealBivarPoly out = f;
  for (int i = 0; i < b; ++i) out = out * mult;
  return out;
}

/// f(r) = p(r e^{-i theta}, r e^{i theta}) for r over the whole real line.
inline UnivariatePoly restrict_to_line(const HermBivarPoly& p, double theta) {
  const auto q = polar_decompose(p);
  std::vector<double> c(q.size());
  for (std::size_t s = 0; s < q.size(); ++s) c[s] = q[s](theta);
  return UnivariatePoly(std::move(c));
}

inline HermBivarPoly hermitian_from_real(const RealBivarPoly& f) { return quadrature_to_ladder(f); }

}  // namespace nonclass

#endif  // NONCLASS_POLYALG_HPP
