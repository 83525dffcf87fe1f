#ifndef NONCLASS_CERTIFY_HPP
#define NONCLASS_CERTIFY_HPP

// Nonnegativity certificates:
//
//   sos-gram        f = m' G m, G psd, m = monomials up to deg/2
//   reznick(b)      (1 + x^2 + y^2)^b f = m' G m
//   pfr(b)          every q_s of (1 + r)^b sum_s q_s(theta) r^s is a Hermitian
//                   square: c_l = sum_j Q(j + l, j), Q psd
//   univariate-sos  f(r) = v' G v, v = (1, r, ..., r^d)
//   rays            univariate-sos along a finite set of lines through 0
//   fejer-riesz     a single trigonometric polynomial, as in pfr
//
// The constraint builders accept affine polynomials P0 + sum_i u_i P_i so the
// same code serves fixed-polynomial certification and witness searches.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nonclass/polyalg.hpp"
#include "nonclass/sdp/solve.hpp"

namespace nonclass {

/// P0 + sum_i u_i P_i with u_i free scalars of a ConicProblem.
template <class Poly>
struct Affine {
  Poly constant;
  std::vector<std::pair<int, Poly>> terms;

  template <class F>
  auto map(F&& f) const {
    Affine<decltype(f(constant))> out{f(constant), {}};
    out.terms.reserve(terms.size());
    for (const auto& [i, p] : terms) out.terms.emplace_back(i, f(p));
    return out;
  }
};

template <class Poly>
Affine<Poly> constant_affine(Poly p) {
  return Affine<Poly>{std::move(p), {}};
}

enum class CertificateKind { sos_gram, reznick, pfr, univariate_sos, rays, fejer_riesz };

inline std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::sos_gram: return "sos-gram";
    case CertificateKind::reznick: return "reznick";
    case CertificateKind::pfr: return "pfr";
    case CertificateKind::univariate_sos: return "univariate-sos";
    case CertificateKind::rays: return "rays";
    case CertificateKind::fejer_riesz: return "fejer-riesz";
  }
  return "unknown";
}

inline CertificateKind certificate_kind_from_string(const std::string& s) {
  for (auto k : {CertificateKind::sos_gram, CertificateKind::reznick, CertificateKind::pfr,
                 CertificateKind::univariate_sos, CertificateKind::rays, CertificateKind::fejer_riesz})
    if (to_string(k) == s) return k;
  throw Error("unknown certificate kind '" + s + "'");
}

struct Certificate {
  CertificateKind kind = CertificateKind::sos_gram;
  int level = 0;                   // multiplier exponent b or b'
  std::vector<Eigen::MatrixXcd> matrices;
  std::vector<int> block_index;    // pfr: radial power s; rays: line number
  std::vector<double> block_scale; // pfr: q_s^(b) is divided by this before reassembly
  std::vector<double> angles;      // rays only
};

struct CertifyOutcome {
  bool certified = false;
  std::optional<Certificate> certificate;
  std::vector<std::pair<int, sdp::SolveStatus>> attempts;  // (level, status)
  std::string message;
};

// ---------------------------------------------------------------------------
// Constraint builders

struct GramBlock {
  int block = -1;
  int half_degree = 0;
  std::vector<double> weights;  // basis scaling, empty for the plain monomial basis
};

namespace certify_detail {

inline double basis_weight(const std::vector<double>* w, int a) { return w ? (*w)[a] : 1.0; }

inline void check_weights(const std::vector<double>* w, int n, const char* what) {
  if (!w) return;
  if (static_cast<int>(w->size()) != n) throw Error(std::string(what) + ": weight count does not match the basis");
  for (double v : *w)
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string(what) + ": basis weights must be positive");
}

}  // namespace certify_detail

/// G = W G~ W for a basis scaled by weights: the matrix in the plain basis.
inline Eigen::MatrixXcd unweight(const Eigen::MatrixXcd& g, const std::vector<double>& weights) {
  if (weights.empty()) return g;
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return w.cast<cplx>().asDiagonal() * g * w.cast<cplx>().asDiagonal();
}

/// Binds f (real bivariate, affine) to m' G m with G a new psd block. With
/// weights the block holds G~ and G = diag(w) G~ diag(w).
inline GramBlock add_bivariate_sos_constraint(sdp::ConicProblem& prob, const Affine<RealBivarPoly>& f,
                                              int half_degree, const std::string& name,
                                              const std::vector<double>* weights = nullptr) {
  using certify_detail::basis_weight;
  const auto basis = monomials_up_to(half_degree);
  const int n = static_cast<int>(basis.size());
  certify_detail::check_weights(weights, n, "add_bivariate_sos_constraint");
  const int blk = prob.add_psd_block(name, n);
  std::map<Exponent, sdp::LinearExpr, GradedLex> eq;
  std::map<Exponent, double, GradedLex> rhs;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      const Exponent e{basis[a].first + basis[b].first, basis[a].second + basis[b].second};
      const double w = basis_weight(weights, a) * basis_weight(weights, b);
      eq[e].add_block(blk, a, b, (a == b ? -1.0 : -2.0) * w);
    }
  for (const auto& [e, v] : f.constant.terms()) {
    eq[e];
    rhs[e] -= v;
  }
  for (const auto& [idx, p] : f.terms)
    for (const auto& [e, v] : p.terms()) eq[e].add_scalar(idx, v);
  for (auto& [e, expr] : eq) prob.add_equality(std::move(expr), rhs[e]);
  return {blk, half_degree, weights ? *weights : std::vector<double>{}};
}

/// Binds f(r) (affine) to v' G v, v = (1, ..., r^half_degree).
inline GramBlock add_univariate_sos_constraint(sdp::ConicProblem& prob, const Affine<UnivariatePoly>& f,
                                               int half_degree, const std::string& name,
                                               const std::vector<double>* weights = nullptr) {
  using certify_detail::basis_weight;
  const int n = half_degree + 1;
  certify_detail::check_weights(weights, n, "add_univariate_sos_constraint");
  const int blk = prob.add_psd_block(name, n);
  int top = 2 * half_degree;
  top = std::max(top, f.constant.degree());
  for (const auto& [i, p] : f.terms) top = std::max(top, p.degree());
  std::vector<sdp::LinearExpr> eq(top + 1);
  std::vector<double> rhs(top + 1, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      eq[a + b].add_block(blk, a, b, (a == b ? -1.0 : -2.0) * basis_weight(weights, a) * basis_weight(weights, b));
  for (int s = 0; s <= f.constant.degree(); ++s) rhs[s] -= f.constant.coeff(s);
  for (const auto& [idx, p] : f.terms)
    for (int s = 0; s <= p.degree(); ++s) eq[s].add_scalar(idx, p.coeff(s));
  for (int s = 0; s <= top; ++s) prob.add_equality(std::move(eq[s]), rhs[s]);
  return {blk, half_degree, weights ? *weights : std::vector<double>{}};
}

struct ToeplitzBlock {
  int block = -1;
  int half_degree = 0;
  bool complex = false;  // block is the 2(t+1) real embedding of a Hermitian Q
  std::vector<double> weights;
};

inline int affine_half_degree(const Affine<TrigPoly>& q, double tol = 0.0) {
  int t = q.constant.effective_half_degree(tol);
  for (const auto& [i, p] : q.terms) t = std::max(t, p.effective_half_degree(tol));
  return t;
}

inline bool affine_is_real(const Affine<TrigPoly>& q) {
  auto real = [](const TrigPoly& p) {
    for (int l = 0; l <= p.half_degree(); ++l)
      if (p.coeff(l).imag() != 0.0) return false;
    return true;
  };
  if (!real(q.constant)) return false;
  for (const auto& [i, p] : q.terms)
    if (!real(p)) return false;
  return true;
}

/// c_l(q) = tr(T_l Q) for l = 0..t with Q psd; real Q when q has real
/// coefficients. Weights, if given, must have t + 1 entries (see
/// affine_half_degree) and scale the basis as in the Gram builders.
inline ToeplitzBlock add_fejer_riesz_constraint(sdp::ConicProblem& prob, const Affine<TrigPoly>& q,
                                                const std::string& name,
                                                const std::vector<double>* weights = nullptr) {
  using certify_detail::basis_weight;
  const int t = affine_half_degree(q);
  const bool cplx_q = !affine_is_real(q);
  const int n = t + 1;
  certify_detail::check_weights(weights, n, "add_fejer_riesz_constraint");
  const int blk = prob.add_psd_block(name, cplx_q ? 2 * n : n);
  for (int l = 0; l <= t; ++l) {
    // real part
    sdp::LinearExpr re;
    for (int j = 0; j + l < n; ++j) {
      const double w = basis_weight(weights, j + l) * basis_weight(weights, j);
      re.add_block(blk, j + l, j, -w);
      if (cplx_q) re.add_block(blk, n + j + l, n + j, -w);
    }
    double rhs = -q.constant.coeff(l).real();
    for (const auto& [idx, p] : q.terms) re.add_scalar(idx, p.coeff(l).real());
    prob.add_equality(std::move(re), rhs);
    if (!cplx_q || l == 0) continue;
    // imaginary part: Q = (Y11 + Y22) + i (Y21 - Y12)
    sdp::LinearExpr im;
    for (int j = 0; j + l < n; ++j) {
      const double w = basis_weight(weights, j + l) * basis_weight(weights, j);
      im.add_block(blk, n + j + l, j, -w);
      im.add_block(blk, j + l, n + j, w);
    }
    double rhs_im = -q.constant.coeff(l).imag();
    for (const auto& [idx, p] : q.terms) im.add_scalar(idx, p.coeff(l).imag());
    prob.add_equality(std::move(im), rhs_im);
  }
  return {blk, t, cplx_q, weights ? *weights : std::vector<double>{}};
}

/// Hermitian Q from the block value of a Toeplitz constraint.
inline Eigen::MatrixXcd toeplitz_matrix_from_block(const Eigen::MatrixXd& y, bool complex) {
  if (!complex) return y.cast<cplx>();
  const int n = static_cast<int>(y.rows()) / 2;
  Eigen::MatrixXcd q(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      q(r, c) = cplx(y(r, c) + y(n + r, n + c), y(n + r, c) - y(r, n + c));
  return q;
}

/// c_l = sum_j Q(j + l, j) for l = -t..t.
inline TrigPoly trig_from_toeplitz(const Eigen::MatrixXcd& q) {
  const int n = static_cast<int>(q.rows());
  TrigPoly out(std::max(0, n - 1));
  for (int l = -(n - 1); l <= n - 1; ++l) {
    cplx c = 0.0;
    for (int j = 0; j < n; ++j)
      if (j + l >= 0 && j + l < n) c += q(j + l, j);
    out.add(l, c);
  }
  return out;
}

/// q(theta) = q^(g theta) when only frequencies divisible by g occur; returns q^.
/// g = 0 keeps the constant term alone.
inline TrigPoly compress_frequencies(const TrigPoly& q, int g) {
  if (g < 0) throw Error("compress_frequencies: negative period");
  if (g == 1) return q;
  const int t = g == 0 ? 0 : q.half_degree() / g;
  TrigPoly out(t);
  for (int l = -t; l <= t; ++l) out.add(l, q.coeff(g == 0 ? 0 : g * l));
  return out;
}

/// Toeplitz certificate of q^ re-indexed as one of q: Q(g a, g b) = Q^(a, b).
inline Eigen::MatrixXcd expand_toeplitz(const Eigen::MatrixXcd& qh, int g) {
  if (g == 1) return qh;
  if (g == 0) return qh.topLeftCorner(1, 1);
  const Eigen::Index n = qh.rows();
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(g * (n - 1) + 1, g * (n - 1) + 1);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) q(g * a, g * b) = qh(a, b);
  return q;
}

/// Hermitian Gram blocks over complex monomials beta^i conj(beta)^j, i + j <= d,
/// grouped by charge i - j modulo the period (exact charge for period 0). A
/// polynomial invariant under beta -> exp(2 pi i / period) beta is a sum of
/// squares iff it has such a block-diagonal Gram matrix.
struct ChargeGram {
  int half_degree = 0;
  int period = 1;
  std::vector<int> blocks;                     // real embeddings of the Hermitian blocks
  std::vector<std::vector<Exponent>> classes;  // (i, j) per block
  std::vector<std::vector<double>> weights;    // per block, empty when unscaled
};

inline int charge_class(const Exponent& e, int period) {
  const int q = e.first - e.second;
  if (period == 0) return q;
  return ((q % period) + period) % period;
}

/// Binds P (affine Hermitian, coefficient (K, L) of conj(beta)^K beta^L) to
/// sum_ab conj(mu_a) H_ab mu_b with H psd and block diagonal by charge class.
/// Weights, if given, hold one vector per class in the order of the classes
/// (ascending class label) and scale the monomials as in the Gram builders.
inline ChargeGram add_charge_sos_constraint(sdp::ConicProblem& prob, const Affine<HermBivarPoly>& p,
                                            int half_degree, int period, const std::string& name,
                                            const std::vector<std::vector<double>>* weights = nullptr) {
  using certify_detail::basis_weight;
  if (period < 0) throw Error("add_charge_sos_constraint: negative period");
  ChargeGram out{half_degree, period, {}, {}, {}};
  std::map<int, std::vector<Exponent>> by_class;
  for (const auto& e : monomials_up_to(half_degree)) by_class[charge_class(e, period)].push_back(e);

  // real and imaginary equation per (K, L) with K <= L
  std::map<Exponent, sdp::LinearExpr, GradedLex> re, im;
  for (const auto& [cls, mons] : by_class) {
    const int n = static_cast<int>(mons.size());
    const std::vector<double>* w = nullptr;
    if (weights) {
      if (out.blocks.size() >= weights->size()) throw Error("add_charge_sos_constraint: too few weight vectors");
      w = &(*weights)[out.blocks.size()];
      certify_detail::check_weights(w, n, "add_charge_sos_constraint");
    }
    const int blk = prob.add_psd_block(name + std::to_string(out.blocks.size()), 2 * n);
    out.blocks.push_back(blk);
    out.classes.push_back(mons);
    out.weights.push_back(w ? *w : std::vector<double>{});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        // conj(mu_a) mu_b = conj(beta)^(i_a + j_b) beta^(j_a + i_b)
        const Exponent e{mons[a].first + mons[b].second, mons[a].second + mons[b].first};
        if (e.first > e.second) continue;
        const double wab = basis_weight(w, a) * basis_weight(w, b);
        // H_ab = (Y11 + Y22)_ab + i (Y21 - Y12)_ab
        re[e].add_block(blk, a, b, -wab).add_block(blk, n + a, n + b, -wab);
        if (e.first < e.second) im[e].add_block(blk, n + a, b, -wab).add_block(blk, a, n + b, wab);
      }
  }
  std::map<Exponent, cplx, GradedLex> rhs;
  auto visit = [&](const HermBivarPoly& h, auto&& fn) {
    for (const auto& [e, v] : h.terms())
      if (e.first <= e.second) fn(e, v);
  };
  visit(p.constant, [&](const Exponent& e, cplx v) {
    re[e];
    if (e.first < e.second) im[e];
    rhs[e] -= v;
  });
  for (const auto& [idx, h] : p.terms)
    visit(h, [&](const Exponent& e, cplx v) {
      re[e].add_scalar(idx, v.real());
      if (e.first < e.second) im[e].add_scalar(idx, v.imag());
    });
  for (auto& [e, expr] : re) prob.add_equality(std::move(expr), rhs[e].real());
  for (auto& [e, expr] : im) prob.add_equality(std::move(expr), rhs[e].imag());
  return out;
}

/// Real Gram matrix over monomials_up_to(d) equivalent to the charge blocks
/// (unscaled H, see unweight): with mu = T m, P = m' Re(T* H T) m.
inline Eigen::MatrixXd charge_gram_to_real(const ChargeGram& cg, const std::vector<Eigen::MatrixXcd>& hs) {
  const int d = cg.half_degree;
  const int n = static_cast<int>(monomials_up_to(d).size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < cg.classes.size(); ++k) {
    const auto& mons = cg.classes[k];
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(mons.size()), n);
    for (std::size_t a = 0; a < mons.size(); ++a) {
      // (x + iy)^i (x - iy)^j
      const int i = mons[a].first, j = mons[a].second;
      for (int p = 0; p <= i; ++p)
        for (int q = 0; q <= j; ++q) {
          const cplx c = binomial(i, p) * binomial(j, q) * ipow(cplx(0.0, 1.0), p) * ipow(cplx(0.0, -1.0), q);
          t(static_cast<Eigen::Index>(a), graded_lex_index({i + j - p - q, p + q})) += c;
        }
    }
    g += (t.adjoint() * hs[k] * t).real();
  }
  return g;
}

// ---------------------------------------------------------------------------
// Pólya–Fejér–Riesz data

/// q_s^(b), each divided by the total Pascal weight sum_{s'} C(b, s - s').
struct PascalSequence {
  std::vector<TrigPoly> q;
  std::vector<double> scale;
};

inline PascalSequence pascal_normalized(const std::vector<TrigPoly>& q0, int b) {
  PascalSequence out;
  out.q = pascal_steps(q0, b);
  const int len0 = static_cast<int>(q0.size());
  out.scale.resize(out.q.size());
  for (int s = 0; s < static_cast<int>(out.q.size()); ++s) {
    double w = 0.0;
    for (int sp = std::max(0, s - b); sp <= std::min(len0 - 1, s); ++sp) w += binomial(b, s - sp);
    out.scale[s] = w;
    out.q[s] *= 1.0 / w;
  }
  return out;
}

/// Affine q-sequence of an affine Hermitian polynomial at Pascal level b.
inline std::vector<Affine<TrigPoly>> affine_pascal(const Affine<HermBivarPoly>& p, int b,
                                                   std::vector<double>* scales = nullptr) {
  int deg = std::max(0, p.constant.degree());
  for (const auto& [i, t] : p.terms) deg = std::max(deg, t.degree());
  auto seq = [&](const HermBivarPoly& h) {
    auto q = polar_decompose(h);
    while (static_cast<int>(q.size()) < deg + 1) q.emplace_back(0);
    return pascal_normalized(q, b);
  };
  const auto c0 = seq(p.constant);
  if (scales) *scales = c0.scale;
  std::vector<Affine<TrigPoly>> out(c0.q.size());
  for (std::size_t s = 0; s < c0.q.size(); ++s) out[s].constant = c0.q[s];
  for (const auto& [i, h] : p.terms) {
    const auto ci = seq(h);
    for (std::size_t s = 0; s < ci.q.size(); ++s) out[s].terms.emplace_back(i, ci.q[s]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Problem-size laws

/// Gram side for Reznick level b on a degree-deg polynomial: C(2 + d, 2), d = floor((deg + 2b)/2).
inline long reznick_gram_size(int deg, int b) {
  const long d = (deg + 2 * b) / 2;
  return (d + 1) * (d + 2) / 2;
}

inline long reznick_variable_count(int deg, int b) {
  const long n = reznick_gram_size(deg, b);
  return n * (n + 1) / 2;
}

/// Half-degrees of q_s^(b') for the box-supported polynomial of an m-qubit observable.
inline std::vector<int> pfr_spin_half_degrees(int m, int b) {
  std::vector<int> t(2 * m + b + 1, 0);
  for (int s = 0; s <= 2 * m + b; ++s)
    for (int sp = std::max(0, s - b); sp <= std::min(2 * m, s); ++sp)
      t[s] = std::max(t[s], std::min(sp, 2 * m - sp));
  return t;
}

/// Real Toeplitz-constraint unknowns: sum_s (t_s + 1)(t_s + 2)/2.
inline long pfr_spin_variable_count(int m, int b) {
  long n = 0;
  for (int t : pfr_spin_half_degrees(m, b)) n += static_cast<long>(t + 1) * (t + 2) / 2;
  return n;
}

/// Closed form of pfr_spin_variable_count for b >= 2m (cubic in m, linear in b).
inline long pfr_spin_variable_count_closed(int m, int b) {
  // s in [m, m + b]: t_s = m; the two ramps s < m and s > m + b contribute sum_{t<m} (t+1)(t+2)/2 each.
  const long mm = m;
  const long ramp = mm * (mm + 1) * (mm + 2) / 6;
  return 2 * ramp + (static_cast<long>(b) + 1) * (mm + 1) * (mm + 2) / 2;
}

// ---------------------------------------------------------------------------
// Verification

struct VerifyReport {
  bool ok = false;
  double residual = 0.0;  // max coefficient mismatch
  double scale = 1.0;
  double min_eigenvalue = 0.0;
  std::string message;
};

namespace certify_detail {

inline double min_eig_all(const std::vector<Eigen::MatrixXcd>& ms, double* max_entry) {
  double lo = 0.0;
  *max_entry = 1.0;
  bool first = true;
  for (const auto& m : ms) {
    const double e = sdp::psd_min_eig(m);
    lo = first ? e : std::min(lo, e);
    first = false;
    *max_entry = std::max(*max_entry, m.cwiseAbs().maxCoeff());
  }
  return lo;
}

inline RealBivarPoly gram_reassemble(const Eigen::MatrixXcd& g) {
  const int n = static_cast<int>(g.rows());
  int d = 0;
  while ((d + 1) * (d + 2) / 2 < n) ++d;
  if ((d + 1) * (d + 2) / 2 != n) throw Error("certificate: Gram size is not a monomial count");
  const auto basis = monomials_up_to(d);
  RealBivarPoly out;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      out.add(basis[a].first + basis[b].first, basis[a].second + basis[b].second, g(a, b).real());
  return out;
}

inline UnivariatePoly univariate_reassemble(const Eigen::MatrixXcd& g) {
  const int n = static_cast<int>(g.rows());
  std::vector<double> c(std::max(1, 2 * n - 1), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) c[a + b] += g(a, b).real();
  return UnivariatePoly(std::move(c));
}

inline double real_mismatch(const RealBivarPoly& a, const RealBivarPoly& b) {
  double r = 0.0;
  for (const auto& [e, v] : a.terms()) r = std::max(r, std::abs(v - b.coeff(e.first, e.second)));
  for (const auto& [e, v] : b.terms()) r = std::max(r, std::abs(v - a.coeff(e.first, e.second)));
  return r;
}

inline double univariate_mismatch(const UnivariatePoly& a, const UnivariatePoly& b) {
  double r = 0.0;
  for (int s = 0; s <= std::max(a.degree(), b.degree()); ++s) r = std::max(r, std::abs(a.coeff(s) - b.coeff(s)));
  return r;
}

inline double univariate_scale(const UnivariatePoly& f) {
  double m = 1.0;
  for (double c : f.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

inline double trig_mismatch(const TrigPoly& a, const TrigPoly& b) {
  double r = 0.0;
  const int t = std::max(a.half_degree(), b.half_degree());
  for (int l = -t; l <= t; ++l) r = std::max(r, std::abs(a.coeff(l) - b.coeff(l)));
  return r;
}

inline double trig_scale(const TrigPoly& q) {
  double m = 1.0;
  for (int l = -q.half_degree(); l <= q.half_degree(); ++l) m = std::max(m, std::abs(q.coeff(l)));
  return m;
}

inline VerifyReport finish(VerifyReport r, const std::vector<Eigen::MatrixXcd>& ms, double res_tol,
                           double psd_tol) {
  double max_entry = 1.0;
  r.min_eigenvalue = min_eig_all(ms, &max_entry);
  const bool res_ok = r.residual <= res_tol * r.scale;
  const bool psd_ok = r.min_eigenvalue >= -psd_tol * max_entry;
  r.ok = res_ok && psd_ok;
  if (!res_ok)
    r.message = "reassembly residual " + std::to_string(r.residual) + " exceeds tolerance";
  else if (!psd_ok)
    r.message = "block min eigenvalue " + std::to_string(r.min_eigenvalue) + " below tolerance";
  else
    r.message = "certificate verified";
  return r;
}

}  // namespace certify_detail

inline VerifyReport verify_certificate(const Certificate& c, const UnivariatePoly& f, double res_tol = 1e-6,
                                       double psd_tol = 1e-8) {
  using namespace certify_detail;
  if (c.kind != CertificateKind::univariate_sos) throw Error("verify_certificate: kind needs a univariate target");
  if (c.matrices.size() != 1) throw Error("verify_certificate: univariate certificate needs one block");
  VerifyReport r;
  r.scale = univariate_scale(f);
  r.residual = univariate_mismatch(univariate_reassemble(c.matrices[0]), f);
  return finish(r, c.matrices, res_tol, psd_tol);
}

inline VerifyReport verify_certificate(const Certificate& c, const TrigPoly& q, double res_tol = 1e-6,
                                       double psd_tol = 1e-8) {
  using namespace certify_detail;
  if (c.kind != CertificateKind::fejer_riesz) throw Error("verify_certificate: kind needs a trigonometric target");
  if (c.matrices.size() != 1) throw Error("verify_certificate: Fejer-Riesz certificate needs one block");
  VerifyReport r;
  r.scale = trig_scale(q);
  r.residual = trig_mismatch(trig_from_toeplitz(c.matrices[0]), q);
  return finish(r, c.matrices, res_tol, psd_tol);
}

inline VerifyReport verify_certificate(const Certificate& c, const HermBivarPoly& p, double res_tol = 1e-6,
                                       double psd_tol = 1e-8);

inline VerifyReport verify_certificate(const Certificate& c, const RealBivarPoly& f, double res_tol = 1e-6,
                                       double psd_tol = 1e-8) {
  using namespace certify_detail;
  switch (c.kind) {
    case CertificateKind::sos_gram:
    case CertificateKind::reznick: {
      if (c.matrices.size() != 1) throw Error("verify_certificate: Gram certificate needs one block");
      const RealBivarPoly target = reznick_multiply(f, c.level);
      const RealBivarPoly recon = gram_reassemble(c.matrices[0]);
      VerifyReport r;
      r.scale = std::max(1.0, target.max_abs());
      r.residual = real_mismatch(recon, target);
      return finish(r, c.matrices, res_tol, psd_tol);
    }
    case CertificateKind::pfr:
    case CertificateKind::rays:
      return verify_certificate(c, hermitian_from_real(f), res_tol, psd_tol);
    default:
      throw Error("verify_certificate: kind " + to_string(c.kind) + " does not certify a bivariate polynomial");
  }
}

inline VerifyReport verify_certificate(const Certificate& c, const HermBivarPoly& p, double res_tol,
                                       double psd_tol) {
  using namespace certify_detail;
  switch (c.kind) {
    case CertificateKind::sos_gram:
    case CertificateKind::reznick:
      return verify_certificate(c, ladder_to_real(p), res_tol, psd_tol);
    case CertificateKind::pfr: {
      if (c.block_index.size() != c.matrices.size() || c.block_scale.size() != c.matrices.size())
        throw Error("verify_certificate: pfr certificate is missing block bookkeeping");
      auto q = polar_decompose(p);
      q = pascal_steps(q, c.level);
      VerifyReport r;
      std::vector<bool> covered(q.size(), false);
      for (std::size_t k = 0; k < c.matrices.size(); ++k) {
        const int s = c.block_index[k];
        if (s < 0 || s >= static_cast<int>(q.size())) {
          r.residual = std::numeric_limits<double>::infinity();
          r.message = "certificate block refers to a missing radial power";
          r.ok = false;
          return r;
        }
        covered[s] = true;
        TrigPoly target = q[s];
        target *= 1.0 / c.block_scale[k];
        r.scale = std::max(r.scale, trig_scale(target));
        r.residual = std::max(r.residual, trig_mismatch(trig_from_toeplitz(c.matrices[k]), target));
      }
      for (std::size_t s = 0; s < q.size(); ++s)
        if (!covered[s]) r.residual = std::max(r.residual, trig_mismatch(q[s], TrigPoly(0)));
      return finish(r, c.matrices, res_tol, psd_tol);
    }
    case CertificateKind::rays: {
      if (c.angles.size() != c.matrices.size()) throw Error("verify_certificate: rays certificate needs one block per line");
      VerifyReport r;
      for (std::size_t k = 0; k < c.matrices.size(); ++k) {
        const UnivariatePoly f = restrict_to_line(p, c.angles[k]);
        r.scale = std::max(r.scale, univariate_scale(f));
        r.residual = std::max(r.residual, univariate_mismatch(univariate_reassemble(c.matrices[k]), f));
      }
      return finish(r, c.matrices, res_tol, psd_tol);
    }
    default:
      throw Error("verify_certificate: kind " + to_string(c.kind) + " does not certify a bivariate polynomial");
  }
}

// ---------------------------------------------------------------------------
// Certification drivers

// Every certification SDP carries a slack s: it minimises s subject to
// "f + s * positive reference" admitting the certificate. The problem then has
// strictly feasible points even when f sits on the boundary of the cone, and
// s > 0 at the optimum is a quantitative refutation.

namespace certify_detail {

inline int add_slack(sdp::ConicProblem& prob) {
  const int s = prob.add_free_scalar("slack");
  sdp::LinearExpr obj;
  obj.add_scalar(s, 1.0);
  prob.set_objective(obj);
  return s;
}

/// Keeps the first candidate that verifies; falls back to the last report.
template <class Target>
bool pick_verified(Certificate& c, const std::vector<std::vector<Eigen::MatrixXcd>>& candidates, const Target& f,
                   std::string& message) {
  for (const auto& mats : candidates) {
    c.matrices = mats;
    const auto rep = verify_certificate(c, f);
    message = rep.message;
    if (rep.ok) return true;
  }
  return false;
}

inline double slack_value(const sdp::SolveResult& r, int idx) {
  return r.scalar_values.size() > idx ? r.scalar_values(idx) : std::numeric_limits<double>::quiet_NaN();
}

constexpr double kSolveAccuracy = 1e-7;

}  // namespace certify_detail

/// Gram matrix of (1 + x^2 + y^2)^d in the monomial basis up to degree d (diagonal).
inline Eigen::VectorXd reznick_multiplier_gram_diagonal(int d) {
  const auto basis = monomials_up_to(d);
  Eigen::VectorXd out(basis.size());
  for (std::size_t a = 0; a < basis.size(); ++a) {
    const int i = basis[a].first, j = basis[a].second;
    out(a) = factorial(d) / (factorial(i) * factorial(j) * factorial(d - i - j));
  }
  return out;
}

namespace certify_detail {

inline CertifyOutcome gram_level(const RealBivarPoly& f, int b, const sdp::SolveOptions& opts) {
  CertifyOutcome out;
  const int d = std::max(0, f.degree()) / 2 + b;
  sdp::ConicProblem prob;
  const int s = add_slack(prob);
  Affine<RealBivarPoly> a{reznick_multiply(f, b), {}};
  a.terms.emplace_back(s, reznick_multiply(RealBivarPoly{{{0, 0}, 1.0}}, d));
  const auto g = add_bivariate_sos_constraint(prob, a, d, "G");
  const auto res = sdp::solve(prob, opts);
  out.attempts.emplace_back(b, res.status);
  if (!sdp::near_optimal(res, kSolveAccuracy)) {
    out.message = "Gram SDP status " + sdp::to_string(res.status) + " (" + res.message + ")";
    return out;
  }
  const double slack = slack_value(res, s);
  Certificate c;
  c.kind = b == 0 ? CertificateKind::sos_gram : CertificateKind::reznick;
  c.level = b;
  const Eigen::MatrixXcd raw = res.block_values[g.block].cast<cplx>();
  Eigen::MatrixXcd corrected = raw;
  corrected.diagonal() -= (slack * reznick_multiplier_gram_diagonal(d)).cast<cplx>();
  std::string msg;
  if (pick_verified(c, {{corrected}, {raw}}, f, msg)) {
    out.certified = true;
    out.certificate = std::move(c);
  }
  out.message = msg + " (slack " + std::to_string(slack) + ")";
  return out;
}

}  // namespace certify_detail

/// Gram-matrix SOS test for a real bivariate polynomial.
inline CertifyOutcome certify_sos(const RealBivarPoly& f, const sdp::SolveOptions& opts = {}) {
  if (std::max(0, f.degree()) % 2 == 1) {
    CertifyOutcome out;
    out.message = "odd degree polynomials are never sums of squares";
    return out;
  }
  return certify_detail::gram_level(f, 0, opts);
}

/// Smallest b <= b_max with (1 + x^2 + y^2)^b f a sum of squares.
inline CertifyOutcome certify_reznick(const RealBivarPoly& f, int b_max, const sdp::SolveOptions& opts = {}) {
  CertifyOutcome out;
  if (b_max < 0) throw Error("certify_reznick: negative b_max");
  if (std::max(0, f.degree()) % 2 == 1) {
    out.message = "odd degree polynomials are never nonnegative";
    return out;
  }
  for (int b = 0; b <= b_max; ++b) {
    auto lvl = certify_detail::gram_level(f, b, opts);
    out.attempts.insert(out.attempts.end(), lvl.attempts.begin(), lvl.attempts.end());
    out.message = lvl.message;
    if (lvl.certified) {
      out.certified = true;
      out.certificate = std::move(lvl.certificate);
      out.certificate->kind = CertificateKind::reznick;
      out.message = "certified at b = " + std::to_string(b);
      return out;
    }
  }
  out.message = "not certified up to b = " + std::to_string(b_max) + "; last level: " + out.message;
  return out;
}

/// Fejér–Riesz check of a single trigonometric polynomial.
inline CertifyOutcome certify_trig(const TrigPoly& q, const sdp::SolveOptions& opts = {}) {
  using namespace certify_detail;
  CertifyOutcome out;
  if (!q.is_real_valued(1e-12)) throw Error("certify_trig: coefficients are not Hermitian");
  sdp::ConicProblem prob;
  const int s = add_slack(prob);
  Affine<TrigPoly> a{q, {}};
  TrigPoly one(0);
  one.set(0, 1.0);
  a.terms.emplace_back(s, one);
  const auto tb = add_fejer_riesz_constraint(prob, a, "Q");
  const auto res = sdp::solve(prob, opts);
  out.attempts.emplace_back(0, res.status);
  if (!sdp::near_optimal(res, kSolveAccuracy)) {
    out.message = "Toeplitz SDP status " + sdp::to_string(res.status) + " (" + res.message + ")";
    return out;
  }
  const double slack = slack_value(res, s);
  Certificate c;
  c.kind = CertificateKind::fejer_riesz;
  const Eigen::MatrixXcd raw = toeplitz_matrix_from_block(res.block_values[tb.block], tb.complex);
  Eigen::MatrixXcd corrected = raw;
  corrected.diagonal().array() -= slack / static_cast<double>(raw.rows());
  std::string msg;
  if (pick_verified(c, {{corrected}, {raw}}, q, msg)) {
    out.certified = true;
    out.certificate = std::move(c);
  }
  out.message = msg + " (slack " + std::to_string(slack) + ")";
  return out;
}

/// Smallest b' <= b_max for which every Pascal-smoothed q_s is a Hermitian square.
inline CertifyOutcome certify_pfr(const HermBivarPoly& p, int b_max, const sdp::SolveOptions& opts = {}) {
  using namespace certify_detail;
  CertifyOutcome out;
  if (b_max < 0) throw Error("certify_pfr: negative b_max");
  TrigPoly one(0);
  one.set(0, 1.0);
  for (int b = 0; b <= b_max; ++b) {
    std::vector<double> scales;
    auto qs = affine_pascal(constant_affine(p), b, &scales);
    sdp::ConicProblem prob;
    const int s = add_slack(prob);
    std::vector<ToeplitzBlock> blocks;
    for (std::size_t k = 0; k < qs.size(); ++k) {
      qs[k].terms.emplace_back(s, one);
      blocks.push_back(add_fejer_riesz_constraint(prob, qs[k], "Q" + std::to_string(k)));
    }
    const auto res = sdp::solve(prob, opts);
    out.attempts.emplace_back(b, res.status);
    if (!sdp::near_optimal(res, kSolveAccuracy)) {
      out.message = "Toeplitz SDP status " + sdp::to_string(res.status) + " (" + res.message + ")";
      continue;
    }
    const double slack = slack_value(res, s);
    Certificate c;
    c.kind = CertificateKind::pfr;
    c.level = b;
    std::vector<Eigen::MatrixXcd> raw, corrected;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      raw.push_back(toeplitz_matrix_from_block(res.block_values[blocks[k].block], blocks[k].complex));
      corrected.push_back(raw.back());
      corrected.back().diagonal().array() -= slack / static_cast<double>(raw.back().rows());
      c.block_index.push_back(static_cast<int>(k));
      c.block_scale.push_back(scales[k]);
    }
    std::string msg;
    if (pick_verified(c, {corrected, raw}, p, msg)) {
      out.certified = true;
      out.certificate = std::move(c);
      out.message = "certified at b' = " + std::to_string(b);
      return out;
    }
    out.message = msg + " (slack " + std::to_string(slack) + ")";
  }
  out.message = "not certified up to b' = " + std::to_string(b_max) + "; last level: " + out.message;
  return out;
}

/// Univariate nonnegativity on the real line (exact: nonnegative <=> SOS).
inline CertifyOutcome certify_univariate(const UnivariatePoly& f, const sdp::SolveOptions& opts = {}) {
  using namespace certify_detail;
  CertifyOutcome out;
  if (f.is_zero()) {
    Certificate c;
    c.kind = CertificateKind::univariate_sos;
    c.matrices.push_back(Eigen::MatrixXcd::Zero(1, 1));
    out.certified = true;
    out.certificate = std::move(c);
    out.message = "zero polynomial";
    return out;
  }
  if (f.degree() % 2 == 1) {
    out.message = "odd degree polynomial changes sign";
    return out;
  }
  const int d = f.degree() / 2;
  sdp::ConicProblem prob;
  const int s = add_slack(prob);
  std::vector<double> mult(2 * d + 1, 0.0);
  for (int j = 0; j <= d; ++j) mult[2 * j] = binomial(d, j);
  Affine<UnivariatePoly> a{f, {}};
  a.terms.emplace_back(s, UnivariatePoly(mult));
  const auto g = add_univariate_sos_constraint(prob, a, d, "G");
  const auto res = sdp::solve(prob, opts);
  out.attempts.emplace_back(0, res.status);
  if (!sdp::near_optimal(res, kSolveAccuracy)) {
    out.message = "Gram SDP status " + sdp::to_string(res.status) + " (" + res.message + ")";
    return out;
  }
  const double slack = slack_value(res, s);
  Certificate c;
  c.kind = CertificateKind::univariate_sos;
  const Eigen::MatrixXcd raw = res.block_values[g.block].cast<cplx>();
  Eigen::MatrixXcd corrected = raw;
  for (int j = 0; j <= d; ++j) corrected(j, j) -= slack * binomial(d, j);
  std::string msg;
  if (pick_verified(c, {{corrected}, {raw}}, f, msg)) {
    out.certified = true;
    out.certificate = std::move(c);
  }
  out.message = msg + " (slack " + std::to_string(slack) + ")";
  return out;
}

/// Uniform angles k pi / n, k = 0..n-1.
inline std::vector<double> uniform_angles(int n) {
  if (n <= 0) throw Error("uniform_angles: need at least one line");
  std::vector<double> a(n);
  for (int k = 0; k < n; ++k) a[k] = std::numbers::pi * k / n;
  return a;
}

struct LineVerdict {
  double angle = 0.0;
  bool nonnegative = false;
  CertifyOutcome outcome;
};

/// Necessary condition: p restricted to each line through the origin is nonnegative.
inline std::vector<LineVerdict> check_lines(const HermBivarPoly& p, const std::vector<double>& angles,
                                            const sdp::SolveOptions& opts = {}) {
  if (angles.empty()) throw Error("check_lines: empty angle set");
  std::vector<LineVerdict> out;
  out.reserve(angles.size());
  for (double th : angles) {
    if (th < 0.0 || th >= std::numbers::pi) throw Error("check_lines: angles must lie in [0, pi)");
    LineVerdict v;
    v.angle = th;
    v.outcome = certify_univariate(restrict_to_line(p, th), opts);
    v.nonnegative = v.outcome.certified;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace nonclass

#endif  // NONCLASS_CERTIFY_HPP
