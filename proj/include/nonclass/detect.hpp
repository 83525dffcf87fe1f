#ifndef NONCLASS_DETECT_HPP
#define NONCLASS_DETECT_HPP

// Witness searches. Each driver minimises <W> over witnesses whose polynomial
// carries a nonnegativity certificate of the requested kind:
//
//   light  W = sum w_kl a^dag^k a^l, k + l <= D, p_W(conj a, a) >= 0
//   spin   V on the symmetric subspace, stereographic polynomial >= 0, tr V = m
//
// A negative optimum proves nonclassicality. Light problems need an explicit
// normalisation (the cone is scale invariant): the sum of certificate-block
// traces, or <W> = 1 on a classical reference state.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "nonclass/certify.hpp"
#include "nonclass/polyalg.hpp"
#include "nonclass/quantum.hpp"
#include "nonclass/sdp/solve.hpp"
#include "nonclass/spinmap.hpp"

namespace nonclass {

enum class Hierarchy { reznick, pfr, rays };

inline std::string to_string(Hierarchy h) {
  switch (h) {
    case Hierarchy::reznick: return "reznick";
    case Hierarchy::pfr: return "pfr";
    case Hierarchy::rays: return "rays";
  }
  return "unknown";
}

struct Method {
  Hierarchy kind = Hierarchy::reznick;
  int level = 0;
  std::vector<double> angles;  // rays only

  static Method reznick(int b) { return {Hierarchy::reznick, b, {}}; }
  static Method pfr(int b) { return {Hierarchy::pfr, b, {}}; }
  static Method rays(std::vector<double> angles) {
    if (angles.empty()) throw Error("Method::rays: empty angle set");
    return {Hierarchy::rays, 0, std::move(angles)};
  }
};

enum class NormalizationKind { gram_trace, reference };

struct Normalization {
  NormalizationKind kind = NormalizationKind::gram_trace;
  MomentTable reference;  // moments of the reference state, reference kind only

  static Normalization gram_trace() { return {}; }
  static Normalization reference_state(const FockState& rho0, int degree) {
    return {NormalizationKind::reference, moments_from_fock(rho0, degree)};
  }
  static Normalization reference_moments(MomentTable t) { return {NormalizationKind::reference, std::move(t)}; }

  std::string label() const { return kind == NormalizationKind::gram_trace ? "gram-trace" : "reference"; }
};

struct DetectionResult {
  double value = std::numeric_limits<double>::quiet_NaN();  // <witness> on the input data
  double solver_value = std::numeric_limits<double>::quiet_NaN();
  HermBivarPoly witness;
  std::optional<CMatrix> spin_witness;  // Dicke-basis V for spin problems
  std::optional<Certificate> certificate;
  sdp::SolveStatus status = sdp::SolveStatus::numerical_failure;
  std::string method;
  int level = 0;
  std::string normalization;
  std::string message;
  int iterations = 0;

  bool optimal() const { return status == sdp::SolveStatus::optimal; }
  bool detected(double tol = 1e-7) const { return optimal() && value < -tol; }
};

// ---------------------------------------------------------------------------
// Witness spaces

/// Real parametrisation of Hermitian coefficient tables: one scalar per diagonal
/// entry, two (real, imaginary) per off-diagonal pair.
struct WitnessSpace {
  std::vector<HermBivarPoly> basis;
  std::vector<Exponent> exponent;  // (k, l) with k <= l that the element populates
  std::vector<bool> imaginary;
};

namespace detect_detail {

inline void push_pair(WitnessSpace& ws, int k, int l, int bound, SupportMode mode, double weight, bool real_only) {
  HermBivarPoly re(bound, mode);
  re.set(k, l, weight);
  ws.basis.push_back(re);
  ws.exponent.push_back({k, l});
  ws.imaginary.push_back(false);
  if (k == l || real_only) return;
  HermBivarPoly im(bound, mode);
  im.set(k, l, cplx(0.0, weight));
  ws.basis.push_back(im);
  ws.exponent.push_back({k, l});
  ws.imaginary.push_back(true);
}

}  // namespace detect_detail

/// Light witnesses with k + l <= D (k == l only when diagonal_only).
inline WitnessSpace light_witness_space(int D, bool real_only, bool diagonal_only = false) {
  if (D < 0) throw Error("light_witness_space: negative degree");
  WitnessSpace ws;
  for (int s = 0; s <= D; ++s)
    for (int k = 0; 2 * k <= s; ++k) {
      const int l = s - k;
      if (diagonal_only && k != l) continue;
      detect_detail::push_pair(ws, k, l, D, SupportMode::total, 1.0, real_only);
    }
  return ws;
}

/// Unit monomials conj(b)^k b^l + conj(b)^l b^k (and the imaginary pair), the
/// stereographic images of Dicke matrix units scaled by 1 / sqrt(C(m,k) C(m,l)).
/// Unit coefficients keep the certificate equations well scaled.
/// With period g only l - k divisible by g is kept (l == k for g = 0).
inline WitnessSpace spin_witness_space(int m, bool real_only, int period = 1) {
  if (period < 0) throw Error("spin_witness_space: negative period");
  WitnessSpace ws;
  for (int k = 0; k <= m; ++k)
    for (int l = k; l <= m; ++l)
      if (period == 0 ? l == k : (l - k) % period == 0)
        detect_detail::push_pair(ws, k, l, m, SupportMode::box, 1.0, real_only);
  return ws;
}

/// Dicke matrix of a spin witness-space element.
inline CMatrix spin_basis_matrix(const WitnessSpace& ws, std::size_t i, int m) {
  CMatrix v = CMatrix::Zero(m + 1, m + 1);
  const int k = ws.exponent[i].first, l = ws.exponent[i].second;
  const cplx c = (ws.imaginary[i] ? cplx(0.0, 1.0) : cplx(1.0, 0.0)) / std::sqrt(binomial(m, k) * binomial(m, l));
  v(k, l) += c;
  if (k != l) v(l, k) += std::conj(c);
  return v;
}

/// Largest g with rho_kl = 0 whenever g does not divide l - k (0 when rho is
/// diagonal). Such a state is invariant under exp(2 pi i J_z / g), and so is the
/// optimal witness of every hierarchy after averaging over that group.
inline int phase_period(const CMatrix& rho, double tol = 1e-13) {
  const double cut = tol * std::max(1.0, rho.cwiseAbs().maxCoeff());
  int g = 0;
  for (Eigen::Index k = 0; k < rho.rows(); ++k)
    for (Eigen::Index l = k + 1; l < rho.cols(); ++l)
      if (std::abs(rho(k, l)) > cut) g = std::gcd(g, static_cast<int>(l - k));
  return g;
}

inline bool moments_are_real(const MomentTable& t) {
  for (const auto& [e, v] : t.entries())
    if (v.imag() != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Generic witness SDP

struct LinearRow {
  std::vector<double> coeffs;  // over the witness space
  double rhs = 0.0;
};

struct WitnessProblem {
  const WitnessSpace* space = nullptr;
  std::vector<double> objective;  // <P_i> on the data
  Method method;
  bool gram_trace = false;        // sum of certificate-block traces = 1
  std::vector<LinearRow> rows;    // further normalisations
  bool weighted = false;          // scale Reznick and ray bases to the coefficient profile
  int period = 1;                 // phase symmetry of the witness space, see phase_period
};

namespace detect_detail {

// Positive basis weights with w_a^2 following rho[a]; gaps in the profile are
// bridged by the geometric mean of the nearest positive neighbours.
inline std::vector<double> profile_weights(const std::vector<double>& rho) {
  const int n = static_cast<int>(rho.size());
  std::vector<double> w(n, 1.0);
  double top = 0.0;
  for (double r : rho) top = std::max(top, r);
  if (top <= 0.0) return w;
  for (int a = 0; a < n; ++a) {
    if (rho[a] > 0.0) {
      w[a] = std::sqrt(rho[a]);
      continue;
    }
    int lo = a - 1, hi = a + 1;
    while (lo >= 0 && rho[lo] <= 0.0) --lo;
    while (hi < n && rho[hi] <= 0.0) ++hi;
    const double l = lo >= 0 ? rho[lo] : rho[hi < n ? hi : a];
    const double h = hi < n ? rho[hi] : l;
    w[a] = std::pow(l * h, 0.25);
  }
  return w;
}

inline std::vector<double> univariate_profile(const Affine<UnivariatePoly>& f, int half_degree) {
  std::vector<double> rho(half_degree + 1, 0.0);
  for (const auto& [i, p] : f.terms)
    for (int a = 0; a <= half_degree; ++a) rho[a] += std::abs(p.coeff(2 * a));
  return profile_weights(rho);
}

// sqrt of the multinomial coefficients of (1 + x^2 + y^2)^d over the Gram basis.
inline std::vector<double> multinomial_weights(int d) {
  std::vector<double> w;
  for (const auto& e : monomials_up_to(d))
    w.push_back(std::sqrt(factorial(d) / (factorial(e.first) * factorial(e.second) * factorial(d - e.first - e.second))));
  return w;
}

struct Assembled {
  sdp::ConicProblem prob;
  std::vector<int> u;             // scalar index of each witness parameter
  std::vector<double> column;     // witness parameter i is column[i] * scalar u[i]
  std::vector<int> blocks;        // certificate blocks
  std::vector<bool> complex;      // Toeplitz or charge blocks in real embedding
  std::vector<double> scales;     // pfr
  std::vector<int> index;         // pfr radial power
  std::vector<std::vector<double>> weights;
  std::optional<ChargeGram> charge;  // reznick with a phase symmetry
};

// Diagonal rescaling taken from an earlier iterate: witness parameters by their
// magnitude, certificate bases by the square roots of their Gram diagonals.
struct Rescale {
  std::vector<double> column;
  std::vector<std::vector<double>> weights;  // per certificate block, assembly order
};

inline Assembled assemble(const WitnessProblem& wp, const Rescale* rs = nullptr) {
  Assembled a;
  const auto& ws = *wp.space;
  const std::size_t nu = ws.basis.size();
  a.column.assign(nu, 1.0);
  if (rs) a.column = rs->column;
  for (std::size_t i = 0; i < nu; ++i) a.u.push_back(a.prob.add_free_scalar("u" + std::to_string(i)));
  const HermBivarPoly& proto = ws.basis.front();
  Affine<HermBivarPoly> p{HermBivarPoly(proto.degree_bound(), proto.mode()), {}};
  for (std::size_t i = 0; i < nu; ++i) {
    HermBivarPoly h = ws.basis[i];
    h *= a.column[i];
    p.terms.emplace_back(a.u[i], std::move(h));
  }
  int deg = 0;
  for (const auto& b : ws.basis) deg = std::max(deg, b.degree());
  // weights for the next certificate block: rescaled, heuristic, or none
  auto pick = [&](const std::vector<double>& heuristic) -> const std::vector<double>* {
    if (rs) return &rs->weights.at(a.blocks.size());
    return wp.weighted && !heuristic.empty() ? &heuristic : nullptr;
  };
  auto record = [&](int blk, const std::vector<double>& w, bool cplx_blk) {
    a.blocks.push_back(blk);
    a.weights.push_back(w);
    a.complex.push_back(cplx_blk);
  };

  switch (wp.method.kind) {
    case Hierarchy::reznick: {
      const int b = wp.method.level;
      const int d = (deg + 2 * b) / 2;
      if (wp.period != 1) {
        const auto ph = p.map([b](const HermBivarPoly& h) { return reznick_multiply(h, b); });
        a.charge = add_charge_sos_constraint(a.prob, ph, d, wp.period, "H", rs ? &rs->weights : nullptr);
        for (std::size_t k = 0; k < a.charge->blocks.size(); ++k) record(a.charge->blocks[k], a.charge->weights[k], true);
        break;
      }
      const auto f = p.map([b](const HermBivarPoly& h) { return ladder_to_real(reznick_multiply(h, b)); });
      const auto g = add_bivariate_sos_constraint(a.prob, f, d, "G", pick(multinomial_weights(d)));
      record(g.block, g.weights, false);
      break;
    }
    case Hierarchy::pfr: {
      const auto qs = affine_pascal(p, wp.method.level, &a.scales);
      const int g = wp.period;
      for (std::size_t s = 0; s < qs.size(); ++s) {
        const auto q = qs[s].map([g](const TrigPoly& t) { return compress_frequencies(t, g); });
        const auto tb = add_fejer_riesz_constraint(a.prob, q, "Q" + std::to_string(s), pick({}));
        record(tb.block, tb.weights, tb.complex);
        a.index.push_back(static_cast<int>(s));
      }
      break;
    }
    case Hierarchy::rays: {
      for (std::size_t k = 0; k < wp.method.angles.size(); ++k) {
        const double th = wp.method.angles[k];
        if (th < 0.0 || th >= std::numbers::pi) throw Error("rays: angles must lie in [0, pi)");
        const auto f = p.map([th](const HermBivarPoly& h) { return restrict_to_line(h, th); });
        const auto g = add_univariate_sos_constraint(a.prob, f, deg / 2, "L" + std::to_string(k),
                                                     pick(univariate_profile(f, deg / 2)));
        record(g.block, g.weights, false);
      }
      break;
    }
  }

  if (wp.gram_trace) {
    sdp::LinearExpr tr;
    for (std::size_t k = 0; k < a.blocks.size(); ++k) {
      const int size = a.prob.blocks()[a.blocks[k]].size;
      const auto& w = a.weights[k];
      for (int r = 0; r < size; ++r) {
        const double wr = w.empty() ? 1.0 : w[r % w.size()];
        tr.add_block(a.blocks[k], r, r, wr * wr);
      }
    }
    a.prob.add_equality(tr, 1.0);
  }
  for (const auto& row : wp.rows) {
    sdp::LinearExpr e;
    for (std::size_t i = 0; i < row.coeffs.size(); ++i) e.add_scalar(a.u[i], row.coeffs[i] * a.column[i]);
    a.prob.add_equality(e, row.rhs);
  }
  sdp::LinearExpr obj;
  for (std::size_t i = 0; i < wp.objective.size(); ++i) obj.add_scalar(a.u[i], wp.objective[i] * a.column[i]);
  a.prob.set_objective(obj);
  return a;
}

// Unscaled Hermitian matrix of certificate block k.
inline CMatrix block_matrix(const Assembled& a, const sdp::SolveResult& res, std::size_t k) {
  return unweight(toeplitz_matrix_from_block(res.block_values[a.blocks[k]], a.complex[k]), a.weights[k]);
}

inline std::optional<Rescale> rescale_from(const Assembled& a, const sdp::SolveResult& res) {
  if (res.block_values.size() != a.prob.blocks().size() || res.scalar_values.size() == 0) return std::nullopt;
  Rescale rs;
  double top_u = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) top_u = std::max(top_u, std::abs(a.column[i] * res.scalar_values(a.u[i])));
  if (!std::isfinite(top_u) || top_u == 0.0) return std::nullopt;
  for (std::size_t i = 0; i < a.u.size(); ++i)
    rs.column.push_back(std::max(std::abs(a.column[i] * res.scalar_values(a.u[i])), 1e-6 * top_u));
  std::vector<Eigen::VectorXd> diags;
  double top_g = 0.0;
  for (std::size_t k = 0; k < a.blocks.size(); ++k) {
    diags.push_back(block_matrix(a, res, k).diagonal().real().cwiseMax(0.0));
    top_g = std::max(top_g, diags.back().maxCoeff());
  }
  if (!std::isfinite(top_g) || top_g == 0.0) return std::nullopt;
  for (const auto& dg : diags) {
    std::vector<double> w(static_cast<std::size_t>(dg.size()));
    for (Eigen::Index r = 0; r < dg.size(); ++r) w[r] = std::sqrt(std::max(dg(r), 1e-9 * top_g));
    rs.weights.push_back(std::move(w));
  }
  return rs;
}

constexpr double kAcceptTol = 1e-7;
constexpr int kRescalePasses = 3;

inline bool accepted(const sdp::SolveResult& res) {
  return res.status == sdp::SolveStatus::optimal || sdp::near_optimal(res, kAcceptTol);
}

// Solves the witness problem; a stalled solve is retried with the diagonal
// scaling of its best iterate, which equilibrates witnesses whose entries span
// many orders of magnitude.
inline DetectionResult solve_witness(const WitnessProblem& wp, const sdp::SolveOptions& opts) {
  auto a = assemble(wp);
  auto res = sdp::solve(a.prob, opts);
  int iterations = res.iterations;
  for (int pass = 0; pass < kRescalePasses && !accepted(res) && res.status == sdp::SolveStatus::numerical_failure;
       ++pass) {
    const auto rs = rescale_from(a, res);
    if (!rs) break;
    auto a2 = assemble(wp, &*rs);
    auto res2 = sdp::solve(a2.prob, opts);
    iterations += res2.iterations;
    a = std::move(a2);
    res = std::move(res2);
  }

  DetectionResult out;
  out.method = to_string(wp.method.kind);
  out.level = wp.method.level;
  out.iterations = iterations;
  out.solver_value = res.objective_value;
  out.message = res.message;
  if (accepted(res)) {
    out.status = sdp::SolveStatus::optimal;
    if (res.status != sdp::SolveStatus::optimal) out.message = "reduced accuracy: " + res.message;
  } else {
    out.status = res.status;
    return out;
  }
  const auto& ws = *wp.space;
  HermBivarPoly w(ws.basis.front().degree_bound(), ws.basis.front().mode());
  double value = 0.0;
  for (std::size_t i = 0; i < ws.basis.size(); ++i) {
    const double ui = a.column[i] * res.scalar_values(a.u[i]);
    HermBivarPoly term = ws.basis[i];
    term *= ui;
    w += term;
    value += ui * wp.objective[i];
  }
  out.witness = w;
  out.value = value;

  Certificate c;
  c.level = wp.method.level;
  switch (wp.method.kind) {
    case Hierarchy::reznick: c.kind = CertificateKind::reznick; break;
    case Hierarchy::pfr: c.kind = CertificateKind::pfr; break;
    case Hierarchy::rays:
      c.kind = CertificateKind::rays;
      c.angles = wp.method.angles;
      break;
  }
  if (a.charge) {
    std::vector<CMatrix> hs;
    for (std::size_t k = 0; k < a.blocks.size(); ++k) hs.push_back(block_matrix(a, res, k));
    c.matrices.push_back(charge_gram_to_real(*a.charge, hs).cast<cplx>());
    c.block_index.push_back(0);
    out.certificate = std::move(c);
    return out;
  }
  for (std::size_t k = 0; k < a.blocks.size(); ++k) {
    CMatrix mk = block_matrix(a, res, k);
    if (wp.method.kind == Hierarchy::pfr) mk = expand_toeplitz(mk, wp.period);
    c.matrices.push_back(std::move(mk));
    if (wp.method.kind == Hierarchy::pfr) {
      c.block_index.push_back(a.index[k]);
      c.block_scale.push_back(a.scales[a.index[k]]);
    } else {
      c.block_index.push_back(static_cast<int>(k));
    }
  }
  out.certificate = std::move(c);
  return out;
}

}  // namespace detect_detail

// ---------------------------------------------------------------------------
// Light

struct LightOptions {
  Method method = Method::reznick(0);
  Normalization norm = Normalization::gram_trace();
  bool diagonal_only = false;  // restrict to W = sum w_l a^dag^l a^l
  sdp::SolveOptions solver;
};

inline DetectionResult detect_light(const MomentTable& t, int D, const LightOptions& o = {}) {
  if (D < 0) throw Error("detect_light: negative degree");
  if (t.degree() < D)
    throw Error("detect_light: moments up to degree " + std::to_string(D) + " required, table has degree " +
                std::to_string(t.degree()));
  bool real_only = moments_are_real(t);
  if (o.norm.kind == NormalizationKind::reference) {
    if (o.norm.reference.degree() < D) throw Error("detect_light: reference moments do not reach degree D");
    real_only = real_only && moments_are_real(o.norm.reference);
  }
  const WitnessSpace ws = light_witness_space(D, real_only, o.diagonal_only);
  WitnessProblem wp;
  wp.space = &ws;
  wp.method = o.method;
  for (const auto& b : ws.basis) wp.objective.push_back(witness_expectation(b, t));
  if (o.norm.kind == NormalizationKind::gram_trace) {
    wp.gram_trace = true;
  } else {
    LinearRow row;
    for (const auto& b : ws.basis) row.coeffs.push_back(witness_expectation(b, o.norm.reference));
    row.rhs = 1.0;
    wp.rows.push_back(std::move(row));
  }
  auto r = detect_detail::solve_witness(wp, o.solver);
  r.normalization = o.norm.label();
  return r;
}

/// Outer approximation through finitely many lines: a lower bound on detect_light.
inline DetectionResult detect_light_lower(const MomentTable& t, int D, const std::vector<double>& angles,
                                          const Normalization& norm = Normalization::gram_trace(),
                                          const sdp::SolveOptions& solver = {}) {
  if (angles.empty()) throw Error("detect_light_lower: empty angle set");
  LightOptions o;
  o.method = Method::rays(angles);
  o.norm = norm;
  o.solver = solver;
  return detect_light(t, D, o);
}

// ---------------------------------------------------------------------------
// Spin

/// use_symmetry restricts V to the phase-symmetry class of the state; the
/// Reznick and PFR values are unchanged and the rays bound can only rise.
inline DetectionResult detect_spin(const DickeState& s, const Method& method, const sdp::SolveOptions& solver = {},
                                   bool use_symmetry = true) {
  const int m = s.m();
  if (m < 1) throw Error("detect_spin: need at least one qubit");
  const int period = use_symmetry ? phase_period(s.rho()) : 1;
  const WitnessSpace ws = spin_witness_space(m, s.is_real(), period);
  WitnessProblem wp;
  wp.space = &ws;
  wp.method = method;
  LinearRow trace_row;
  for (std::size_t i = 0; i < ws.basis.size(); ++i) {
    const CMatrix v = spin_basis_matrix(ws, i, m);
    wp.objective.push_back((v * s.rho()).trace().real());
    trace_row.coeffs.push_back(v.trace().real());
  }
  trace_row.rhs = m;
  wp.rows.push_back(std::move(trace_row));
  wp.weighted = true;
  wp.period = period;
  auto r = detect_detail::solve_witness(wp, solver);
  r.normalization = "trace=m";
  if (r.optimal()) {
    // recover V from the polynomial coefficients
    CMatrix v = CMatrix::Zero(m + 1, m + 1);
    for (const auto& [e, w] : r.witness.terms())
      v(e.first, e.second) = w / std::sqrt(binomial(m, e.first) * binomial(m, e.second));
    r.spin_witness = v;
  }
  return r;
}

inline DetectionResult detect_spin_lower(const DickeState& s, const std::vector<double>& angles,
                                         const sdp::SolveOptions& solver = {}) {
  if (angles.empty()) throw Error("detect_spin_lower: empty angle set");
  return detect_spin(s, Method::rays(angles), solver);
}

// ---------------------------------------------------------------------------
// States hidden from moment tests

struct HiddenState {
  FockState state;
  double value = 0.0;  // <W_f> on the returned state
  double moment_matrix_min_eig = 0.0;
  sdp::SolveStatus status = sdp::SolveStatus::numerical_failure;
  std::string message;
};

/// min tr(W_f rho) over rho on levels 0..n_max with M_{D~}(rho) psd.
inline HiddenState construct_hidden_state(const RealBivarPoly& f, int n_max, int d_tilde,
                                          const sdp::SolveOptions& solver = {}) {
  if (std::max(0, f.degree()) % 2 == 1) throw Error("construct_hidden_state: polynomial degree must be even");
  if (d_tilde < 0 || d_tilde % 2 == 1) throw Error("construct_hidden_state: moment degree must be even");
  if (n_max < 0) throw Error("construct_hidden_state: negative cutoff");
  const HermBivarPoly w = quadrature_to_ladder(f);
  const int dim = n_max + 1;
  const CMatrix wmat = operator_matrix(w, n_max);

  // operator behind each moment-matrix entry: :X^i P^j: truncated to the cutoff
  const int hd = d_tilde / 2;
  const auto basis = monomials_up_to(hd);
  const int nb = static_cast<int>(basis.size());
  std::map<Exponent, CMatrix, GradedLex> ops;
  bool complex_needed = wmat.imag().cwiseAbs().maxCoeff() > 0.0;
  for (int a = 0; a < nb; ++a)
    for (int b = a; b < nb; ++b) {
      const Exponent e{basis[a].first + basis[b].first, basis[a].second + basis[b].second};
      if (ops.count(e)) continue;
      const CMatrix op = operator_matrix(quadrature_to_ladder(RealBivarPoly{{e, 1.0}}), n_max);
      ops.emplace(e, op);
    }
  // Real W admits a real minimiser: conj(rho) has the same value and a
  // moment matrix congruent to M(rho) by diag(+-1), so the average is real.
  // Odd-P moments then vanish and their operators drop out.

  // A monomial whose diagonal operator vanishes on the cutoff space has a zero
  // row in M; keeping it would leave M without interior points. Its row
  // entries become plain equalities tr(O rho) = 0 instead.
  auto twice = [&](int a) { return Exponent{2 * basis[a].first, 2 * basis[a].second}; };
  std::vector<int> live(nb, -1);
  int n_live = 0;
  for (int a = 0; a < nb; ++a)
    if (ops.at(twice(a)).cwiseAbs().maxCoeff() > 0.0) live[a] = n_live++;

  sdp::ConicProblem prob;
  const int rb = prob.add_psd_block("rho", complex_needed ? 2 * dim : dim);
  const int mb = prob.add_psd_block("M", std::max(1, n_live));
  // tr(O rho) for Hermitian O in terms of the (real or embedded) block:
  // rho = A + iB with Y = [[A, -B], [B, A]] / ... ; we use rho = Y11 + Y22 + i (Y21 - Y12).
  auto trace_with = [&](const CMatrix& o, double scale) {
    sdp::LinearExpr e;
    for (int r = 0; r < dim; ++r)
      for (int c = r; c < dim; ++c) {
        // contribution of rho(r,c) and rho(c,r) = conj(rho(r,c)) to tr(O rho) = sum O(c,r) rho(r,c)
        const cplx ocr = o(c, r);
        if (!complex_needed) {
          const double v = r == c ? ocr.real() : 2.0 * ocr.real();
          if (v != 0.0) e.add_block(rb, r, c, scale * v);
          continue;
        }
        // Re rho(r,c) = Y(r,c) + Y(dim+r, dim+c); Im rho(r,c) = Y(dim+r, c) - Y(r, dim+c)
        const double re_coef = r == c ? ocr.real() : 2.0 * ocr.real();
        const double im_coef = r == c ? 0.0 : -2.0 * ocr.imag();
        if (re_coef != 0.0) {
          e.add_block(rb, r, c, scale * re_coef);
          e.add_block(rb, dim + r, dim + c, scale * re_coef);
        }
        if (im_coef != 0.0) {
          e.add_block(rb, dim + r, c, scale * im_coef);
          e.add_block(rb, r, dim + c, -scale * im_coef);
        }
      }
    return e;
  };
  {
    sdp::LinearExpr tr = trace_with(CMatrix::Identity(dim, dim), 1.0);
    prob.add_equality(tr, 1.0);
  }
  for (int a = 0; a < nb; ++a)
    for (int b = a; b < nb; ++b) {
      const Exponent e{basis[a].first + basis[b].first, basis[a].second + basis[b].second};
      const CMatrix& op = ops.at(e);
      if (live[a] >= 0 && live[b] >= 0) {
        sdp::LinearExpr row = trace_with(op, -1.0);
        row.add_block(mb, live[a], live[b], 1.0);
        prob.add_equality(row, 0.0);
      } else if (op.cwiseAbs().maxCoeff() > 0.0) {
        prob.add_equality(trace_with(op, 1.0), 0.0);
      }
    }
  prob.set_objective(trace_with(wmat, 1.0));
  const auto res = sdp::solve(prob, solver);

  HiddenState out;
  out.message = res.message;
  // Faces forced by the cutoff can still leave no strictly feasible state; the
  // solver then stalls near 1e-7. The value below is recomputed on a
  // projected state, so a looser acceptance is safe.
  if (!(res.status == sdp::SolveStatus::optimal || sdp::near_optimal(res, 1e-6))) {
    out.status = res.status;
    return out;
  }
  out.status = sdp::SolveStatus::optimal;
  if (res.status != sdp::SolveStatus::optimal) out.message = "reduced accuracy: " + res.message;
  const Eigen::MatrixXd& y = res.block_values[rb];
  CMatrix rho(dim, dim);
  if (complex_needed) {
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        rho(r, c) = cplx(y(r, c) + y(dim + r, dim + c), y(dim + r, c) - y(r, dim + c));
  } else {
    rho = y.cast<cplx>();
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  // project onto the state space: clip tiny negative eigenvalues, renormalise
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  rho = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  rho /= rho.trace().real();
  out.state = FockState(0.5 * (rho + rho.adjoint()));
  out.value = (wmat * out.state.rho()).trace().real();
  out.moment_matrix_min_eig = moment_matrix_test(moments_from_fock(out.state, d_tilde), hd).min_eigenvalue;
  return out;
}

// ---------------------------------------------------------------------------
// Restricted data

/// Signed Stirling numbers of the first kind s(n, k): n(n-1)...(n-k+1) = sum_k s(n,k) x^k.
inline std::vector<std::vector<double>> stirling_first(int n_max) {
  std::vector<std::vector<double>> s(n_max + 1, std::vector<double>(n_max + 1, 0.0));
  s[0][0] = 1.0;
  for (int n = 1; n <= n_max; ++n)
    for (int k = 1; k <= n; ++k) s[n][k] = s[n - 1][k - 1] - (n - 1) * s[n - 1][k];
  return s;
}

/// <n^j>, j = 0..d  ->  <a^dag^l a^l>, l = 0..d.
inline std::vector<double> factorial_moments(const std::vector<double>& number_moments) {
  if (number_moments.empty()) throw Error("factorial_moments: no data");
  const int d = static_cast<int>(number_moments.size()) - 1;
  const auto s = stirling_first(d);
  std::vector<double> out(d + 1, 0.0);
  for (int l = 0; l <= d; ++l)
    for (int j = 0; j <= l; ++j) out[l] += s[l][j] * number_moments[j];
  return out;
}

/// Witness W = sum_l w_l a^dag^l a^l, p_W = sum_l w_l r^{2l} >= 0 on the real line.
inline DetectionResult detect_photon_number(const std::vector<double>& number_moments, int d,
                                            const Normalization& norm = Normalization::gram_trace(),
                                            const sdp::SolveOptions& solver = {}) {
  if (d < 0) throw Error("detect_photon_number: negative degree");
  if (static_cast<int>(number_moments.size()) < d + 1)
    throw Error("detect_photon_number: moments <n^j> up to j = " + std::to_string(d) + " required");
  std::vector<double> nm(number_moments.begin(), number_moments.begin() + d + 1);
  const auto fm = factorial_moments(nm);
  MomentTable t(2 * d);
  for (int l = 0; l <= d; ++l) t.set(l, l, fm[l]);
  LightOptions o;
  o.method = Method::rays({0.0});
  o.norm = norm;
  o.diagonal_only = true;
  o.solver = solver;
  auto r = detect_light(t, 2 * d, o);
  r.method = "photon-number";
  return r;
}

/// Witness W = sum_n w_n |n><n|; <a|W|a> >= 0 <=> sum_n (w_n / n!) x^{2n} >= 0.
/// Normalisation: sum_n norm_weights[n] w_n = norm_rhs (default w_0 + w_{n_max} = 2).
inline DetectionResult detect_photon_probs(const std::vector<double>& probs, std::vector<double> norm_weights = {},
                                           double norm_rhs = 2.0, const sdp::SolveOptions& solver = {}) {
  if (probs.empty()) throw Error("detect_photon_probs: no probabilities");
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw Error("detect_photon_probs: negative probability");
    total += p;
  }
  if (total > 1.0 + 1e-12) throw Error("detect_photon_probs: probabilities sum above one");
  const int n_max = static_cast<int>(probs.size()) - 1;
  if (norm_weights.empty()) {
    norm_weights.assign(n_max + 1, 0.0);
    norm_weights[0] += 1.0;
    norm_weights[n_max] += 1.0;
  }
  if (static_cast<int>(norm_weights.size()) != n_max + 1)
    throw Error("detect_photon_probs: normalisation weights must match the number of probabilities");

  sdp::ConicProblem prob;
  std::vector<int> w(n_max + 1);
  Affine<UnivariatePoly> f{UnivariatePoly(), {}};
  for (int n = 0; n <= n_max; ++n) {
    w[n] = prob.add_free_scalar("w" + std::to_string(n));
    std::vector<double> c(2 * n + 1, 0.0);
    c[2 * n] = 1.0 / factorial(n);
    f.terms.emplace_back(w[n], UnivariatePoly(c));
  }
  const auto g = add_univariate_sos_constraint(prob, f, n_max, "G");
  sdp::LinearExpr nrm, obj;
  for (int n = 0; n <= n_max; ++n) {
    nrm.add_scalar(w[n], norm_weights[n]);
    obj.add_scalar(w[n], probs[n]);
  }
  prob.add_equality(nrm, norm_rhs);
  prob.set_objective(obj);
  const auto res = sdp::solve(prob, solver);

  DetectionResult out;
  out.method = "photon-probabilities";
  out.normalization = "weights";
  out.iterations = res.iterations;
  out.solver_value = res.objective_value;
  out.message = res.message;
  if (!(res.status == sdp::SolveStatus::optimal || sdp::near_optimal(res, detect_detail::kAcceptTol))) {
    out.status = res.status;
    return out;
  }
  out.status = sdp::SolveStatus::optimal;
  // W = sum_n w_n |n><n| written in normal order: |n><n| = sum_j (-1)^j / (n! j!) a^dag^{n+j} a^{n+j},
  // truncated to the data cutoff; the polynomial form is kept in the univariate certificate.
  HermBivarPoly wp(2 * n_max);
  double value = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double wn = res.scalar_values(w[n]);
    value += wn * probs[n];
    wp.add(n, n, wn / factorial(n));
  }
  out.witness = wp;  // coefficients of sum_n (w_n / n!) |a|^{2n}, the certified polynomial
  out.value = value;
  Certificate c;
  c.kind = CertificateKind::univariate_sos;
  c.matrices.push_back(res.block_values[g.block].cast<cplx>());
  out.certificate = std::move(c);
  return out;
}

/// <:X^n:> from plain moments <X^j>, j <= n, with [X, P] = i/2:
/// :X^n: = sum_k n! / (k! (n-2k)!) (-1/8)^k X^{n-2k}.
inline std::vector<double> normal_ordered_from_plain(const std::vector<double>& plain) {
  std::vector<double> out(plain.size(), 0.0);
  for (int n = 0; n < static_cast<int>(plain.size()); ++n)
    for (int k = 0; 2 * k <= n; ++k)
      out[n] += factorial(n) / (factorial(k) * factorial(n - 2 * k)) * std::pow(-0.125, k) * plain[n - 2 * k];
  return out;
}

struct QuadratureData {
  std::vector<double> x;  // <:X^l:>, l = 0..d (empty when absent)
  std::vector<double> p;  // <:P^l:>
};

/// Witnesses sum_l c_l :X^l: + sum_l d_l :P^l:, nonnegative as f(x) + g(y).
/// With both quadratures the certificate is f + kappa = SOS_x, g - kappa = SOS_y.
inline DetectionResult detect_quadrature(const QuadratureData& data, const sdp::SolveOptions& solver = {}) {
  const bool has_x = !data.x.empty(), has_p = !data.p.empty();
  if (!has_x && !has_p) throw Error("detect_quadrature: no data");
  sdp::ConicProblem prob;
  sdp::LinearExpr obj, trace;
  std::vector<std::pair<int, int>> gram;  // (block, size)
  auto add_quadrature = [&](const std::vector<double>& mom, int kappa, double kappa_sign, const char* name,
                            std::vector<int>& coeff_ids) {
    const int d = static_cast<int>(mom.size()) - 1;
    Affine<UnivariatePoly> f{UnivariatePoly(), {}};
    for (int l = 0; l <= d; ++l) {
      const int id = prob.add_free_scalar(std::string(name) + std::to_string(l));
      coeff_ids.push_back(id);
      std::vector<double> c(l + 1, 0.0);
      c[l] = 1.0;
      f.terms.emplace_back(id, UnivariatePoly(c));
      obj.add_scalar(id, mom[l]);
    }
    if (kappa >= 0) f.terms.emplace_back(kappa, UnivariatePoly({kappa_sign}));
    const auto g = add_univariate_sos_constraint(prob, f, d / 2, name);
    for (int r = 0; r <= d / 2; ++r) trace.add_block(g.block, r, r, 1.0);
    gram.emplace_back(g.block, d / 2 + 1);
  };
  const int kappa = has_x && has_p ? prob.add_free_scalar("kappa") : -1;
  std::vector<int> cx, cp;
  if (has_x) {
    if (std::abs(data.x[0] - 1.0) > 1e-12) throw Error("detect_quadrature: <:X^0:> must be 1");
    add_quadrature(data.x, kappa, 1.0, "X", cx);
  }
  if (has_p) {
    if (std::abs(data.p[0] - 1.0) > 1e-12) throw Error("detect_quadrature: <:P^0:> must be 1");
    add_quadrature(data.p, kappa, -1.0, "P", cp);
  }
  prob.add_equality(trace, 1.0);
  prob.set_objective(obj);
  const auto res = sdp::solve(prob, solver);

  DetectionResult out;
  out.method = has_x && has_p ? "quadrature-xp" : (has_x ? "quadrature-x" : "quadrature-p");
  out.normalization = "gram-trace";
  out.iterations = res.iterations;
  out.solver_value = res.objective_value;
  out.message = res.message;
  if (!(res.status == sdp::SolveStatus::optimal || sdp::near_optimal(res, detect_detail::kAcceptTol))) {
    out.status = res.status;
    return out;
  }
  out.status = sdp::SolveStatus::optimal;
  RealBivarPoly f;
  double value = 0.0;
  for (std::size_t l = 0; l < cx.size(); ++l) {
    f.add(static_cast<int>(l), 0, res.scalar_values(cx[l]));
    value += res.scalar_values(cx[l]) * data.x[l];
  }
  for (std::size_t l = 0; l < cp.size(); ++l) {
    f.add(0, static_cast<int>(l), res.scalar_values(cp[l]));
    value += res.scalar_values(cp[l]) * data.p[l];
  }
  out.witness = quadrature_to_ladder(f);
  out.value = value;
  return out;
}

// ---------------------------------------------------------------------------
// Quantification

struct QuantifyResult {
  double s = std::numeric_limits<double>::quiet_NaN();  // largest classical mixing weight
  double v = std::numeric_limits<double>::quiet_NaN();  // min <W> with tr(W rho0) = 1
  FockState reference;
  bool s_unbounded = false;  // never detected up to the search limit
  bool v_unbounded = false;  // degenerate reference: normalisation leaves a free direction
  sdp::SolveStatus status = sdp::SolveStatus::numerical_failure;
  std::string message;
  int bisection_steps = 0;
};

struct QuantifyOptions {
  Method method = Method::reznick(0);
  double t_tol = 1e-5;
  double detect_tol = 1e-9;
  double t_limit = 1 << 20;
  sdp::SolveOptions solver;
};

/// s from bisection on t -> t rho + (1 - t) rho0 (gram-trace detection), v from the
/// reference-normalised witness problem; the two are linked by v = 1 - 1/s.
inline QuantifyResult quantify(const FockState& s, const FockState& rho0, int D, const QuantifyOptions& o = {}) {
  if (s.n_max() != rho0.n_max()) throw Error("quantify: state and reference cutoffs differ");
  QuantifyResult out;
  out.reference = rho0;
  const MomentTable ms = moments_from_fock(s, D);
  const MomentTable m0 = moments_from_fock(rho0, D);

  LightOptions vo;
  vo.method = o.method;
  vo.norm = Normalization::reference_moments(m0);
  vo.solver = o.solver;
  const auto vr = detect_light(ms, D, vo);
  if (vr.status == sdp::SolveStatus::unbounded) {
    out.v_unbounded = true;
    out.v = -std::numeric_limits<double>::infinity();
  } else if (vr.optimal()) {
    out.v = vr.value;
  } else {
    out.status = vr.status;
    out.message = "reference-normalised problem: " + vr.message;
    return out;
  }

  LightOptions go;
  go.method = o.method;
  go.solver = o.solver;
  auto detected = [&](double t) {
    const auto r = detect_light(MomentTable::mix(t, ms, m0), D, go);
    if (!r.optimal()) throw Error("quantify: detection at t = " + std::to_string(t) + " failed: " + r.message);
    return r.value < -o.detect_tol;
  };
  if (detected(0.0)) {
    out.status = sdp::SolveStatus::numerical_failure;
    out.message = "reference state is detected at this level";
    return out;
  }
  double lo = 0.0, hi = 1.0;
  while (!detected(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > o.t_limit) {
      out.s_unbounded = true;
      out.s = std::numeric_limits<double>::infinity();
      out.status = sdp::SolveStatus::optimal;
      out.message = "mixture never detected";
      return out;
    }
  }
  int steps = 0;
  while (hi - lo > o.t_tol) {
    const double mid = 0.5 * (lo + hi);
    (detected(mid) ? hi : lo) = mid;
    ++steps;
  }
  out.s = 0.5 * (lo + hi);
  out.bisection_steps = steps;
  out.status = sdp::SolveStatus::optimal;
  out.message = "ok";
  return out;
}

}  // namespace nonclass

#endif  // NONCLASS_DETECT_HPP
