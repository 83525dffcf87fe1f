#ifndef NONCLASS_CATALOG_HPP
#define NONCLASS_CATALOG_HPP

// Named polynomials, observables and states used by the tests, demos and CLI.

#include <cmath>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "nonclass/polyalg.hpp"
#include "nonclass/quantum.hpp"
#include "nonclass/spinmap.hpp"

namespace nonclass {

inline RealBivarPoly motzkin() { return {{{4, 2}, 1.0}, {{2, 4}, 1.0}, {{2, 2}, -3.0}, {{0, 0}, 1.0}}; }

inline RealBivarPoly robinson() {
  return {{{6, 0}, 1.0},  {{4, 2}, -1.0}, {{2, 4}, -1.0}, {{0, 6}, 1.0},  {{4, 0}, -1.0}, {{2, 2}, 3.0},
          {{0, 4}, -1.0}, {{2, 0}, -1.0}, {{0, 2}, -1.0}, {{0, 0}, 1.0}};
}

inline RealBivarPoly choi_lam() { return {{{4, 2}, 1.0}, {{2, 2}, -3.0}, {{0, 4}, 1.0}, {{2, 0}, 1.0}}; }

/// V = 1/2 - |GHZ><GHZ| on the symmetric subspace of m qubits.
inline SpinObservable ghz_witness(int m) {
  if (m < 2) throw Error("ghz_witness: need at least two qubits");
  CMatrix v = CMatrix::Zero(m + 1, m + 1);
  for (int i = 1; i < m; ++i) v(i, i) = 0.5;
  v(0, m) = v(m, 0) = -0.5;
  return SpinObservable(v);
}

inline DickeState ghz_state(int m) {
  if (m < 1) throw Error("ghz_state: need at least one qubit");
  CMatrix rho = CMatrix::Zero(m + 1, m + 1);
  rho(0, 0) = rho(m, m) = rho(0, m) = rho(m, 0) = 0.5;
  return DickeState(rho);
}

inline DickeState dicke_basis_state(int m, int l) {
  if (l < 0 || l > m) throw Error("dicke_basis_state: excitation number out of range");
  CMatrix rho = CMatrix::Zero(m + 1, m + 1);
  rho(l, l) = 1.0;
  return DickeState(rho);
}

/// f_k(a) with f_0 = 1, f_1 = 1 + a, f_{k+2} = (2 + a) f_{k+1} - f_k for all integers k.
inline double tura_f(int k, double a) {
  if (k < 0) return tura_f(-1 - k, a);  // the recursion run backwards mirrors around -1/2
  double f0 = 1.0, f1 = 1.0 + a;
  if (k == 0) return f0;
  for (int i = 1; i < k; ++i) {
    const double f2 = (2.0 + a) * f1 - f0;
    f0 = f1;
    f1 = f2;
  }
  return f1;
}

/// rho(a, b, K) on m = 2K + 1 qubits: [sum_l C(m,l) f_{K-l}(a) |l><l| + b(|0><m| + |m><0|)] / (2 (4 + a)^K).
inline DickeState tura_state(double a, int b, int K) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error("tura_state: a must be positive");
  if (b != 1 && b != -1) throw Error("tura_state: b must be +1 or -1");
  if (K < 2) throw Error("tura_state: K must be at least 2");
  const int m = 2 * K + 1;
  const double norm = 2.0 * std::pow(4.0 + a, K);
  CMatrix rho = CMatrix::Zero(m + 1, m + 1);
  for (int l = 0; l <= m; ++l) rho(l, l) = binomial(m, l) * tura_f(K - l, a) / norm;
  rho(0, m) = rho(m, 0) = b / norm;
  return DickeState(rho);
}

// ---------------------------------------------------------------------------
// Optical fixtures

struct TruncatedState {
  FockState state;
  double tail_mass = 0.0;  // probability beyond n_max before renormalisation
};

namespace catalog_detail {

inline TruncatedState finish(Eigen::VectorXcd psi, const char* what, bool allow_tail) {
  const double kept = psi.squaredNorm();
  const double tail = std::max(0.0, 1.0 - kept);
  if (tail > 1e-6 && !allow_tail)
    throw Error(std::string(what) + ": truncated tail mass " + std::to_string(tail) + " exceeds 1e-6");
  return {FockState::pure(psi), tail};
}

}  // namespace catalog_detail

inline TruncatedState fock_state(int n, int n_max = -1) {
  if (n < 0) throw Error("fock_state: negative photon number");
  if (n_max < 0) n_max = n;
  if (n_max < n) throw Error("fock_state: cutoff below photon number");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n_max + 1);
  psi(n) = 1.0;
  return {FockState::pure(psi), 0.0};
}

inline TruncatedState coherent_state(cplx alpha, int n_max, bool allow_tail = false) {
  if (n_max < 0) throw Error("coherent_state: negative cutoff");
  Eigen::VectorXcd psi(n_max + 1);
  const double pref = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n <= n_max; ++n) psi(n) = pref * ipow(alpha, n) / std::sqrt(factorial(n));
  return catalog_detail::finish(psi, "coherent_state", allow_tail);
}

inline TruncatedState thermal_state(double nbar, int n_max, bool allow_tail = false) {
  if (nbar < 0.0) throw Error("thermal_state: negative mean photon number");
  if (n_max < 0) throw Error("thermal_state: negative cutoff");
  CMatrix rho = CMatrix::Zero(n_max + 1, n_max + 1);
  const double q = nbar / (1.0 + nbar);
  double kept = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double p = std::pow(q, n) / (1.0 + nbar);
    rho(n, n) = p;
    kept += p;
  }
  const double tail = std::max(0.0, 1.0 - kept);
  if (tail > 1e-6 && !allow_tail)
    throw Error("thermal_state: truncated tail mass " + std::to_string(tail) + " exceeds 1e-6");
  rho /= kept;
  return {FockState(rho), tail};
}

/// exp(r/2 (a^2 - a^dag^2)) |0>, squeezed in X: <X^2> = exp(-2r)/4.
inline TruncatedState squeezed_vacuum(double r, int n_max, bool allow_tail = false) {
  if (n_max < 0) throw Error("squeezed_vacuum: negative cutoff");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n_max + 1);
  const double t = std::tanh(r);
  const double pref = 1.0 / std::sqrt(std::cosh(r));
  for (int k = 0; 2 * k <= n_max; ++k) {
    const double lc = 0.5 * std::lgamma(2.0 * k + 1.0) - k * std::log(2.0) - std::lgamma(k + 1.0);
    psi(2 * k) = pref * std::pow(-t, k) * std::exp(lc);
  }
  return catalog_detail::finish(psi, "squeezed_vacuum", allow_tail);
}

/// Dispatcher over the fixtures above by name: fock, coherent, thermal, squeezed.
inline TruncatedState standard_state(const std::string& name, double param, int n_max, bool allow_tail = false) {
  if (name == "fock") {
    const int n = static_cast<int>(std::lround(param));
    if (std::abs(param - n) > 1e-12) throw Error("standard_state: fock needs an integer photon number");
    return fock_state(n, n_max);
  }
  if (name == "coherent") return coherent_state(param, n_max, allow_tail);
  if (name == "thermal") return thermal_state(param, n_max, allow_tail);
  if (name == "squeezed") return squeezed_vacuum(param, n_max, allow_tail);
  throw Error("standard_state: unknown state '" + name + "'");
}

/// Two-component mixture on levels {1,5,9} and {2,6,10} that defeats degree-6 moment tests.
inline FockState motzkin_hidden_state() {
  const double p = 0.06619, a = 0.69896, b = -0.68135, d = -0.94138, e = 0.3124;
  const double c = -std::sqrt(1.0 - a * a - b * b);
  const double f = std::sqrt(1.0 - d * d - e * e);
  Eigen::VectorXcd psi1 = Eigen::VectorXcd::Zero(11), psi2 = Eigen::VectorXcd::Zero(11);
  psi1(1) = a;
  psi1(5) = b;
  psi1(9) = c;
  psi2(2) = d;
  psi2(6) = e;
  psi2(10) = f;
  return FockState(p * psi1 * psi1.adjoint() + (1.0 - p) * psi2 * psi2.adjoint());
}

// ---------------------------------------------------------------------------
// Named entries

enum class EntryKind { polynomial, spin_observable, fock_state, dicke_state };

inline std::string to_string(EntryKind k) {
  switch (k) {
    case EntryKind::polynomial: return "polynomial";
    case EntryKind::spin_observable: return "spin-observable";
    case EntryKind::fock_state: return "fock-state";
    case EntryKind::dicke_state: return "dicke-state";
  }
  return "unknown";
}

struct NamedEntry {
  std::string name;
  EntryKind kind;
  std::string description;
  std::variant<RealBivarPoly, SpinObservable, FockState, DickeState> payload;
};

inline std::vector<NamedEntry> catalog_entries() {
  std::vector<NamedEntry> out;
  out.push_back({"motzkin", EntryKind::polynomial, "x^4 y^2 + x^2 y^4 - 3 x^2 y^2 + 1", motzkin()});
  out.push_back({"robinson", EntryKind::polynomial, "Robinson sextic", robinson()});
  out.push_back({"choi-lam", EntryKind::polynomial, "x^4 y^2 - 3 x^2 y^2 + y^4 + x^2", choi_lam()});
  for (int m = 2; m <= 6; ++m)
    out.push_back({"ghz-witness-" + std::to_string(m), EntryKind::spin_observable,
                   "1/2 - |GHZ><GHZ| on " + std::to_string(m) + " qubits", ghz_witness(m)});
  out.push_back({"ghz-3", EntryKind::dicke_state, "three-qubit GHZ state", ghz_state(3)});
  out.push_back({"tura-17", EntryKind::dicke_state, "rho(a=1, b=1, K=8) on 17 qubits", tura_state(1.0, 1, 8)});
  out.push_back({"vacuum", EntryKind::fock_state, "|0><0|", fock_state(0).state});
  out.push_back({"fock-1", EntryKind::fock_state, "|1><1|", fock_state(1).state});
  out.push_back({"motzkin-hidden", EntryKind::fock_state, "11-level state hidden from degree-6 moment tests",
                 motzkin_hidden_state()});
  return out;
}

inline NamedEntry catalog_lookup(const std::string& name) {
  for (auto& e : catalog_entries())
    if (e.name == name) return e;
  throw Error("catalog: no entry named '" + name + "'");
}

}  // namespace nonclass

#endif  // NONCLASS_CATALOG_HPP
