#ifndef NONCLASS_QUANTUM_HPP
#define NONCLASS_QUANTUM_HPP

// Truncated single-mode (Fock) and symmetric spin (Dicke) states, normally
// ordered moments and the quadrature moment matrix.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nonclass/polyalg.hpp"

namespace nonclass {

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

namespace detail {

inline double min_hermitian_eig(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline void check_density_matrix(const CMatrix& rho, const char* what) {
  if (rho.rows() != rho.cols() || rho.rows() == 0)
    throw Error(std::string(what) + ": density matrix must be square and nonempty");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) throw Error(std::string(what) + ": density matrix is not Hermitian");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) throw Error(std::string(what) + ": trace differs from one");
  if (min_hermitian_eig(rho) < -1e-9 * tr)
    throw Error(std::string(what) + ": density matrix is not positive semidefinite");
}

}  // namespace detail

/// Density matrix on the Fock levels 0..n_max.
class FockState {
 public:
  FockState() : FockState(vacuum_matrix()) {}
  explicit FockState(CMatrix rho) : rho_(std::move(rho)) {
    detail::check_density_matrix(rho_, "FockState");
  }

  int n_max() const { return static_cast<int>(rho_.rows()) - 1; }
  const CMatrix& rho() const { return rho_; }

  bool is_real() const { return rho_.imag().cwiseAbs().maxCoeff() == 0.0; }

  static FockState pure(const Eigen::VectorXcd& psi) {
    const Eigen::VectorXcd v = psi / psi.norm();
    return FockState(v * v.adjoint());
  }

 private:
  static CMatrix vacuum_matrix() {
    CMatrix m = CMatrix::Zero(1, 1);
    m(0, 0) = 1.0;
    return m;
  }
  CMatrix rho_;
};

/// Symmetric m-qubit state in the Dicke basis |m,l>, l = 0..m.
class DickeState {
 public:
  explicit DickeState(CMatrix rho) : rho_(std::move(rho)) {
    detail::check_density_matrix(rho_, "DickeState");
  }
  int m() const { return static_cast<int>(rho_.rows()) - 1; }
  const CMatrix& rho() const { return rho_; }
  bool is_real() const { return rho_.imag().cwiseAbs().maxCoeff() == 0.0; }

 private:
  CMatrix rho_;
};

/// Normally ordered moments mu(k, l) = <(a^dag)^k a^l> for k + l <= D.
class MomentTable {
 public:
  MomentTable() = default;
  explicit MomentTable(int degree) : degree_(degree) {
    if (degree < 0) throw Error("MomentTable: negative degree");
    mu_[{0, 0}] = 1.0;
  }

  int degree() const { return degree_; }
  const std::map<Exponent, cplx, GradedLex>& entries() const { return mu_; }

  bool has(int k, int l) const { return k >= 0 && l >= 0 && k + l <= degree_; }

  cplx operator()(int k, int l) const {
    if (!has(k, l))
      throw Error("MomentTable: moment (" + std::to_string(k) + "," + std::to_string(l) +
                  ") not available at degree " + std::to_string(degree_));
    auto it = mu_.find({k, l});
    return it == mu_.end() ? cplx{} : it->second;
  }

  /// Sets mu(k,l) and mu(l,k) = conj(mu(k,l)).
  void set(int k, int l, cplx v) {
    if (!has(k, l)) throw Error("MomentTable: moment index outside degree");
    if (k == l) v = v.real();
    mu_[{k, l}] = v;
    mu_[{l, k}] = std::conj(v);
  }

  /// t * a + (1 - t) * b, entrywise.
  static MomentTable mix(double t, const MomentTable& a, const MomentTable& b) {
    const int d = std::min(a.degree(), b.degree());
    MomentTable out(d);
    for (int s = 0; s <= d; ++s)
      for (int k = 0; k <= s; ++k)
        if (k <= s - k) out.set(k, s - k, t * a(k, s - k) + (1.0 - t) * b(k, s - k));
    return out;
  }

 private:
  int degree_ = 0;
  std::map<Exponent, cplx, GradedLex> mu_;
};

struct MomentMatrix {
  int half_degree = 0;             // monomials x^i y^j with i + j <= half_degree
  std::vector<Exponent> basis;     // graded-lex
  Matrix entries;                  // <:X^{i+i'} P^{j+j'}:>
};

struct MomentMatrixReport {
  double min_eigenvalue = 0.0;
  bool detected = false;
};

/// Matrix of a^dag^k a^l restricted to the levels 0..n_max.
inline Matrix ladder_monomial_matrix(int n_max, int k, int l) {
  const int dim = n_max + 1;
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = l; n < dim; ++n) {
    const int target = n - l + k;
    if (target >= dim) continue;
    a(target, n) = std::exp(0.5 * (std::lgamma(n + 1.0) + std::lgamma(target + 1.0)) -
                            std::lgamma(n - l + 1.0));
  }
  return a;
}

/// Matrix of the normally ordered observable W in the truncated Fock basis.
inline CMatrix operator_matrix(const HermBivarPoly& w, int n_max) {
  CMatrix out = CMatrix::Zero(n_max + 1, n_max + 1);
  for (const auto& [e, v] : w.terms()) {
    if (v == cplx{}) continue;
    out += v * ladder_monomial_matrix(n_max, e.first, e.second).cast<cplx>();
  }
  return out;
}

inline MomentTable moments_from_fock(const FockState& s, int degree) {
  if (degree < 0) throw Error("moments_from_fock: negative degree");
  MomentTable t(degree);
  const CMatrix& rho = s.rho();
  const int dim = static_cast<int>(rho.rows());
  for (int d = 0; d <= degree; ++d) {
    for (int k = 0; k <= d; ++k) {
      const int l = d - k;
      if (k > l) continue;
      // Tr(rho A) = sum_n rho(n, n - l + k) <n - l + k|A|n>
      cplx acc = 0.0;
      for (int n = l; n < dim; ++n) {
        const int target = n - l + k;
        if (target >= dim) continue;
        const double c = std::exp(0.5 * (std::lgamma(n + 1.0) + std::lgamma(target + 1.0)) -
                                  std::lgamma(n - l + 1.0));
        acc += rho(n, target) * c;
      }
      t.set(k, l, acc);
    }
  }
  return t;
}

/// <W> = sum w_kl mu_kl.
inline double witness_expectation(const HermBivarPoly& w, const MomentTable& t) {
  cplx acc = 0.0;
  for (const auto& [e, v] : w.terms()) {
    if (v == cplx{}) continue;
    acc += v * t(e.first, e.second);
  }
  return acc.real();
}

/// <:X^i P^j:> from the ladder moments.
inline double quadrature_moment(const MomentTable& t, int i, int j) {
  RealBivarPoly mono{{{i, j}, 1.0}};
  return witness_expectation(quadrature_to_ladder(mono), t);
}

inline MomentMatrix moment_matrix(const MomentTable& t, int half_degree) {
  if (half_degree < 0) throw Error("moment_matrix: negative degree");
  if (t.degree() < 2 * half_degree)
    throw Error("moment_matrix: moments up to degree " + std::to_string(2 * half_degree) +
                " required, table has degree " + std::to_string(t.degree()));
  MomentMatrix mm;
  mm.half_degree = half_degree;
  mm.basis = monomials_up_to(half_degree);
  const int n = static_cast<int>(mm.basis.size());
  mm.entries.resize(n, n);
  std::map<Exponent, double, GradedLex> cache;
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const Exponent e{mm.basis[a].first + mm.basis[b].first, mm.basis[a].second + mm.basis[b].second};
      auto it = cache.find(e);
      if (it == cache.end()) it = cache.emplace(e, quadrature_moment(t, e.first, e.second)).first;
      mm.entries(a, b) = mm.entries(b, a) = it->second;
    }
  }
  return mm;
}

inline MomentMatrixReport moment_matrix_test(const MomentTable& t, int half_degree, double tol = 1e-8) {
  const MomentMatrix mm = moment_matrix(t, half_degree);
  Eigen::SelfAdjointEigenSolver<Matrix> es(mm.entries, Eigen::EigenvaluesOnly);
  MomentMatrixReport r;
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.detected = r.min_eigenvalue < -tol;
  return r;
}

struct ClassicalReference {
  FockState state;
  double retained_mass = 1.0;  // trace before renormalisation
};

/// rho0 = int d^2a/pi <a|rho|a> |a><a|, truncated to the input cutoff and renormalised.
inline ClassicalReference classical_reference_with_mass(const FockState& s) {
  const CMatrix& rho = s.rho();
  const int dim = static_cast<int>(rho.rows());
  CMatrix out = CMatrix::Zero(dim, dim);
  std::vector<double> lf(2 * dim + 1);
  for (int i = 0; i < static_cast<int>(lf.size()); ++i) lf[i] = std::lgamma(i + 1.0);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      cplx acc = 0.0;
      // selection rule j + n = k + m
      for (int j = 0; j < dim; ++j) {
        const int k = j + n - m;
        if (k < 0 || k >= dim) continue;
        const int sdeg = j + n;
        const double w = std::exp(lf[sdeg] - (sdeg + 1) * std::log(2.0) -
                                  0.5 * (lf[j] + lf[k] + lf[m] + lf[n]));
        acc += rho(j, k) * w;
      }
      out(m, n) = acc;
    }
  }
  out = 0.5 * (out + out.adjoint()).eval();
  const double mass = out.trace().real();
  out /= mass;
  return {FockState(out), mass};
}

inline FockState classical_reference(const FockState& s) { return classical_reference_with_mass(s).state; }

inline FockState mix(double t, const FockState& a, const FockState& b) {
  if (a.n_max() != b.n_max()) throw Error("mix: cutoff mismatch");
  return FockState(t * a.rho() + (1.0 - t) * b.rho());
}

}  // namespace nonclass

#endif  // NONCLASS_QUANTUM_HPP
