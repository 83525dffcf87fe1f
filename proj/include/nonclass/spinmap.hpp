#ifndef NONCLASS_SPINMAP_HPP
#define NONCLASS_SPINMAP_HPP

// Stereographic correspondence between symmetric m-qubit observables and
// bivariate polynomials. With |psi(beta)> proportional to |0> + beta |1>,
//
//   p_V(conj b, b) = (1 + |b|^2)^m <psi^m|V|psi^m>
//                  = sum_ij V_ij sqrt(C(m,i) C(m,j)) conj(b)^i b^j,
//
// which has box support i, j <= m.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "nonclass/polyalg.hpp"
#include "nonclass/quantum.hpp"

namespace nonclass {

/// Observable on the symmetric subspace, in the Dicke basis |m,0>..|m,m>.
class SpinObservable {
 public:
  explicit SpinObservable(CMatrix v) : v_(std::move(v)) {
    if (v_.rows() != v_.cols() || v_.rows() == 0)
      throw Error("SpinObservable: matrix must be square and nonempty");
    const double scale = std::max(1.0, v_.cwiseAbs().maxCoeff());
    if ((v_ - v_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw Error("SpinObservable: matrix is not Hermitian");
  }

  int m() const { return static_cast<int>(v_.rows()) - 1; }
  const CMatrix& matrix() const { return v_; }
  double trace() const { return v_.trace().real(); }

  double expectation(const DickeState& s) const {
    if (s.m() != m()) throw Error("SpinObservable: qubit number mismatch");
    return (v_ * s.rho()).trace().real();
  }

  /// <psi^m|V|psi^m> for the normalised product state with parameter beta.
  double product_expectation(cplx beta) const {
    const int mm = m();
    Eigen::VectorXcd psi(mm + 1);
    const double norm = std::pow(1.0 + std::norm(beta), -0.5 * mm);
    for (int l = 0; l <= mm; ++l) psi(l) = norm * std::sqrt(binomial(mm, l)) * ipow(beta, l);
    return (psi.adjoint() * v_ * psi)(0, 0).real();
  }

  /// The pole |1>^m, missed by the stereographic chart.
  double pole_expectation() const { return v_(m(), m()).real(); }

 private:
  CMatrix v_;
};

inline HermBivarPoly stereographic_poly(const SpinObservable& v) {
  const int m = v.m();
  HermBivarPoly p(m, SupportMode::box);
  for (int i = 0; i <= m; ++i)
    for (int j = i; j <= m; ++j) {
      const cplx c = v.matrix()(i, j) * std::sqrt(binomial(m, i) * binomial(m, j));
      if (c != cplx{}) p.set(i, j, c);
    }
  return p;
}

/// Same coefficients read as a normally ordered light observable: conj(b) -> a^dag, b -> a.
inline HermBivarPoly spin_to_light_witness(const SpinObservable& v) {
  return stereographic_poly(v).with_support(2 * v.m(), SupportMode::total);
}

struct SupportFlags {
  bool in_p_m = false;   // total degree <= m
  bool in_s_m = false;   // each exponent <= m
  bool in_p_2m = false;  // total degree <= 2m
};

inline SupportFlags support_inclusion_check(const HermBivarPoly& p, int m, double tol = 0.0) {
  if (m < 0) throw Error("support_inclusion_check: negative m");
  SupportFlags f{true, true, true};
  const double cut = tol * p.max_abs();
  for (const auto& [e, v] : p.terms()) {
    if (std::abs(v) <= cut) continue;
    if (e.degree() > m) f.in_p_m = false;
    if (e.first > m || e.second > m) f.in_s_m = false;
    if (e.degree() > 2 * m) f.in_p_2m = false;
  }
  return f;
}

}  // namespace nonclass

#endif  // NONCLASS_SPINMAP_HPP
