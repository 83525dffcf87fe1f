#ifndef NONCLASS_TESTS_SUPPORT_HPP
#define NONCLASS_TESTS_SUPPORT_HPP

// Generators and brute-force oracles shared by the test suites. The oracles
// deliberately avoid the library's own conversion routines.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "nonclass/polyalg.hpp"
#include "nonclass/quantum.hpp"

namespace testing_support {

using nonclass::cplx;
using nonclass::HermBivarPoly;
using nonclass::RealBivarPoly;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240917);
  return g;
}

inline double uniform(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }

inline cplx random_point(double radius) {
  const double r = radius * std::sqrt(uniform(0.0, 1.0));
  const double th = uniform(0.0, 2.0 * std::numbers::pi);
  return std::polar(r, th);
}

/// Random Hermitian coefficient table with total degree <= d.
inline HermBivarPoly random_hermitian(int d) {
  HermBivarPoly p(d);
  for (int k = 0; k <= d; ++k)
    for (int l = k; k + l <= d; ++l) p.set(k, l, k == l ? cplx(uniform()) : cplx(uniform(), uniform()));
  return p;
}

inline RealBivarPoly random_real(int d) {
  RealBivarPoly f;
  for (int i = 0; i <= d; ++i)
    for (int j = 0; i + j <= d; ++j) f.set(i, j, uniform());
  return f;
}

/// sum_j g_j^2 for `count` random g_j of degree <= d.
inline RealBivarPoly random_sos(int d, int count) {
  RealBivarPoly out;
  for (int j = 0; j < count; ++j) {
    const auto g = random_real(d);
    out += g * g;
  }
  return out;
}

/// sum w_kl conj(a)^k a^l, straight from the definition.
inline cplx eval_ladder(const HermBivarPoly& p, cplx a) {
  cplx s = 0.0;
  for (const auto& [e, w] : p.terms()) s += w * std::pow(std::conj(a), e.first) * std::pow(a, e.second);
  return s;
}

inline double eval_real(const RealBivarPoly& f, double x, double y) {
  double s = 0.0;
  for (const auto& [e, c] : f.terms()) s += c * std::pow(x, e.first) * std::pow(y, e.second);
  return s;
}

/// Density matrix G G^dag / tr with a complex Gaussian G of the given rank.
inline Eigen::MatrixXcd random_density(int dim, int rank = -1, bool real = false) {
  if (rank < 0) rank = dim;
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd g(dim, rank);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < rank; ++c) g(r, c) = real ? cplx(n(rng()), 0.0) : cplx(n(rng()), n(rng()));
  Eigen::MatrixXcd rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Annihilation operator on levels 0..dim-1.
inline Eigen::MatrixXcd annihilation(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// tr(rho a^dag^k a^l) with rho padded into a space large enough for the
/// ladder products not to feel the boundary.
inline cplx dense_moment(const Eigen::MatrixXcd& rho, int k, int l) {
  const int n = static_cast<int>(rho.rows());
  const int dim = n + k + l + 1;
  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(dim, dim);
  big.topLeftCorner(n, n) = rho;
  const Eigen::MatrixXcd a = annihilation(dim);
  const Eigen::MatrixXcd ad = a.adjoint();
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Identity(dim, dim);
  for (int i = 0; i < k; ++i) op = op * ad;
  for (int i = 0; i < l; ++i) op = op * a;
  return (big * op).trace();
}

inline double dense_witness(const HermBivarPoly& w, const Eigen::MatrixXcd& rho) {
  cplx s = 0.0;
  for (const auto& [e, c] : w.terms()) s += c * dense_moment(rho, e.first, e.second);
  return s.real();
}

/// Minimum of p over a polar grid of the disc |a| <= radius.
inline double grid_min(const HermBivarPoly& p, double radius, int nr = 200, int nt = 200) {
  double lo = std::real(eval_ladder(p, 0.0));
  for (int i = 1; i <= nr; ++i)
    for (int j = 0; j < nt; ++j) {
      const cplx a = std::polar(radius * i / nr, 2.0 * std::numbers::pi * j / nt);
      lo = std::min(lo, std::real(eval_ladder(p, a)));
    }
  return lo;
}

}  // namespace testing_support

#endif  // NONCLASS_TESTS_SUPPORT_HPP
