#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nonclass/catalog.hpp"
#include "nonclass/certify.hpp"
#include "support.hpp"

using namespace nonclass;
namespace ts = testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

void expect_sound(const CertifyOutcome& o, const RealBivarPoly& f) {
  ASSERT_TRUE(o.certified) << o.message;
  ASSERT_TRUE(o.certificate.has_value());
  const auto v = verify_certificate(*o.certificate, f, 1e-7);
  EXPECT_TRUE(v.ok) << v.message;
  for (const auto& m : o.certificate->matrices) EXPECT_GE(sdp::psd_min_eig(m), -1e-8);
}

/// Smallest b with every coefficient of (1 + r)^b f(r) nonnegative.
int polya_exponent(std::vector<double> c, int limit) {
  for (int b = 0; b <= limit; ++b) {
    bool ok = true;
    for (double v : c) ok = ok && v >= 0.0;
    if (ok) return b;
    std::vector<double> n(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      n[i] += c[i];
      n[i + 1] += c[i];
    }
    c = n;
  }
  return -1;
}

TrigPoly trig(std::initializer_list<std::pair<int, cplx>> coeffs, int t) {
  TrigPoly q(t);
  for (const auto& [l, c] : coeffs) q.set(l, c);
  return q;
}

}  // namespace

// certify_sos

TEST(CertifySos, UnivariateSextic) {
  const RealBivarPoly f{{{6, 0}, 1.0}, {{4, 0}, 2.0}, {{2, 0}, 1.0}};
  expect_sound(certify_sos(f), f);
}

TEST(CertifySos, BivariateQuartic) {
  const RealBivarPoly f{{{4, 0}, 1.0}, {{2, 1}, 6.0}, {{0, 2}, 9.0}};  // (x^2 + 3y)^2
  expect_sound(certify_sos(f), f);
}

TEST(CertifySos, MotzkinIsRefuted) {
  const auto o = certify_sos(motzkin());
  EXPECT_FALSE(o.certified);
  ASSERT_EQ(o.attempts.size(), 1u);
}

TEST(CertifySos, OddDegreeIsRefutedImmediately) {
  const auto o = certify_sos(RealBivarPoly{{{3, 0}, 1.0}, {{0, 0}, 5.0}});
  EXPECT_FALSE(o.certified);
  EXPECT_TRUE(o.attempts.empty());
}

TEST(CertifySos, RandomSumsOfSquaresAreCertified) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = ts::random_sos(ts::uniform_int(1, 3), ts::uniform_int(1, 4));
    expect_sound(certify_sos(f), f);
  }
}

// certify_reznick

TEST(CertifyReznick, ConstantAtLevelZero) {
  const RealBivarPoly one{{{0, 0}, 1.0}};
  const auto o = certify_reznick(one, 2);
  expect_sound(o, one);
  EXPECT_EQ(o.certificate->level, 0);
}

TEST(CertifyReznick, MotzkinAtLevelOne) {
  const auto o = certify_reznick(motzkin(), 3);
  expect_sound(o, motzkin());
  EXPECT_EQ(o.certificate->level, 1);
  EXPECT_EQ(o.certificate->kind, CertificateKind::reznick);
  ASSERT_EQ(o.attempts.size(), 2u);
}

TEST(CertifyReznick, ChoiLamAndRobinsonAtLevelOne) {
  // recorded from the hierarchy run; each certificate is checked independently
  for (const auto& f : {choi_lam(), robinson()}) {
    const auto o = certify_reznick(f, 3);
    expect_sound(o, f);
    EXPECT_EQ(o.certificate->level, 1);
  }
}

TEST(CertifyReznick, MonotoneInLevel) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = ts::random_sos(2, ts::uniform_int(1, 3));
    for (int b = 0; b <= 3; ++b) {
      const auto o = certify_detail::gram_level(f, b, {});
      EXPECT_TRUE(o.certified) << "trial " << trial << " level " << b << ": " << o.message;
      if (o.certified) EXPECT_TRUE(verify_certificate(*o.certificate, f, 1e-7).ok);
    }
  }
}

TEST(CertifyReznick, CertificateReassemblesTheMultipliedPolynomial) {
  const auto o = certify_reznick(motzkin(), 1);
  ASSERT_TRUE(o.certified);
  const auto g = certify_detail::gram_reassemble(o.certificate->matrices[0]);
  const auto want = reznick_multiply(motzkin(), 1);
  EXPECT_LT(certify_detail::real_mismatch(g, want), 1e-7);
  // divide the multiplier back out on a grid
  for (int i = -10; i <= 10; ++i)
    for (int j = -10; j <= 10; ++j) {
      const double x = 0.3 * i, y = 0.3 * j;
      EXPECT_NEAR(g(x, y) / std::pow(1.0 + x * x + y * y, 1), motzkin()(x, y), 1e-6);
    }
}

// Fejér–Riesz

TEST(FejerRiesz, ConstantOne) {
  const auto o = certify_trig(trig({{0, 1.0}}, 0));
  ASSERT_TRUE(o.certified) << o.message;
  ASSERT_EQ(o.certificate->matrices[0].rows(), 1);
  EXPECT_NEAR(o.certificate->matrices[0](0, 0).real(), 1.0, 1e-7);
}

TEST(FejerRiesz, TwoPlusTwoCos) {
  // |1 + e^{i th}|^2; Q = [[1, 1], [1, 1]] is one representation
  const auto q = trig({{0, 2.0}, {1, 1.0}, {-1, 1.0}}, 1);
  const auto o = certify_trig(q);
  ASSERT_TRUE(o.certified) << o.message;
  const auto& m = o.certificate->matrices[0];
  EXPECT_NEAR((m(0, 0) + m(1, 1)).real(), 2.0, 1e-7);
  EXPECT_NEAR(m(1, 0).real(), 1.0, 1e-7);
  EXPECT_TRUE(verify_certificate(*o.certificate, q).ok);
  // the factorisation oracle itself
  Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(2, 2);
  Certificate c;
  c.kind = CertificateKind::fejer_riesz;
  c.matrices = {ones};
  EXPECT_TRUE(verify_certificate(c, q).ok);
}

TEST(FejerRiesz, CosineChangesSign) {
  EXPECT_FALSE(certify_trig(trig({{1, 0.5}, {-1, 0.5}}, 1)).certified);
}

TEST(FejerRiesz, ComplexCoefficientsGetHermitianQ) {
  // |1 + i e^{i th}|^2 = 2 + i e^{-i th} - i e^{i th}
  const auto q = trig({{0, 2.0}, {1, cplx(0.0, -1.0)}, {-1, cplx(0.0, 1.0)}}, 1);
  const auto o = certify_trig(q);
  ASSERT_TRUE(o.certified) << o.message;
  EXPECT_GT(std::abs(o.certificate->matrices[0](1, 0).imag()), 0.5);
  EXPECT_TRUE(verify_certificate(*o.certificate, q).ok);
}

TEST(FejerRiesz, RandomSquaresAreCertified) {
  for (int trial = 0; trial < 10; ++trial) {
    const int t = ts::uniform_int(0, 5);
    // q = sum_j |h_j(e^{i th})|^2 for random h_j of degree t
    TrigPoly q(t);
    for (int j = 0; j < 2; ++j) {
      std::vector<cplx> h(t + 1);
      for (auto& c : h) c = cplx(ts::uniform(), ts::uniform());
      for (int a = 0; a <= t; ++a)
        for (int b = 0; b <= t; ++b) q.add(a - b, h[a] * std::conj(h[b]));
    }
    const auto o = certify_trig(q);
    ASSERT_TRUE(o.certified) << o.message;
    EXPECT_TRUE(verify_certificate(*o.certificate, q).ok);
  }
}

// certify_pfr

TEST(CertifyPfr, SquaredNumberOperatorAtLevelZero) {
  HermBivarPoly p(4);
  p.set(2, 2, 1.0);
  const auto o = certify_pfr(p, 2);
  ASSERT_TRUE(o.certified) << o.message;
  EXPECT_EQ(o.certificate->level, 0);
  EXPECT_TRUE(verify_certificate(*o.certificate, p).ok);
}

TEST(CertifyPfr, RadialPolyaExponent) {
  // p = 1 - |a|^2 + |a|^4: q_0 = 1, q_2 = -1, q_4 = 1, independent of theta
  HermBivarPoly p(4);
  p.set(0, 0, 1.0);
  p.set(1, 1, -1.0);
  p.set(2, 2, 1.0);
  const int want = polya_exponent({1.0, 0.0, -1.0, 0.0, 1.0}, 40);
  ASSERT_EQ(want, 11);
  const auto o = certify_pfr(p, want + 1);
  ASSERT_TRUE(o.certified) << o.message;
  EXPECT_EQ(o.certificate->level, want);
  EXPECT_TRUE(verify_certificate(*o.certificate, p).ok);
}

TEST(CertifyPfr, MotzkinNeverCertifies) {
  // f_M vanishes at r = sqrt 2 on the diagonal, where no Pascal level can
  // make every radial coefficient nonnegative.
  const auto o = certify_pfr(quadrature_to_ladder(motzkin()), 6);
  EXPECT_FALSE(o.certified);
  ASSERT_EQ(o.attempts.size(), 7u);
  for (const auto& [b, st] : o.attempts) EXPECT_EQ(st, sdp::SolveStatus::optimal) << "level " << b;
}

TEST(CertifyPfr, RandomStrictlyPositivePolynomials) {
  for (int trial = 0; trial < 5; ++trial) {
    // (1 + |a|^2)^2 plus a small random perturbation of lower degree stays positive
    HermBivarPoly p(4);
    p.set(0, 0, 1.0);
    p.set(1, 1, 2.0);
    p.set(2, 2, 1.0);
    const auto e = ts::random_hermitian(3);
    for (const auto& [k, w] : e.terms())
      if (k.first <= k.second) p.add(k.first, k.second, 0.1 * w);
    const auto o = certify_pfr(p, 10);
    ASSERT_TRUE(o.certified) << o.message;
    EXPECT_TRUE(verify_certificate(*o.certificate, p).ok);
    EXPECT_GE(ts::grid_min(p, 4.0, 60, 60), 0.0);
  }
}

// certify_univariate and check_lines

TEST(CertifyUnivariate, Basics) {
  EXPECT_TRUE(certify_univariate(UnivariatePoly({0.0, 0.0, 1.0})).certified);
  EXPECT_FALSE(certify_univariate(UnivariatePoly({-1.0, 0.0, 1.0})).certified);
  const double s2 = std::sqrt(2.0);
  const UnivariatePoly f({1.0, 0.0, -s2, 0.0, 0.5});  // (1 - x^2/sqrt 2)^2
  const auto o = certify_univariate(f);
  ASSERT_TRUE(o.certified) << o.message;
  EXPECT_TRUE(verify_certificate(*o.certificate, f).ok);
}

TEST(CertifyUnivariate, MatchesGridSignOnRandomQuartics) {
  for (int trial = 0; trial < 20; ++trial) {
    const UnivariatePoly f({ts::uniform(), ts::uniform(), ts::uniform(), ts::uniform(), ts::uniform(0.1, 1.0)});
    double lo = 1e300;
    for (int i = 0; i <= 20000; ++i) lo = std::min(lo, f(-10.0 + 20.0 * i / 20000));
    if (std::abs(lo) < 1e-3) continue;
    EXPECT_EQ(certify_univariate(f).certified, lo > 0.0) << "grid min " << lo;
  }
}

TEST(CheckLines, NumberOperatorPassesEverywhere) {
  HermBivarPoly p(2);
  p.set(1, 1, 1.0);
  for (const auto& v : check_lines(p, uniform_angles(8))) EXPECT_TRUE(v.nonnegative);
}

TEST(CheckLines, DifferenceOfSquares) {
  const auto p = quadrature_to_ladder(RealBivarPoly{{{2, 0}, 1.0}, {{0, 2}, -1.0}});
  const auto v = check_lines(p, {0.0, kPi / 2});
  EXPECT_TRUE(v[0].nonnegative);
  EXPECT_FALSE(v[1].nonnegative);
  EXPECT_THROW(check_lines(p, {}), Error);
  EXPECT_THROW(check_lines(p, {kPi}), Error);
}

TEST(CheckLines, MotzkinPassesEveryLine) {
  for (const auto& v : check_lines(quadrature_to_ladder(motzkin()), uniform_angles(64)))
    EXPECT_TRUE(v.nonnegative) << "angle " << v.angle << ": " << v.outcome.message;
}

TEST(CheckLines, NeverPassesANegativeLine) {
  for (int trial = 0; trial < 10; ++trial) {
    auto p = ts::random_hermitian(4);
    p.add(2, 2, 1.0);
    for (const auto& v : check_lines(p, uniform_angles(4))) {
      if (!v.nonnegative) continue;
      const auto u = restrict_to_line(p, v.angle);
      for (int i = 0; i <= 100000; ++i) EXPECT_GE(u(-20.0 + 40.0 * i / 100000), -1e-6);
    }
  }
}

// verification and counting

TEST(Verify, RejectsPerturbedAndForeignCertificates) {
  const auto o = certify_reznick(motzkin(), 1);
  ASSERT_TRUE(o.certified);
  auto bad = *o.certificate;
  bad.matrices[0](0, 0) -= 1e-3;
  EXPECT_FALSE(verify_certificate(bad, motzkin()).ok);
  EXPECT_FALSE(verify_certificate(*o.certificate, robinson()).ok);
}

TEST(SizeLaws, ReznickMatchesBuiltProblem) {
  for (int deg : {2, 4, 6})
    for (int b = 0; b <= 4; ++b) {
      sdp::ConicProblem p;
      add_bivariate_sos_constraint(p, constant_affine(reznick_multiply(motzkin(), b)), (deg + 2 * b) / 2, "G");
      EXPECT_EQ(reznick_variable_count(deg, b), p.variable_count());
      const long d = (deg + 2 * b) / 2;
      EXPECT_EQ(reznick_gram_size(deg, b), static_cast<long>(binomial(d + 2, 2)));
    }
}

TEST(SizeLaws, PfrHalfDegreesFollowPascalSupport) {
  for (int m = 1; m <= 5; ++m) {
    HermBivarPoly p(m, SupportMode::box);
    for (int k = 0; k <= m; ++k)
      for (int l = k; l <= m; ++l) p.set(k, l, cplx(1.0 + k, k == l ? 0.0 : 0.5 * l));
    for (int b = 0; b <= 2 * m + 3; ++b) {
      const auto q = pascal_steps(polar_decompose(p), b);
      const auto t = pfr_spin_half_degrees(m, b);
      ASSERT_EQ(q.size(), t.size());
      for (std::size_t s = 0; s < q.size(); ++s) EXPECT_EQ(q[s].effective_half_degree(1e-12), t[s]) << m << " " << b;
      if (b >= 2 * m) EXPECT_EQ(pfr_spin_variable_count(m, b), pfr_spin_variable_count_closed(m, b));
    }
  }
}

TEST(SizeLaws, PfrGrowsLinearlyInLevel) {
  for (int m = 2; m <= 17; ++m) {
    const long step = pfr_spin_variable_count_closed(m, 2 * m + 1) - pfr_spin_variable_count_closed(m, 2 * m);
    EXPECT_EQ(step, static_cast<long>((m + 1) * (m + 2) / 2));
  }
}
