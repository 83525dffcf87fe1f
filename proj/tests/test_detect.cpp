#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nonclass/catalog.hpp"
#include "nonclass/detect.hpp"
#include "support.hpp"

using namespace nonclass;
namespace ts = testing_support;

namespace {

MomentTable moments(const TruncatedState& s, int d) { return moments_from_fock(s.state, d); }

// Classical reference for comparisons across hierarchy levels.
Normalization thermal_reference(int d) { return Normalization::reference_state(thermal_state(1.0, 40).state, d); }

double coefficient_scale(const HermBivarPoly& w, double radius) {
  double s = 0.0;
  for (const auto& [e, c] : w.terms()) s = std::max(s, std::abs(c) * std::pow(radius, e.first + e.second));
  return s;
}

void expect_consistent(const DetectionResult& r, const MomentTable& t) {
  ASSERT_TRUE(r.optimal()) << r.message;
  EXPECT_NEAR(witness_expectation(r.witness, t), r.value, 1e-7);
  EXPECT_GE(ts::grid_min(r.witness, 5.0), -1e-6 * coefficient_scale(r.witness, 5.0));
}

// Mixtures of a random state with a thermal state, so both outcomes occur.
FockState random_light_state(int n_max) {
  const double t = ts::uniform(0.0, 1.0);
  return mix(t, FockState(ts::random_density(n_max + 1, ts::uniform_int(1, 3))),
             thermal_state(ts::uniform(0.2, 1.5), n_max, true).state);
}

std::vector<double> number_moments(const CMatrix& rho, int d) {
  std::vector<double> out(d + 1, 0.0);
  for (int n = 0; n < rho.rows(); ++n)
    for (int j = 0; j <= d; ++j) out[j] += rho(n, n).real() * std::pow(n, j);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Light

TEST(DetectLight, VacuumIsClassical) {
  const auto t = moments(fock_state(0, 4), 4);
  const auto r = detect_light(t, 4);
  expect_consistent(r, t);
  EXPECT_NEAR(r.value, 0.0, 1e-7);
  EXPECT_FALSE(r.detected());
}

TEST(DetectLight, SinglePhotonIsDetected) {
  const auto t = moments(fock_state(1, 4), 4);
  const auto r = detect_light(t, 4);
  expect_consistent(r, t);
  EXPECT_LT(r.value, -1e-3);
  EXPECT_EQ(r.normalization, "gram-trace");
  ASSERT_TRUE(r.certificate.has_value());
  EXPECT_TRUE(verify_certificate(*r.certificate, r.witness).ok);
}

TEST(DetectLight, NeedsEnoughMoments) {
  EXPECT_THROW(detect_light(moments(fock_state(1, 4), 2), 4), Error);
  LightOptions o;
  o.norm = Normalization::reference_moments(moments(fock_state(0, 2), 2));
  EXPECT_THROW(detect_light(moments(fock_state(1, 4), 4), 4, o), Error);
}

TEST(DetectLight, HiddenStateNeedsReznickLevelOne) {
  // the catalog state is rounded and slightly outside the hidden set; use the optimiser's state
  const auto h = construct_hidden_state(motzkin(), 10, 6);
  ASSERT_EQ(h.status, sdp::SolveStatus::optimal) << h.message;
  const auto t = moments_from_fock(h.state, 6);
  const auto r0 = detect_light(t, 6);
  ASSERT_TRUE(r0.optimal()) << r0.message;
  EXPECT_GE(r0.value, -1e-7);
  LightOptions o;
  o.method = Method::reznick(1);
  const auto r1 = detect_light(t, 6, o);
  expect_consistent(r1, t);
  EXPECT_LT(r1.value, 0.0);
}

TEST(DetectLight, RaysSandwichSinglePhoton) {
  const auto t = moments(fock_state(1, 4), 4);
  LightOptions o;
  o.norm = thermal_reference(4);
  const auto upper = detect_light(t, 4, o);
  const auto lower = detect_light_lower(t, 4, uniform_angles(32), o.norm);
  ASSERT_TRUE(upper.optimal() && lower.optimal());
  EXPECT_LE(lower.value, upper.value + 1e-7);
  EXPECT_LE(upper.value - lower.value, 1e-4);
  EXPECT_THROW(detect_light_lower(t, 4, {}), Error);
}

TEST(DetectLight, RaysOnVacuumGiveZero) {
  const auto r = detect_light_lower(moments(fock_state(0, 4), 4), 4, uniform_angles(16));
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.value, 0.0, 1e-7);
}

TEST(DetectLight, DualityWithMomentMatrix) {
  int detected = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = moments_from_fock(random_light_state(ts::uniform_int(2, 6)), 6);
    const auto mm = moment_matrix_test(t, 3);
    const auto r = detect_light(t, 6);
    ASSERT_TRUE(r.optimal()) << r.message;
    EXPECT_EQ(mm.detected, r.value < -1e-6) << "min eig " << mm.min_eigenvalue << " value " << r.value;
    detected += mm.detected;
  }
  EXPECT_GT(detected, 0);
}

TEST(DetectLight, HierarchyIsMonotone) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto t = moments_from_fock(random_light_state(ts::uniform_int(2, 5)), 4);
    double prev = std::numeric_limits<double>::infinity();
    for (int b = 0; b <= 2; ++b) {
      LightOptions o;
      o.method = Method::reznick(b);
      o.norm = thermal_reference(4);
      const auto r = detect_light(t, 4, o);
      expect_consistent(r, t);
      EXPECT_LE(r.value, prev + 1e-7);
      prev = r.value;
    }
    const auto lower = detect_light_lower(t, 4, uniform_angles(32), thermal_reference(4));
    ASSERT_TRUE(lower.optimal());
    EXPECT_LE(lower.value, prev + 1e-7);
  }
}

TEST(DetectLight, PfrLevelsOnSinglePhoton) {
  // the optimal witness touches zero on a circle, which only higher Polya levels approach
  const auto t = moments(fock_state(1, 4), 4);
  const auto lower = detect_light_lower(t, 4, uniform_angles(32), thermal_reference(4));
  ASSERT_TRUE(lower.optimal());
  double prev = std::numeric_limits<double>::infinity();
  for (int b : {0, 2, 6, 12}) {
    LightOptions o;
    o.method = Method::pfr(b);
    o.norm = thermal_reference(4);
    const auto r = detect_light(t, 4, o);
    expect_consistent(r, t);
    EXPECT_LE(r.value, prev + 1e-7);
    EXPECT_GE(r.value, lower.value - 1e-7);
    prev = r.value;
  }
  EXPECT_LT(prev, 0.0);
}

// ---------------------------------------------------------------------------
// Hidden states

TEST(HiddenState, MotzkinAtTenPhotons) {
  const auto h = construct_hidden_state(motzkin(), 10, 6);
  ASSERT_EQ(h.status, sdp::SolveStatus::optimal) << h.message;
  EXPECT_LT(h.value, -0.17);
  EXPECT_GE(h.moment_matrix_min_eig, -1e-8);
  EXPECT_GE(moment_matrix_test(moments_from_fock(h.state, 6), 3).min_eigenvalue, -1e-8);
  EXPECT_NEAR(witness_expectation(quadrature_to_ladder(motzkin()), moments_from_fock(h.state, 6)), h.value, 1e-9);
  // the optimiser does at least as well as the rounded two-state mixture in the catalog, up to its rounding
  EXPECT_LE(h.value, witness_expectation(quadrature_to_ladder(motzkin()), moments_from_fock(motzkin_hidden_state(), 6)) + 5e-4);
}

TEST(HiddenState, SmallCutoffIsClassicalOnMotzkin) {
  const auto h = construct_hidden_state(motzkin(), 3, 6);
  ASSERT_EQ(h.status, sdp::SolveStatus::optimal) << h.message;
  EXPECT_GE(h.value, -1e-7);
}

TEST(HiddenState, Robinson) {
  const auto h = construct_hidden_state(robinson(), 10, 6);
  ASSERT_EQ(h.status, sdp::SolveStatus::optimal) << h.message;
  EXPECT_LT(h.value, 0.0);
  EXPECT_GE(h.moment_matrix_min_eig, -1e-8);
}

TEST(HiddenState, Preconditions) {
  RealBivarPoly odd;
  odd.add(3, 0, 1.0);
  EXPECT_THROW(construct_hidden_state(odd, 4, 6), Error);
  EXPECT_THROW(construct_hidden_state(motzkin(), 4, 5), Error);
  EXPECT_THROW(construct_hidden_state(motzkin(), -1, 6), Error);
}

// ---------------------------------------------------------------------------
// Spin

TEST(DetectSpin, ProductStateIsClassical) {
  const auto r = detect_spin(dicke_basis_state(3, 0), Method::pfr(2));
  ASSERT_TRUE(r.optimal()) << r.message;
  EXPECT_GE(r.value, -1e-7);
  const auto lower = detect_spin_lower(dicke_basis_state(3, 0), uniform_angles(32));
  ASSERT_TRUE(lower.optimal());
  EXPECT_NEAR(lower.value, 0.0, 1e-7);
}

TEST(DetectSpin, GhzThreeQubits) {
  const auto s = ghz_state(3);
  const auto r = detect_spin(s, Method::pfr(2));
  ASSERT_TRUE(r.optimal()) << r.message;
  // the fidelity witness rescaled to trace 3 already reaches -3/2
  EXPECT_LE(r.value, -1.5 + 1e-6);
  ASSERT_TRUE(r.spin_witness.has_value());
  EXPECT_NEAR(r.spin_witness->trace().real(), 3.0, 1e-7);
  EXPECT_NEAR((*r.spin_witness * s.rho()).trace().real(), r.value, 1e-7);
  const auto full = detect_spin(s, Method::pfr(2), {}, false);
  ASSERT_TRUE(full.optimal());
  EXPECT_NEAR(full.value, r.value, 1e-6);
  const auto lower = detect_spin_lower(s, uniform_angles(64));
  ASSERT_TRUE(lower.optimal());
  EXPECT_LE(lower.value, r.value + 1e-7);
  EXPECT_LE(lower.value, -0.5);
}

TEST(DetectSpin, WitnessIsNonnegativeOnProductStates) {
  const auto r = detect_spin(ghz_state(4), Method::reznick(1));
  ASSERT_TRUE(r.optimal()) << r.message;
  const SpinObservable v(*r.spin_witness);
  double lo = v.pole_expectation();
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j)
      lo = std::min(lo, v.product_expectation(
                            std::polar(std::tan(0.5 * std::numbers::pi * (i + 0.5) / 100), 2.0 * std::numbers::pi * j / 100)));
  EXPECT_GE(lo, -1e-6);
}

TEST(DetectSpin, HierarchiesAreMonotone) {
  for (int trial = 0; trial < 10; ++trial) {
    const int m = ts::uniform_int(2, 4);
    const DickeState s(ts::random_density(m + 1, ts::uniform_int(1, 2)));
    double prev = std::numeric_limits<double>::infinity();
    for (int b = 0; b <= 2; ++b) {
      const auto r = detect_spin(s, Method::pfr(b));
      ASSERT_TRUE(r.optimal()) << r.message;
      EXPECT_LE(r.value, prev + 1e-6);
      prev = r.value;
    }
    const auto lower = detect_spin_lower(s, uniform_angles(64));
    ASSERT_TRUE(lower.optimal());
    EXPECT_LE(lower.value, prev + 1e-6);
    const auto rz = detect_spin(s, Method::reznick(1));
    ASSERT_TRUE(rz.optimal());
    EXPECT_LE(lower.value, rz.value + 1e-6);
  }
}

TEST(PhasePeriod, Examples) {
  EXPECT_EQ(phase_period(ghz_state(5).rho()), 5);
  EXPECT_EQ(phase_period(dicke_basis_state(3, 1).rho()), 0);
  EXPECT_EQ(phase_period(tura_state(1.0, 1, 8).rho()), 17);
  EXPECT_EQ(phase_period(ts::random_density(4)), 1);
}

// ---------------------------------------------------------------------------
// Restricted data

TEST(PhotonNumber, Examples) {
  // Poissonian <n> = 1, <n^2> = 2
  const auto coh = detect_photon_number({1.0, 1.0, 2.0}, 2);
  ASSERT_TRUE(coh.optimal()) << coh.message;
  EXPECT_GE(coh.value, -1e-7);
  const auto one = detect_photon_number({1.0, 1.0, 1.0}, 2);
  ASSERT_TRUE(one.optimal()) << one.message;
  EXPECT_LT(one.value, 0.0);
  const auto th = detect_photon_number(number_moments(thermal_state(0.7, 60).state.rho(), 4), 4);
  ASSERT_TRUE(th.optimal()) << th.message;
  EXPECT_GE(th.value, -1e-7);
  EXPECT_THROW(detect_photon_number({1.0, 1.0}, 2), Error);
}

TEST(PhotonNumber, MatchesDiagonalLightWitness) {
  for (int trial = 0; trial < 10; ++trial) {
    const int n_max = ts::uniform_int(2, 6);
    CMatrix rho = CMatrix::Zero(n_max + 1, n_max + 1);
    double total = 0.0;
    for (int n = 0; n <= n_max; ++n) total += (rho(n, n) = ts::uniform(0.0, 1.0)).real();
    rho /= total;
    const int d = ts::uniform_int(1, 3);
    const FockState s(rho);
    const auto norm = Normalization::reference_state(thermal_state(1.0, 40).state, 2 * d);
    const auto pn = detect_photon_number(number_moments(rho, d), d, norm);
    LightOptions o;
    o.diagonal_only = true;
    o.norm = norm;
    const auto dl = detect_light(moments_from_fock(s, 2 * d), 2 * d, o);
    ASSERT_TRUE(pn.optimal() && dl.optimal());
    EXPECT_NEAR(pn.value, dl.value, 1e-6);
  }
}

TEST(PhotonProbs, Examples) {
  const auto vac = detect_photon_probs({1.0, 0.0, 0.0});
  ASSERT_TRUE(vac.optimal());
  EXPECT_GE(vac.value, -1e-7);
  const auto one = detect_photon_probs({0.0, 1.0, 0.0});
  ASSERT_TRUE(one.optimal());
  EXPECT_NEAR(one.value, -std::sqrt(2.0), 1e-5);
  ASSERT_TRUE(one.certificate.has_value());
  std::vector<double> poisson;
  for (int n = 0; n <= 4; ++n) poisson.push_back(std::exp(-1.0) / factorial(n));
  const auto coh = detect_photon_probs(poisson);
  ASSERT_TRUE(coh.optimal());
  EXPECT_GE(coh.value, -1e-6);
  EXPECT_THROW(detect_photon_probs({}), Error);
  EXPECT_THROW(detect_photon_probs({-0.1, 1.0}), Error);
  EXPECT_THROW(detect_photon_probs({0.7, 0.7}), Error);
  EXPECT_THROW(detect_photon_probs({0.5, 0.5}, {1.0}), Error);
}

TEST(Quadrature, NormalOrdering) {
  // vacuum: <X^2> = 1/4, <X^4> = 3/16 -> all normal-ordered moments vanish
  const auto n = normal_ordered_from_plain({1.0, 0.0, 0.25, 0.0, 3.0 / 16});
  for (int l = 1; l <= 4; ++l) EXPECT_NEAR(n[l], 0.0, 1e-15);
}

TEST(Quadrature, Examples) {
  const auto vac = detect_quadrature({{1.0, 0.0, 0.0}, {}});
  ASSERT_TRUE(vac.optimal());
  EXPECT_GE(vac.value, -1e-7);
  const auto sq = detect_quadrature({normal_ordered_from_plain({1.0, 0.0, 0.15}), {}});
  ASSERT_TRUE(sq.optimal());
  EXPECT_LT(sq.value, 0.0);
  EXPECT_EQ(sq.method, "quadrature-x");
  EXPECT_THROW(detect_quadrature({}), Error);
  EXPECT_THROW(detect_quadrature({{0.5, 0.0, 0.0}, {}}), Error);
}

TEST(Quadrature, JointEqualsBestSingle) {
  const double r = 0.4;
  const auto t = moments(squeezed_vacuum(r, 30), 4);
  QuadratureData xp;
  for (int l = 0; l <= 4; ++l) {
    xp.x.push_back(quadrature_moment(t, l, 0));
    xp.p.push_back(quadrature_moment(t, 0, l));
  }
  const auto joint = detect_quadrature(xp), x = detect_quadrature({xp.x, {}}), p = detect_quadrature({{}, xp.p});
  ASSERT_TRUE(joint.optimal() && x.optimal() && p.optimal());
  EXPECT_LT(x.value, 0.0);
  EXPECT_NEAR(joint.value, std::min(x.value, p.value), 1e-6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rt = moments_from_fock(FockState(ts::random_density(ts::uniform_int(2, 5))), 4);
    QuadratureData d;
    for (int l = 0; l <= 4; ++l) {
      d.x.push_back(quadrature_moment(rt, l, 0));
      d.p.push_back(quadrature_moment(rt, 0, l));
    }
    const auto j = detect_quadrature(d), a = detect_quadrature({d.x, {}}), b = detect_quadrature({{}, d.p});
    ASSERT_TRUE(j.optimal() && a.optimal() && b.optimal());
    EXPECT_NEAR(j.value, std::min(a.value, b.value), 1e-6);
  }
}

// ---------------------------------------------------------------------------
// Quantification

TEST(Quantify, SinglePhoton) {
  const auto s = fock_state(1, 30).state;
  const auto rho0 = classical_reference(s);
  const auto q = quantify(s, rho0, 4);
  ASSERT_EQ(q.status, sdp::SolveStatus::optimal) << q.message;
  EXPECT_LT(q.v, 0.0);
  EXPECT_LT(q.s, 1.0);
  EXPECT_NEAR(q.v, 1.0 - 1.0 / q.s, 1e-4);
  // the mixture at t = s sits on the boundary
  const auto edge = detect_light(moments_from_fock(mix(q.s, s, rho0), 4), 4);
  ASSERT_TRUE(edge.optimal());
  EXPECT_NEAR(edge.value, 0.0, 1e-5);
}

TEST(Quantify, ClassicalState) {
  const auto s = fock_state(0, 30).state;
  const auto q = quantify(s, classical_reference(s), 4);
  ASSERT_EQ(q.status, sdp::SolveStatus::optimal) << q.message;
  EXPECT_NEAR(q.v, 0.0, 1e-6);
  EXPECT_GE(q.s, 1.0);
}

TEST(Quantify, CutoffMismatch) {
  EXPECT_THROW(quantify(fock_state(1, 4).state, fock_state(0, 5).state, 4), Error);
}
