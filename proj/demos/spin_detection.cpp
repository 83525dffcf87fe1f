// Detects entanglement in a 17-qubit symmetric state with the Polya
// hierarchy, brackets it with the rays lower bound, and maps the GHZ
// fidelity witness to a light witness.

#include <cstdio>

#include "nonclass/catalog.hpp"
#include "nonclass/detect.hpp"
#include "nonclass/spinmap.hpp"

int main() {
  using namespace nonclass;
  const DickeState s = tura_state(1.0, 1, 8);
  std::printf("17-qubit state, phase period %d\n", phase_period(s.rho()));

  const auto lower = detect_spin_lower(s, uniform_angles(128));
  std::printf("  rays(128) lower bound: %.7f\n", lower.value);
  for (int b : {10, 20, 30, 40}) {
    const auto r = detect_spin(s, Method::pfr(b));
    std::printf("  pfr(%2d):              %.7f %s\n", b, r.value, r.detected() ? "detected" : "");
  }

  const HermBivarPoly w = spin_to_light_witness(ghz_witness(3));
  std::printf("GHZ witness, m = 3, as a light witness:\n");
  for (const auto& [e, c] : w.terms())
    if (e.first <= e.second) std::printf("  a^dag^%d a^%d : %+.3f\n", e.first, e.second, c.real());
  return 0;
}
