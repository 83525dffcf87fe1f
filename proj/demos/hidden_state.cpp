// Builds a light state whose nonclassicality no degree-6 moment test sees,
// then shows the Motzkin witness and the Reznick level-1 search catching it.

#include <cstdio>
#include <cstdlib>

#include "nonclass/catalog.hpp"
#include "nonclass/detect.hpp"

int main(int argc, char** argv) {
  using namespace nonclass;
  const int n_max = argc > 1 ? std::atoi(argv[1]) : 10;

  const HiddenState h = construct_hidden_state(motzkin(), n_max, 6);
  if (h.status != sdp::SolveStatus::optimal) {
    std::printf("solver failed: %s\n", h.message.c_str());
    return 1;
  }
  std::printf("n_max = %d\n", n_max);
  std::printf("<W_M> on the optimal state:    %.7f\n", h.value);
  std::printf("M6 minimum eigenvalue:         %.2e\n", h.moment_matrix_min_eig);

  std::printf("photon-number distribution:\n");
  for (int n = 0; n <= n_max; ++n) std::printf("  p(%2d) = %.6f\n", n, h.state.rho()(n, n).real());

  const MomentTable t = moments_from_fock(h.state, 6);
  LightOptions o;
  const auto r0 = detect_light(t, 6, o);
  o.method = Method::reznick(1);
  const auto r1 = detect_light(t, 6, o);
  std::printf("detect_light D=6, reznick(0):  %.3e (%s)\n", r0.value, r0.detected() ? "detected" : "not detected");
  std::printf("detect_light D=6, reznick(1):  %.3e (%s)\n", r1.value, r1.detected() ? "detected" : "not detected");
  return 0;
}
