// The Motzkin polynomial is nonnegative but not a sum of squares. Multiplying
// by (1 + x^2 + y^2) fixes that; this demo finds and checks the certificate.

#include <cstdio>

#include "nonclass/catalog.hpp"
#include "nonclass/certify.hpp"

int main() {
  using namespace nonclass;
  const RealBivarPoly f = motzkin();

  const auto plain = certify_sos(f);
  std::printf("sum of squares:       %s\n", plain.certified ? "yes" : "no");

  const auto out = certify_reznick(f, 3);
  if (!out.certified) {
    std::printf("no certificate up to b = 3: %s\n", out.message.c_str());
    return 1;
  }
  const Certificate& c = *out.certificate;
  const auto rep = verify_certificate(c, f);
  std::printf("Reznick certificate:  b = %d, Gram matrix %ldx%ld\n", c.level, static_cast<long>(c.matrices[0].rows()),
              static_cast<long>(c.matrices[0].cols()));
  std::printf("verification:         %s (residual %.2e, min eigenvalue %.2e)\n", rep.ok ? "ok" : "failed", rep.residual,
              rep.min_eigenvalue);

  // a necessary condition, solver free: nonnegativity along lines through 0
  const auto lines = check_lines(quadrature_to_ladder(f), uniform_angles(8));
  int ok = 0;
  for (const auto& l : lines) ok += l.nonnegative;
  std::printf("nonnegative on %d of %zu lines through the origin\n", ok, lines.size());
  return rep.ok ? 0 : 1;
}
