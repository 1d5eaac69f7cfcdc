// Ground Gaussian of the vortex-plus-uniform-field Hamiltonian and the lowest
// transverse levels.

#include <cstdio>

#include "vortexpin/quantum_engine.hpp"

using namespace vortexpin;

int main() {
  const double mu = 0.1, nu = 0.12;
  const GaussianState g = gaussian_params(mu, nu);
  const ModeData md = mode_data(mu, nu);
  std::printf("q_x = %.6f  q_y = %.6f  q = %.6f\n", g.q_x, g.q_y, g.q);
  std::printf("|a psi0| / |psi0| on 256^2: %.2e\n", annihilation_residual(g, md).grid_residual);
  std::printf("\n n+  n-  spin   E_perp\n");
  for (int np = 0; np <= 1; ++np)
    for (int nm = 0; nm <= 1; ++nm)
      for (int spin : {1, -1})
        std::printf("%3d %3d %5d  %9.6f\n", np, nm, spin, transverse_energy({np, nm, spin, 0.0}, md));
  return 0;
}
