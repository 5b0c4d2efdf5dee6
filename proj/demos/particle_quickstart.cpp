// Minimal example: solve the doubled point-mass problem and print the
// trajectory against the closed form, once with the naive operators and once
// with the affine-regularized ones.

#include <cstdio>

#include "sbpact/particle.hpp"

int main() {
  sbpact::ParticleConfig cfg;
  cfg.g = 0.0;
  cfg.v_init = 1.0;  // free motion: the naive discretization goes badly wrong
  cfg.n_t = 16;

  for (bool regularized : {false, true}) {
    cfg.regularized = regularized;
    const sbpact::DoubledTrajectory tr = sbpact::solve_particle(cfg);
    std::printf("%s operators (converged=%d, %d iterations)\n",
                regularized ? "regularized" : "naive", tr.report.converged ? 1 : 0,
                tr.report.iterations);
    std::printf("%10s %12s %12s\n", "t", "x1", "exact");
    for (int i = 0; i < cfg.n_t; i += 3)
      std::printf("%10.4f %12.6f %12.6f\n", tr.times(i), tr.x1(i),
                  sbpact::analytic_particle(cfg, tr.times(i)));
    std::printf("\n");
  }
  return 0;
}
