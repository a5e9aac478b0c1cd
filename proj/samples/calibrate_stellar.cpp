// Calibrates a CZZ gate on a three-dot stellar array whose two bonds have an
// irrational velocity ratio, then checks the schedule by exact simulation.

#include <cmath>
#include <cstdio>

#include "qdgates/qdgates.hpp"

int main() {
  using namespace qdgates;
  const double j = 1e-3;
  std::vector<Dot> dots{{0, 1.0, 0.0}, {1, 2.3, 0.0}, {2, 5.1, 0.0}};
  std::vector<Bond> bonds{Bond(0, 1, j, {1.0, 0.0}, {0.0, 0.0}),
                          Bond(0, 2, std::sqrt(2.0) * j, {1.0, 0.0}, {0.0, 0.0})};
  const DotArray array(dots, bonds);

  const PhaseVector czz = mqcp_gate({0, {{1, kPi}, {2, kPi}}}, array.size());
  const CalibrationTarget target = make_calibration_target(array, czz);

  const ClosestApproach miss = kspace_closest_approach(target, 20 * kPi / target.velocities[0]);
  std::printf("uncalibrated closest approach: %.4g (units of pi) at t = %.6g\n", miss.distance, miss.time);

  const IntervalSolution sol = solve_intervals(array, target);
  std::printf("schedule: %zu stages, total time %.6g, residual %.3g\n", sol.schedule.size(),
              sol.total_time, sol.residual);
  for (const Stage& s : sol.schedule.stages()) {
    std::printf("  evolve %.6g then pulse", s.tau);
    for (const PulseOp& p : s.pulses) std::printf(" %c%d", pauli_char(p.pauli), p.dot);
    std::printf("\n");
  }

  const PulsedVerification plain = verify_pulsed(array, sol.schedule, czz, 1e-2);
  const PulsedVerification dd = verify_pulsed(array, weave_dd(sol.schedule), czz, 1e-2);
  std::printf("exact simulation: residual %.3g rad (plain), %.3g rad (with XY4)\n",
              plain.equivalence.residual, dd.equivalence.residual);
  return plain.equivalence.equivalent && dd.equivalence.equivalent ? 0 : 1;
}
