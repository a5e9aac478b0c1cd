#pragma once

#include <cmath>

#include "qdgates/calibration.hpp"
#include "qdgates/gate_algebra.hpp"
#include "qdgates/pulse.hpp"
#include "qdgates/simulator.hpp"

namespace qdgates {

struct PulsedVerification {
  PhaseVector phases;        // diagonal of Q^dagger U with pulse phases removed
  double off_diagonal = 0.0;
  Equivalence equivalence;
  double fidelity = 0.0;     // of Q^dagger U against the stripped target
};

// Exact pulsed simulation compared with `gate` up to a free phase, after
// undoing the net Pauli frame and the Zeeman phases the pulses leave behind.
inline PulsedVerification verify_pulsed(const DotArray& array, const PulseSchedule& schedule,
                                        const PhaseVector& gate, double tol) {
  const ExtraPhases extra = extra_local_phases(schedule, array);
  const ComplexMatrix u = pauli_matrix(extra.net).adjoint() * pulsed_evolution(array, schedule);
  PulsedVerification out;
  out.phases = diagonal_phases(u) - extra.free.expand();
  for (Eigen::Index r = 0; r < u.rows(); ++r)
    for (Eigen::Index c = 0; c < u.cols(); ++c)
      if (r != c) out.off_diagonal = std::max(out.off_diagonal, std::abs(u(r, c)));
  out.equivalence = equiv_up_to_free_phase(out.phases, gate, tol);
  out.fidelity = average_gate_fidelity(
      u, gate + out.equivalence.shift.expand() + extra.free.expand());
  return out;
}

}  // namespace qdgates
