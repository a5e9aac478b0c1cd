#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdgates/core_model.hpp"
#include "qdgates/errors.hpp"
#include "qdgates/phase.hpp"

namespace qdgates {

// Rows indexed by the target bitstring a (qubit 1 most significant), columns
// act on (phi_c, phi_1, ..., phi_{N-1}).
inline Eigen::MatrixXi parity_matrix(int n_qubits) {
  check_qubit_count(n_qubits, 2);
  const int m = n_qubits - 1;
  const std::size_t rows = std::size_t{1} << m;
  Eigen::MatrixXi l(static_cast<Eigen::Index>(rows), n_qubits);
  for (std::size_t a = 0; a < rows; ++a) {
    auto r = static_cast<Eigen::Index>(a);
    l(r, 0) = -1;
    for (int j = 1; j < n_qubits; ++j) l(r, j) = bit_of(a, j - 1, m) ? -1 : 1;
  }
  return l;
}

// theta(a) = Theta(1, a) - Theta(0, ~a), the part of a gate that local phases
// must absorb.
inline std::vector<double> reduced_gate_vector(const PhaseVector& gate) {
  const int n = gate.n_qubits();
  check_qubit_count(n, 2);
  const std::size_t half = gate.size() / 2;
  std::vector<double> out(half);
  for (std::size_t a = 0; a < half; ++a)
    out[a] = wrap_2pi(gate[half | a] - gate[(~a) & (half - 1)]);
  return out;
}

struct ParitySolution {
  bool feasible = false;
  FreePhase free;
  double residual = 0.0;
};

inline double parity_row_residual(std::span<const double> theta_g, int n_qubits,
                                  const std::vector<double>& local) {
  const int m = n_qubits - 1;
  double worst = 0.0;
  for (std::size_t a = 0; a < theta_g.size(); ++a) {
    double lhs = -local[0];
    for (int j = 1; j < n_qubits; ++j)
      lhs += bit_of(a, j - 1, m) ? -local[static_cast<std::size_t>(j)]
                                 : local[static_cast<std::size_t>(j)];
    worst = std::max(worst, lattice_distance(lhs - theta_g[a], kTwoPi));
  }
  return worst;
}

inline ParitySolution solve_parity(std::span<const double> theta_g, int n_qubits,
                                   double tol = kPhaseTol) {
  check_qubit_count(n_qubits, 2);
  const int m = n_qubits - 1;
  if (theta_g.size() != (std::size_t{1} << m))
    throw InvalidArgument("reduced gate vector must have 2^(N-1) entries");
  std::vector<double> local(static_cast<std::size_t>(n_qubits), 0.0);
  double sum = 0.0;
  for (int j = 1; j < n_qubits; ++j) {
    double diff = wrap_signed(theta_g[0] - theta_g[qubit_mask(j - 1, m)]);
    local[static_cast<std::size_t>(j)] = wrap_pi(0.5 * diff);
    sum += local[static_cast<std::size_t>(j)];
  }
  local[0] = wrap_2pi(sum - theta_g[0]);
  double residual = parity_row_residual(theta_g, n_qubits, local);
  if (residual > tol && std::abs(residual - kPi) <= tol) {
    std::vector<double> shifted = local;
    shifted[0] = wrap_2pi(shifted[0] + kPi);
    double r = parity_row_residual(theta_g, n_qubits, shifted);
    if (r < residual) {
      local = shifted;
      residual = r;
    }
  }
  ParitySolution out;
  out.residual = residual;
  out.feasible = residual <= tol;
  if (out.feasible) out.free = FreePhase{0.0, std::move(local)};
  return out;
}

struct TargetPhase {
  int dot = 0;
  double theta = 0.0;
};

// One control applying independent conditional phases to several targets.
struct MqcpFactor {
  int control = 0;
  std::vector<TargetPhase> targets;

  void validate(int n_qubits) const {
    if (control < 0 || control >= n_qubits)
      throw InvalidArgument("control dot " + std::to_string(control) + " out of range");
    for (std::size_t a = 0; a < targets.size(); ++a) {
      const TargetPhase& t = targets[a];
      if (t.dot < 0 || t.dot >= n_qubits)
        throw InvalidArgument("target dot " + std::to_string(t.dot) + " out of range");
      if (t.dot == control) throw InvalidArgument("target equals control");
      if (!std::isfinite(t.theta)) throw InvalidArgument("non-finite target phase");
      for (std::size_t b = 0; b < a; ++b)
        if (targets[b].dot == t.dot)
          throw InvalidArgument("repeated target dot " + std::to_string(t.dot));
    }
  }
};

inline PhaseVector mqcp_gate(const MqcpFactor& factor, int n_qubits) {
  factor.validate(n_qubits);
  std::vector<double> v(std::size_t{1} << n_qubits, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!bit_of(i, factor.control, n_qubits)) continue;
    for (const TargetPhase& t : factor.targets)
      if (bit_of(i, t.dot, n_qubits)) v[i] += t.theta;
  }
  return PhaseVector(std::move(v));
}

inline FreePhase mqcp_phase_solution(const MqcpFactor& factor, int n_qubits) {
  factor.validate(n_qubits);
  FreePhase out = FreePhase::zero(n_qubits);
  double sum = 0.0;
  for (const TargetPhase& t : factor.targets) {
    double phi = wrap_pi(-0.5 * t.theta);
    out.local[static_cast<std::size_t>(t.dot)] = phi;
    sum += phi;
  }
  out.local[static_cast<std::size_t>(factor.control)] = wrap_2pi(sum);
  return out;
}

struct GateSpec {
  std::vector<MqcpFactor> factors;
  std::optional<PhaseVector> raw;

  PhaseVector expand(int n_qubits) const {
    if (raw) {
      if (raw->n_qubits() != n_qubits)
        throw InvalidArgument("raw gate has " + std::to_string(raw->n_qubits()) +
                              " qubits, array has " + std::to_string(n_qubits));
      return *raw;
    }
    PhaseVector total = PhaseVector::zeros(n_qubits);
    for (const MqcpFactor& f : factors) total = total + mqcp_gate(f, n_qubits);
    return total;
  }
};

struct ControlAnalysis {
  bool second_control = false;
  int qubit = -1;           // full-register index of the second control
  bool degenerate = false;  // remaining phases constant: a plain CZ with qubit 0
};

inline ControlAnalysis assert_single_control(std::span<const double> theta_g,
                                             double tol = kPhaseTol) {
  const int m = log2_exact(theta_g.size());
  ControlAnalysis out;
  bool all_zero = std::all_of(theta_g.begin(), theta_g.end(), [&](double x) {
    return lattice_distance(x, kTwoPi) <= tol;
  });
  if (all_zero || m == 0) return out;
  for (int k = 0; k < m; ++k) {
    bool silent = true;
    for (std::size_t a = 0; a < theta_g.size() && silent; ++a)
      if (!bit_of(a, k, m) && lattice_distance(theta_g[a], kTwoPi) > tol) silent = false;
    if (!silent) continue;
    out.second_control = true;
    out.qubit = k + 1;
    std::optional<double> first;
    out.degenerate = true;
    for (std::size_t a = 0; a < theta_g.size(); ++a) {
      if (!bit_of(a, k, m)) continue;
      if (!first) first = theta_g[a];
      else if (phase_distance(theta_g[a], *first) > tol) out.degenerate = false;
    }
    return out;
  }
  return out;
}

struct PairCoefficient {
  int j = 0, k = 0;
  double theta = 0.0;
};

// Expresses the gate as Theta(0) + sum_j l_j b_j + sum_{j<k} theta_jk b_j b_k
// and returns the nonzero pair coefficients; throws if that form does not
// reproduce the gate (higher-order phase polynomial).
inline std::vector<PairCoefficient> pair_coefficients(const PhaseVector& gate,
                                                      double tol = kPhaseTol) {
  const int n = gate.n_qubits();
  std::vector<double> lin(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) lin[static_cast<std::size_t>(j)] = gate[qubit_mask(j, n)] - gate[0];
  std::vector<PairCoefficient> pairs;
  std::vector<std::vector<double>> quad(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      double th = gate[qubit_mask(j, n) | qubit_mask(k, n)] - gate[qubit_mask(j, n)] -
                  gate[qubit_mask(k, n)] + gate[0];
      quad[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = th;
      if (lattice_distance(th, kTwoPi) > tol) pairs.push_back({j, k, wrap_2pi(th)});
    }
  for (std::size_t i = 0; i < gate.size(); ++i) {
    double v = gate[0];
    for (int j = 0; j < n; ++j) {
      if (!bit_of(i, j, n)) continue;
      v += lin[static_cast<std::size_t>(j)];
      for (int k = j + 1; k < n; ++k)
        if (bit_of(i, k, n)) v += quad[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    }
    if (phase_distance(v, gate[i]) > tol)
      throw InvalidArgument("gate has phase terms beyond pairwise order; it is not intrinsic");
  }
  return pairs;
}

// Per-bond targets phi_w = -theta_w / 2 (mod pi) for the array's bonds.
inline std::vector<double> bond_phase_targets(const DotArray& array, const PhaseVector& gate,
                                              double tol = kPhaseTol) {
  if (gate.n_qubits() != array.size())
    throw InvalidArgument("gate and array qubit counts differ");
  std::vector<double> out(array.bonds().size(), 0.0);
  for (const PairCoefficient& p : pair_coefficients(gate, tol)) {
    auto w = array.bond_index(p.j, p.k);
    if (!w)
      throw InvalidArgument("gate couples dots " + std::to_string(p.j) + " and " +
                            std::to_string(p.k) + ", which share no bond");
    out[*w] = wrap_pi(-0.5 * p.theta);
  }
  return out;
}

enum class LatticeBranch {
  ModPi,     // tau * Delta_w = phi_w (mod pi)
  ModTwoPi,  // tau * Delta_w = 2 phi_w (mod 2 pi), the k + 1/2 lattice
};

struct DynamicsCandidate {
  double tau = 0.0;
  double max_residual = 0.0;
  std::vector<double> residuals;
};

struct DynamicsOptions {
  double tol = kPhaseTol;
  std::size_t max_lattice_points = 2'000'000;
};

struct LatticeScan {
  std::vector<DynamicsCandidate> frontier;  // increasing tau, decreasing residual
  bool truncated = false;
  double horizon = 0.0;

  bool exact(double tol = kPhaseTol) const {
    return !frontier.empty() && frontier.back().max_residual <= tol;
  }
};

inline bool zero_velocity(double velocity, double scale) {
  return std::abs(velocity) <= 1e-12 * std::max(scale, 1e-300);
}

// Scans the union of per-bond solution lattices tau = (g_w + m P) / v_w for
// tau in [0, tau_max]. Bonds with v_w = 0 must already satisfy g_w = 0 mod P.
inline LatticeScan scan_lattice(std::span<const double> velocities, std::span<const double> goals,
                                double period, double tau_max, const DynamicsOptions& opts = {}) {
  if (velocities.size() != goals.size())
    throw InvalidArgument("one target per bond required");
  if (!(tau_max >= 0.0) || !std::isfinite(tau_max))
    throw InvalidArgument("tau_max must be finite and >= 0");
  LatticeScan scan;
  std::vector<std::size_t> moving;
  for (std::size_t w = 0; w < velocities.size(); ++w)
    if (velocities[w] != 0.0) moving.push_back(w);

  auto evaluate = [&](double tau) {
    DynamicsCandidate c{tau, 0.0, std::vector<double>(goals.size(), 0.0)};
    for (std::size_t w = 0; w < goals.size(); ++w) {
      c.residuals[w] = lattice_distance(tau * velocities[w] - goals[w], period);
      c.max_residual = std::max(c.max_residual, c.residuals[w]);
    }
    return c;
  };

  // Lattice density: points per unit time summed over bonds.
  double density = 0.0;
  for (std::size_t w : moving) density += std::abs(velocities[w]) / period;
  double horizon = tau_max;
  if (density * horizon > static_cast<double>(opts.max_lattice_points)) {
    horizon = static_cast<double>(opts.max_lattice_points) / density;
    scan.truncated = true;
  }
  scan.horizon = horizon;

  std::vector<double> taus{0.0};
  for (std::size_t w : moving) {
    const double v = velocities[w], g = goals[w];
    double lo, hi;
    if (v > 0) {
      lo = std::ceil(-g / period);
      hi = std::floor((horizon * v - g) / period);
    } else {
      lo = std::ceil((horizon * v - g) / period);
      hi = std::floor(-g / period);
    }
    for (double m = lo; m <= hi; m += 1.0) {
      double tau = (g + m * period) / v;
      if (tau >= 0.0 && tau <= horizon) taus.push_back(tau);
    }
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  double best = std::numeric_limits<double>::infinity();
  for (double tau : taus) {
    DynamicsCandidate c = evaluate(tau);
    if (c.max_residual < best) {
      best = c.max_residual;
      scan.frontier.push_back(std::move(c));
      if (best <= opts.tol) break;
    }
  }
  return scan;
}

struct DynamicsResult {
  LatticeScan mod_pi;
  LatticeScan mod_two_pi;

  const LatticeScan& branch(LatticeBranch b) const {
    return b == LatticeBranch::ModPi ? mod_pi : mod_two_pi;
  }
};

inline DynamicsResult solve_dynamics(const DotArray& array, std::span<const double> bond_targets,
                                     double tau_max, const DynamicsOptions& opts = {}) {
  const auto& bonds = array.bonds();
  if (bond_targets.size() != bonds.size())
    throw InvalidArgument("expected one target phase per bond");
  std::vector<double> vel(bonds.size()), goal_pi(bonds.size()), goal_2pi(bonds.size());
  for (std::size_t w = 0; w < bonds.size(); ++w) {
    double v = bonds[w].velocity();
    if (zero_velocity(v, bonds[w].exchange())) {
      if (lattice_distance(bond_targets[w], kPi) > opts.tol)
        throw NoBondVelocity(w, "bond " + std::to_string(w) +
                                    " has zero velocity but a nonzero target phase");
      v = 0.0;
    }
    vel[w] = v;
    goal_pi[w] = wrap_pi(bond_targets[w]);
    goal_2pi[w] = wrap_2pi(2.0 * bond_targets[w]);
  }
  return {scan_lattice(vel, goal_pi, kPi, tau_max, opts),
          scan_lattice(vel, goal_2pi, kTwoPi, tau_max, opts)};
}

inline DynamicsResult solve_dynamics(const DotArray& array, const PhaseVector& gate,
                                     double tau_max, const DynamicsOptions& opts = {}) {
  auto targets = bond_phase_targets(array, gate, opts.tol);
  return solve_dynamics(array, targets, tau_max, opts);
}

struct Decomposition {
  GateSpec factors;
  FreePhase corrections;
};

// Per-bond controlled phases plus the free phase that together give tau * Lambda.
inline Decomposition decompose_intrinsic(const DotArray& array, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be >= 0");
  std::vector<Bond> bonds = array.bonds();
  std::sort(bonds.begin(), bonds.end(), [](const Bond& a, const Bond& b) {
    return a.j() != b.j() ? a.j() < b.j() : a.k() < b.k();
  });
  Decomposition out;
  std::vector<double> local(static_cast<std::size_t>(array.size()), 0.0);
  double global = 0.0;
  for (const Bond& b : bonds) {
    const double phase = tau * b.velocity();
    out.factors.factors.push_back({b.j(), {{b.k(), wrap_2pi(-2.0 * phase)}}});
    local[static_cast<std::size_t>(b.j())] += phase;
    local[static_cast<std::size_t>(b.k())] += phase;
    global += tau * b.spin_flipped();
  }
  out.corrections.global = wrap_2pi(global);
  for (double& v : local) v = wrap_2pi(v);
  out.corrections.local = std::move(local);
  return out;
}

struct Equivalence {
  bool equivalent = false;
  FreePhase shift;
  double residual = 0.0;
};

// Finds F with u = target + F (mod 2 pi), reading F off index 0 and the
// single-bit indices and verifying every entry.
inline Equivalence equiv_up_to_free_phase(const PhaseVector& u, const PhaseVector& target,
                                          double tol = kPhaseTol) {
  if (u.size() != target.size()) throw InvalidArgument("phase vectors differ in length");
  const int n = u.n_qubits();
  auto diff = [&](std::size_t i) { return u[i] - target[i]; };
  Equivalence out;
  out.shift.global = wrap_2pi(diff(0));
  out.shift.local.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    out.shift.local[static_cast<std::size_t>(j)] = wrap_2pi(diff(qubit_mask(j, n)) - diff(0));
  const std::vector<double> f = out.shift.raw();
  for (std::size_t i = 0; i < u.size(); ++i)
    out.residual = std::max(out.residual, phase_distance(diff(i), f[i]));
  out.equivalent = out.residual <= tol;
  return out;
}

}  // namespace qdgates
