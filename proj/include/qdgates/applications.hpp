#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qdgates/errors.hpp"
#include "qdgates/gate_algebra.hpp"
#include "qdgates/phase.hpp"

namespace qdgates {

using StateVector = Eigen::VectorXcd;

enum class Basis { Z, X };

struct HadamardOp {
  int dot = 0;
};
struct DiagonalOp {
  PhaseVector phases;
  std::string label;
};
// Outcome +1 for spin up (Z) or |+> (X), -1 otherwise.
struct MeasureOp {
  int dot = 0;
  Basis basis = Basis::Z;
};
// Returns the dot to spin up; draws an unrecorded Z outcome.
struct ResetOp {
  int dot = 0;
};

using Operation = std::variant<HadamardOp, DiagonalOp, MeasureOp, ResetOp>;

struct Circuit {
  int n_qubits = 0;
  std::vector<Operation> ops;

  std::size_t entangling_gates() const {
    std::size_t c = 0;
    for (const Operation& op : ops) c += std::holds_alternative<DiagonalOp>(op);
    return c;
  }
};

inline void apply_hadamard(StateVector& psi, int q, int n) {
  const std::size_t mask = qubit_mask(q, n);
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i) {
    if (i & mask) continue;
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(i | mask);
    const Complex x = psi(a), y = psi(b);
    psi(a) = r * (x + y);
    psi(b) = r * (x - y);
  }
}

inline void apply_phases(StateVector& psi, const PhaseVector& phases) {
  if (static_cast<std::size_t>(psi.size()) != phases.size())
    throw InvalidArgument("diagonal gate size differs from state size");
  for (std::size_t i = 0; i < phases.size(); ++i)
    psi(static_cast<Eigen::Index>(i)) *= std::polar(1.0, phases[i]);
}

inline void apply_bit_flip(StateVector& psi, int q, int n) {
  const std::size_t mask = qubit_mask(q, n);
  for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i)
    if (!(i & mask)) std::swap(psi(static_cast<Eigen::Index>(i)), psi(static_cast<Eigen::Index>(i | mask)));
}

// Probability of bit value 0 on qubit q.
inline double probability_up(const StateVector& psi, int q, int n) {
  const std::size_t mask = qubit_mask(q, n);
  double p = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i)
    if (!(i & mask)) p += std::norm(psi(static_cast<Eigen::Index>(i)));
  return p;
}

inline void project_bit(StateVector& psi, int q, int n, int bit) {
  const std::size_t mask = qubit_mask(q, n);
  for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i)
    if (((i & mask) != 0) != (bit == 1)) psi(static_cast<Eigen::Index>(i)) = 0.0;
  const double norm = psi.norm();
  if (norm == 0.0) throw InvalidArgument("projection onto a zero-probability outcome");
  psi /= norm;
}

// Portable uniform draw in [0, 1) from a 64-bit engine.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline StateVector random_state(int n_qubits, std::mt19937_64& rng) {
  StateVector psi(static_cast<Eigen::Index>(std::size_t{1} << n_qubits));
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    // Box-Muller pairs give Haar-random amplitudes after normalization.
    const double u1 = 1.0 - uniform01(rng), u2 = uniform01(rng);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    psi(i) = Complex(rad * std::cos(kTwoPi * u2), rad * std::sin(kTwoPi * u2));
  }
  return psi / psi.norm();
}

inline StateVector basis_state(int n_qubits, std::size_t index) {
  StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n_qubits));
  psi(static_cast<Eigen::Index>(index)) = 1.0;
  return psi;
}

struct RunResult {
  StateVector state;
  std::vector<int> outcomes;
};

namespace detail {

// Measurement outcome bit forced by `bit`, or drawn from rng when bit < 0.
inline int measure(StateVector& psi, const MeasureOp& m, int n, int bit, std::mt19937_64* rng,
                   double* probability) {
  if (m.basis == Basis::X) apply_hadamard(psi, m.dot, n);
  const double p0 = probability_up(psi, m.dot, n);
  if (bit < 0) {
    if (rng == nullptr) throw InvalidArgument("sampling a measurement needs a generator");
    bit = uniform01(*rng) < p0 ? 0 : 1;
  }
  if (probability) *probability = bit == 0 ? p0 : 1.0 - p0;
  project_bit(psi, m.dot, n, bit);
  if (m.basis == Basis::X) apply_hadamard(psi, m.dot, n);
  return bit;
}

}  // namespace detail

inline void check_state(const Circuit& c, const StateVector& psi) {
  if (static_cast<std::size_t>(psi.size()) != (std::size_t{1} << c.n_qubits))
    throw InvalidArgument("state size does not match circuit width");
}

inline RunResult run_circuit(const Circuit& circuit, StateVector psi, std::mt19937_64& rng) {
  check_state(circuit, psi);
  const int n = circuit.n_qubits;
  RunResult out;
  for (const Operation& op : circuit.ops) {
    if (auto* h = std::get_if<HadamardOp>(&op)) {
      apply_hadamard(psi, h->dot, n);
    } else if (auto* d = std::get_if<DiagonalOp>(&op)) {
      apply_phases(psi, d->phases);
    } else if (auto* m = std::get_if<MeasureOp>(&op)) {
      const int bit = detail::measure(psi, *m, n, -1, &rng, nullptr);
      out.outcomes.push_back(bit == 0 ? 1 : -1);
    } else if (auto* r = std::get_if<ResetOp>(&op)) {
      const int bit = detail::measure(psi, {r->dot, Basis::Z}, n, -1, &rng, nullptr);
      if (bit == 1) apply_bit_flip(psi, r->dot, n);
    }
  }
  out.state = std::move(psi);
  return out;
}

struct Branch {
  std::vector<int> outcomes;
  double probability = 1.0;
  StateVector state;
};

// Follows every measurement outcome with nonzero probability.
inline std::vector<Branch> enumerate_branches(const Circuit& circuit, const StateVector& initial,
                                              double min_probability = 1e-12) {
  check_state(circuit, initial);
  const int n = circuit.n_qubits;
  std::vector<Branch> live{{{}, 1.0, initial}};
  for (const Operation& op : circuit.ops) {
    std::vector<Branch> next;
    for (Branch& b : live) {
      if (auto* h = std::get_if<HadamardOp>(&op)) {
        apply_hadamard(b.state, h->dot, n);
        next.push_back(std::move(b));
      } else if (auto* d = std::get_if<DiagonalOp>(&op)) {
        apply_phases(b.state, d->phases);
        next.push_back(std::move(b));
      } else {
        const bool reset = std::holds_alternative<ResetOp>(op);
        const MeasureOp m = reset ? MeasureOp{std::get<ResetOp>(op).dot, Basis::Z}
                                  : std::get<MeasureOp>(op);
        for (int bit = 0; bit < 2; ++bit) {
          Branch child = b;
          StateVector probe = child.state;
          if (m.basis == Basis::X) apply_hadamard(probe, m.dot, n);
          const double p0 = probability_up(probe, m.dot, n);
          const double p = bit == 0 ? p0 : 1.0 - p0;
          if (p < min_probability) continue;
          detail::measure(child.state, m, n, bit, nullptr, nullptr);
          child.probability *= p;
          if (reset) {
            if (bit == 1) apply_bit_flip(child.state, m.dot, n);
          } else {
            child.outcomes.push_back(bit == 0 ? 1 : -1);
          }
          next.push_back(std::move(child));
        }
      }
    }
    live = std::move(next);
  }
  return live;
}

// Expectation-free eigen check: returns ||P psi - lambda psi|| for a product
// of Z (basis Z) or X (basis X) on the listed dots.
inline double stabilizer_deviation(const StateVector& psi, const std::vector<int>& dots, Basis basis,
                                   int n, int eigenvalue) {
  StateVector p = psi;
  for (int q : dots) {
    if (basis == Basis::X) {
      apply_bit_flip(p, q, n);
    } else {
      const std::size_t mask = qubit_mask(q, n);
      for (std::size_t i = 0; i < static_cast<std::size_t>(p.size()); ++i)
        if (i & mask) p(static_cast<Eigen::Index>(i)) = -p(static_cast<Eigen::Index>(i));
    }
  }
  return (p - static_cast<double>(eigenvalue) * psi).norm();
}

inline PhaseVector logical_z_triangle() {
  PhaseVector g = PhaseVector::zeros(3);
  for (int c = 0; c < 3; ++c) g = g + mqcp_gate({c, {{(c + 1) % 3, kPi}}}, 3);
  return g;
}

// Dot 0 is the ancilla, dots 1..n the checked qubits.
inline Circuit parity_check_circuit(int n_targets, Basis basis) {
  if (n_targets < 2 || n_targets > 4) throw InvalidArgument("parity check supports 2 to 4 targets");
  const int n = n_targets + 1;
  MqcpFactor f{0, {}};
  for (int t = 1; t <= n_targets; ++t) f.targets.push_back({t, kPi});
  Circuit c{n, {}};
  c.ops.push_back(HadamardOp{0});
  if (basis == Basis::X)
    for (int t = 1; t <= n_targets; ++t) c.ops.push_back(HadamardOp{t});
  c.ops.push_back(DiagonalOp{mqcp_gate(f, n), "MQCP"});
  if (basis == Basis::X)
    for (int t = 1; t <= n_targets; ++t) c.ops.push_back(HadamardOp{t});
  c.ops.push_back(MeasureOp{0, Basis::X});
  return c;
}

struct ParityTrial {
  int outcome = 0;
  double deviation = 0.0;  // ||P psi - outcome psi|| after the measurement
  bool agrees = false;
};

struct ParityCheckReport {
  Circuit circuit;
  int n_targets = 0;
  Basis basis = Basis::Z;
  std::vector<ParityTrial> trials;
  int agreements = 0;
  int branches_checked = 0;
  int branch_agreements = 0;
  std::size_t entangling_gates = 0;
  std::size_t two_qubit_gates_replaced = 0;
};

inline ParityCheckReport verify_parity_check(int n_targets, Basis basis, int trials,
                                             std::uint64_t seed, double tol = 1e-10) {
  ParityCheckReport r;
  r.circuit = parity_check_circuit(n_targets, basis);
  r.n_targets = n_targets;
  r.basis = basis;
  r.entangling_gates = r.circuit.entangling_gates();
  r.two_qubit_gates_replaced = static_cast<std::size_t>(n_targets);
  const int n = r.circuit.n_qubits;
  std::vector<int> targets;
  for (int t = 1; t <= n_targets; ++t) targets.push_back(t);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < trials; ++i) {
    // Ancilla starts in spin up; targets in a random state.
    StateVector data = random_state(n_targets, rng);
    StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
    psi.head(data.size()) = data;
    for (const Branch& b : enumerate_branches(r.circuit, psi)) {
      ++r.branches_checked;
      if (stabilizer_deviation(b.state, targets, basis, n, b.outcomes.front()) <= tol)
        ++r.branch_agreements;
    }
    RunResult run = run_circuit(r.circuit, psi, rng);
    ParityTrial t;
    t.outcome = run.outcomes.front();
    t.deviation = stabilizer_deviation(run.state, targets, basis, n, t.outcome);
    t.agrees = t.deviation <= tol;
    r.agreements += t.agrees;
    r.trials.push_back(t);
  }
  return r;
}

// Dots: 0 X-ancilla, 1 Z-ancilla, 2 and 3 data. Outcomes: Z check, then X check.
inline Circuit surface_code_cycle_unit(bool reset_ancillas = false) {
  const int n = 4;
  const PhaseVector czz_z = mqcp_gate({1, {{2, kPi}, {3, kPi}}}, n);
  const PhaseVector czz_x = mqcp_gate({0, {{2, kPi}, {3, kPi}}}, n);
  Circuit c{n, {}};
  if (reset_ancillas) {
    c.ops.push_back(ResetOp{0});
    c.ops.push_back(ResetOp{1});
  }
  c.ops.push_back(HadamardOp{1});
  c.ops.push_back(DiagonalOp{czz_z, "CZZ(Z-ancilla)"});
  c.ops.push_back(MeasureOp{1, Basis::X});
  c.ops.push_back(HadamardOp{0});
  c.ops.push_back(HadamardOp{2});
  c.ops.push_back(HadamardOp{3});
  c.ops.push_back(DiagonalOp{czz_x, "CZZ(X-ancilla)"});
  c.ops.push_back(HadamardOp{2});
  c.ops.push_back(HadamardOp{3});
  c.ops.push_back(MeasureOp{0, Basis::X});
  return c;
}

// Embeds a two-qubit data state with both ancillas in spin up.
inline StateVector surface_unit_input(const StateVector& data) {
  if (data.size() != 4) throw InvalidArgument("surface unit takes a two-qubit data state");
  StateVector psi = StateVector::Zero(16);
  psi.head(4) = data;
  return psi;
}

inline int consecutive_ones_count(std::string_view bits) {
  int count = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw InvalidArgument("bit string may hold only 0 and 1");
    if (i + 1 < bits.size() && bits[i] == '1' && bits[i + 1] == '1') ++count;
  }
  return count;
}

// +1 when the number of adjacent "11" pairs is even, -1 otherwise.
inline int consecutive_ones_parity(std::string_view bits) {
  return consecutive_ones_count(bits) % 2 == 0 ? 1 : -1;
}

inline std::string bit_string(std::size_t index, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int j = 0; j < n; ++j)
    if (bit_of(index, j, n)) s[static_cast<std::size_t>(j)] = '1';
  return s;
}

inline std::size_t reversed_index(std::size_t index, int n) {
  std::size_t out = 0;
  for (int j = 0; j < n; ++j)
    if (bit_of(index, j, n)) out |= qubit_mask(n - 1 - j, n);
  return out;
}

// Linear-chain gate prod_k C_k Z_{k+1} with theta = pi.
inline PhaseVector chain_cz_gate(int n) {
  PhaseVector g = PhaseVector::zeros(n);
  for (int k = 0; k + 1 < n; ++k) g = g + mqcp_gate({k, {{k + 1, kPi}}}, n);
  return g;
}

// R = H (G H)^n for the chain gate G; real-valued.
inline Eigen::MatrixXd order_reversal(int n) {
  if (n < 2 || n > 8) throw InvalidArgument("order reversal supports 2 to 8 qubits");
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  const PhaseVector g = chain_cz_gate(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim);
  auto hadamard_all = [&] {
    for (int q = 0; q < n; ++q) {
      const auto mask = static_cast<Eigen::Index>(qubit_mask(q, n));
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & mask) continue;
        Eigen::RowVectorXd a = m.row(i), b = m.row(i | mask);
        m.row(i) = (a + b) / std::sqrt(2.0);
        m.row(i | mask) = (a - b) / std::sqrt(2.0);
      }
    }
  };
  auto chain = [&] {
    for (Eigen::Index i = 0; i < dim; ++i)
      if (std::cos(g[static_cast<std::size_t>(i)]) < 0.0) m.row(i) *= -1.0;
  };
  for (int k = 0; k < n; ++k) {
    hadamard_all();
    chain();
  }
  hadamard_all();
  return m;
}

}  // namespace qdgates
