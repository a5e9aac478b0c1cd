#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qdgates/errors.hpp"

namespace qdgates {

enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

// sig(I) = sig(Z) = +1, sig(X) = sig(Y) = -1: the effect of conjugation on a
// spin's up/down label.
constexpr int pauli_sign(Pauli p) {
  return (static_cast<std::uint8_t>(p) & 1u) ? -1 : 1;
}

// Product up to phase; (x, z) bit pairs add modulo 2.
constexpr Pauli pauli_product(Pauli a, Pauli b) {
  return static_cast<Pauli>(static_cast<std::uint8_t>(a) ^ static_cast<std::uint8_t>(b));
}

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw InvalidArgument(std::string("unknown Pauli label '") + c + "'");
  }
}

class PauliAssignment {
 public:
  PauliAssignment() = default;
  explicit PauliAssignment(std::vector<Pauli> labels) : labels_(std::move(labels)) {}

  static PauliAssignment identity(int n_qubits) {
    return PauliAssignment(std::vector<Pauli>(static_cast<std::size_t>(n_qubits), Pauli::I));
  }

  int size() const { return static_cast<int>(labels_.size()); }
  Pauli operator[](int j) const { return labels_.at(static_cast<std::size_t>(j)); }
  int sign(int j) const { return pauli_sign((*this)[j]); }
  const std::vector<Pauli>& labels() const { return labels_; }

  void apply(int dot, Pauli p) {
    auto& slot = labels_.at(static_cast<std::size_t>(dot));
    slot = pauli_product(p, slot);
  }

  bool is_identity() const {
    for (Pauli p : labels_)
      if (p != Pauli::I) return false;
    return true;
  }

  std::string str() const {
    std::string s;
    for (Pauli p : labels_) s += pauli_char(p);
    return s;
  }

  friend bool operator==(const PauliAssignment&, const PauliAssignment&) = default;

 private:
  std::vector<Pauli> labels_;
};

struct PulseOp {
  int dot = 0;
  Pauli pauli = Pauli::X;
  friend bool operator==(const PulseOp&, const PulseOp&) = default;
};

// Evolve for tau, then apply the pulses.
struct Stage {
  double tau = 0.0;
  std::vector<PulseOp> pulses;
};

class PulseSchedule {
 public:
  PulseSchedule() = default;
  PulseSchedule(int n_qubits, std::vector<Stage> stages)
      : n_qubits_(n_qubits), stages_(std::move(stages)) {
    if (n_qubits < 1) throw InvalidArgument("schedule needs at least one qubit");
    for (const Stage& s : stages_) {
      if (!std::isfinite(s.tau) || s.tau < 0.0)
        throw InvalidArgument("stage durations must be finite and >= 0");
      for (const PulseOp& p : s.pulses)
        if (p.dot < 0 || p.dot >= n_qubits)
          throw InvalidArgument("pulse on missing dot " + std::to_string(p.dot));
    }
  }

  int n_qubits() const { return n_qubits_; }
  const std::vector<Stage>& stages() const { return stages_; }
  std::size_t size() const { return stages_.size(); }

  double total_time() const {
    double t = 0.0;
    for (const Stage& s : stages_) t += s.tau;
    return t;
  }

  // Cumulative Pauli frame Q_n in effect during each stage.
  std::vector<PauliAssignment> frames() const {
    std::vector<PauliAssignment> out;
    PauliAssignment q = PauliAssignment::identity(n_qubits_);
    for (const Stage& s : stages_) {
      out.push_back(q);
      for (const PulseOp& p : s.pulses) q.apply(p.dot, p.pauli);
    }
    return out;
  }

  PauliAssignment net() const {
    PauliAssignment q = PauliAssignment::identity(n_qubits_);
    for (const Stage& s : stages_)
      for (const PulseOp& p : s.pulses) q.apply(p.dot, p.pauli);
    return q;
  }

  std::vector<int> pulse_counts() const {
    std::vector<int> c(static_cast<std::size_t>(n_qubits_), 0);
    for (const Stage& s : stages_)
      for (const PulseOp& p : s.pulses) ++c[static_cast<std::size_t>(p.dot)];
    return c;
  }

  // Pulse labels applied to one dot, in time order.
  std::vector<Pauli> trace(int dot) const {
    std::vector<Pauli> out;
    for (const Stage& s : stages_)
      for (const PulseOp& p : s.pulses)
        if (p.dot == dot) out.push_back(p.pauli);
    return out;
  }

 private:
  int n_qubits_ = 0;
  std::vector<Stage> stages_;
};

}  // namespace qdgates
