#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qdgates/errors.hpp"

namespace qdgates {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kPhaseTol = 1e-9;
inline constexpr int kMaxQubits = 20;

// Wraps into [0, period).
inline double wrap_period(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

inline double wrap_2pi(double x) { return wrap_period(x, kTwoPi); }
inline double wrap_pi(double x) { return wrap_period(x, kPi); }

// Wraps into (-pi, pi].
inline double wrap_signed(double x) {
  double r = wrap_2pi(x);
  return r > kPi ? r - kTwoPi : r;
}

// Distance from x to the lattice period * Z.
inline double lattice_distance(double x, double period) {
  double r = wrap_period(x, period);
  return std::min(r, period - r);
}

inline double phase_distance(double a, double b) {
  return lattice_distance(a - b, kTwoPi);
}

// Qubit 0 is the most significant bit of a basis index; bit value 0 is spin up.
inline std::size_t qubit_mask(int qubit, int n_qubits) {
  return std::size_t{1} << (n_qubits - 1 - qubit);
}

inline int bit_of(std::size_t index, int qubit, int n_qubits) {
  return (index & qubit_mask(qubit, n_qubits)) ? 1 : 0;
}

inline int log2_exact(std::size_t size) {
  if (size == 0 || (size & (size - 1)) != 0)
    throw InvalidArgument("length " + std::to_string(size) +
                          " is not a power of two");
  int n = 0;
  while ((std::size_t{1} << n) < size) ++n;
  return n;
}

inline void check_qubit_count(int n_qubits, int minimum = 1) {
  if (n_qubits < minimum || n_qubits > kMaxQubits)
    throw InvalidArgument("qubit count " + std::to_string(n_qubits) +
                          " outside [" + std::to_string(minimum) + ", " +
                          std::to_string(kMaxQubits) + "]");
}

// Diagonal phases of a diagonal unitary, canonical in [0, 2pi).
class PhaseVector {
 public:
  PhaseVector() = default;

  explicit PhaseVector(std::vector<double> values) : values_(std::move(values)) {
    n_qubits_ = log2_exact(values_.size());
    check_qubit_count(n_qubits_);
    for (double& v : values_) {
      if (!std::isfinite(v)) throw InvalidArgument("non-finite phase");
      v = wrap_2pi(v);
    }
  }

  static PhaseVector zeros(int n_qubits) {
    check_qubit_count(n_qubits);
    return PhaseVector(std::vector<double>(std::size_t{1} << n_qubits, 0.0));
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  PhaseVector operator+(const PhaseVector& other) const {
    return combine(other, 1.0);
  }
  PhaseVector operator-(const PhaseVector& other) const {
    return combine(other, -1.0);
  }

  double max_distance(const PhaseVector& other) const {
    require_same_size(other);
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      worst = std::max(worst, phase_distance(values_[i], other.values_[i]));
    return worst;
  }

  bool approx_equal(const PhaseVector& other, double tol = kPhaseTol) const {
    return size() == other.size() && max_distance(other) <= tol;
  }

 private:
  void require_same_size(const PhaseVector& other) const {
    if (size() != other.size())
      throw InvalidArgument("phase vectors differ in length");
  }

  PhaseVector combine(const PhaseVector& other, double sign) const {
    require_same_size(other);
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i)
      out[i] = values_[i] + sign * other.values_[i];
    return PhaseVector(std::move(out));
  }

  std::vector<double> values_;
  int n_qubits_ = 0;
};

// Global phase plus one local phase per qubit:
// F(n) = global + sum_j b_j(n) local[j].
struct FreePhase {
  double global = 0.0;
  std::vector<double> local;

  static FreePhase zero(int n_qubits) {
    return FreePhase{0.0, std::vector<double>(n_qubits, 0.0)};
  }

  int n_qubits() const { return static_cast<int>(local.size()); }

  std::vector<double> raw() const {
    int n = n_qubits();
    check_qubit_count(n);
    std::vector<double> out(std::size_t{1} << n, global);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (int j = 0; j < n; ++j)
        if (bit_of(i, j, n)) out[i] += local[j];
    return out;
  }

  PhaseVector expand() const { return PhaseVector(raw()); }

  FreePhase canonical() const {
    FreePhase out{wrap_2pi(global), local};
    for (double& v : out.local) v = wrap_2pi(v);
    return out;
  }
};

}  // namespace qdgates
