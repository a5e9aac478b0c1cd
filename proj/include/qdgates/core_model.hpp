#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qdgates/errors.hpp"
#include "qdgates/phase.hpp"

namespace qdgates {

using Complex = std::complex<double>;

inline constexpr double kNormalizationTol = 1e-12;

struct Dot {
  int id = 0;
  double zeeman = 1.0;
  double chem_potential = 0.0;
};

struct Tunneling {
  Complex t{1.0, 0.0};
  Complex s{0.0, 0.0};
};

inline Tunneling tunneling_from_soi(double gamma_so, double theta_b) {
  const double c = std::cos(gamma_so), g = std::sin(gamma_so);
  return {Complex(c, -g * std::cos(theta_b)), Complex(0.0, -g * std::sin(theta_b))};
}

inline double exchange_energy(double t_amp, double u, double mu_j, double mu_k) {
  const double d1 = u - mu_j + mu_k;
  const double d2 = u - mu_k + mu_j;
  const double guard = 1e-9 * std::abs(u);
  if (std::abs(d1) <= guard || std::abs(d2) <= guard)
    throw DegenerateChargeState("charge-state denominator vanishes (U=" +
                                std::to_string(u) + ")");
  return 0.5 * t_amp * (1.0 / d1 + 1.0 / d2);
}

// Monotone table mapping the dot spacing parameter x_SO to gamma_SO, with
// linear interpolation and clamping at the ends.
class SoiLookup {
 public:
  SoiLookup(std::vector<double> x, std::vector<double> gamma)
      : x_(std::move(x)), gamma_(std::move(gamma)) {
    if (x_.size() < 2 || x_.size() != gamma_.size())
      throw InvalidArgument("SOI table needs at least two matching points");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1]))
        throw InvalidArgument("SOI table abscissae must increase strictly");
    bool up = true, down = true;
    for (std::size_t i = 1; i < gamma_.size(); ++i) {
      up = up && gamma_[i] >= gamma_[i - 1];
      down = down && gamma_[i] <= gamma_[i - 1];
    }
    if (!up && !down) throw InvalidArgument("SOI table must be monotone");
  }

  double gamma(double x) const {
    if (x <= x_.front()) return gamma_.front();
    if (x >= x_.back()) return gamma_.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return gamma_[i - 1] + w * (gamma_[i] - gamma_[i - 1]);
  }

  Tunneling tunneling(double x, double theta_b) const {
    return tunneling_from_soi(gamma(x), theta_b);
  }

 private:
  std::vector<double> x_, gamma_;
};

// Exchange-coupled pair. Endpoints are stored with j < k; giving them in the
// other order relabels t -> -conj(t), which describes the same bond state.
class Bond {
 public:
  Bond(int j, int k, double exchange, Complex t, Complex s)
      : j_(j), k_(k), exchange_(exchange), t_(t), s_(s) {
    if (j == k) throw InvalidArgument("bond endpoints must differ");
    if (j < 0 || k < 0) throw InvalidArgument("negative dot id in bond");
    if (!std::isfinite(exchange) || exchange < 0.0)
      throw InvalidArgument("exchange energy must be finite and >= 0");
    if (!std::isfinite(t.real()) || !std::isfinite(t.imag()) ||
        !std::isfinite(s.real()) || !std::isfinite(s.imag()))
      throw InvalidArgument("non-finite tunneling amplitude");
    double norm = std::norm(t) + std::norm(s);
    if (std::abs(norm - 1.0) > kNormalizationTol)
      throw InvalidArgument("|t|^2 + |s|^2 = " + std::to_string(norm) +
                            " is not normalized");
    if (j_ > k_) {
      std::swap(j_, k_);
      t_ = -std::conj(t_);
    }
  }

  static Bond from_soi(int j, int k, double exchange, double gamma_so,
                       double theta_b) {
    Tunneling tun = tunneling_from_soi(gamma_so, theta_b);
    return Bond(j, k, exchange, tun.t, tun.s);
  }

  int j() const { return j_; }
  int k() const { return k_; }
  double exchange() const { return exchange_; }
  Complex t() const { return t_; }
  Complex s() const { return s_; }

  double spin_flipped() const { return 0.5 * exchange_ * std::norm(s_); }
  double spin_conserved() const { return 0.5 * exchange_ * std::norm(t_); }
  double velocity() const { return spin_conserved() - spin_flipped(); }

  bool touches(int dot) const { return dot == j_ || dot == k_; }

  Bond with_exchange(double exchange) const {
    return Bond(j_, k_, exchange, t_, s_);
  }

  // Exchanges the two tunneling channels, which swaps S and T.
  Bond with_channels_swapped() const { return Bond(j_, k_, exchange_, s_, t_); }

 private:
  int j_, k_;
  double exchange_;
  Complex t_, s_;
};

// (S, T, T, S) over (up-up, up-down, down-up, down-down).
inline std::array<double, 4> bond_vector(const Bond& bond) {
  const double s = bond.spin_flipped(), t = bond.spin_conserved();
  return {s, t, t, s};
}

inline double effective_velocity(const Bond& bond) { return bond.velocity(); }

class DotArray {
 public:
  DotArray(std::vector<Dot> dots, std::vector<Bond> bonds)
      : dots_(std::move(dots)), bonds_(std::move(bonds)) {
    std::sort(dots_.begin(), dots_.end(),
              [](const Dot& a, const Dot& b) { return a.id < b.id; });
    check_qubit_count(static_cast<int>(dots_.size()));
    for (std::size_t i = 0; i < dots_.size(); ++i) {
      if (dots_[i].id != static_cast<int>(i))
        throw InvalidArgument("dot ids must be 0..N-1 without gaps or repeats");
      if (!std::isfinite(dots_[i].zeeman) || !(dots_[i].zeeman > 0.0))
        throw InvalidArgument("dot " + std::to_string(i) +
                              " needs a positive Zeeman energy");
      if (!std::isfinite(dots_[i].chem_potential))
        throw InvalidArgument("non-finite chemical potential");
    }
    for (std::size_t a = 0; a < bonds_.size(); ++a) {
      if (bonds_[a].k() >= size())
        throw InvalidArgument("bond " + std::to_string(a) +
                              " refers to a missing dot");
      for (std::size_t b = 0; b < a; ++b)
        if (bonds_[a].j() == bonds_[b].j() && bonds_[a].k() == bonds_[b].k())
          throw InvalidArgument("duplicate bond (" + std::to_string(bonds_[a].j()) +
                                "," + std::to_string(bonds_[a].k()) + ")");
    }
  }

  int size() const { return static_cast<int>(dots_.size()); }
  std::size_t dimension() const { return std::size_t{1} << dots_.size(); }
  const std::vector<Dot>& dots() const { return dots_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  double zeeman(int dot) const { return dots_.at(static_cast<std::size_t>(dot)).zeeman; }

  std::optional<std::size_t> bond_index(int j, int k) const {
    if (j > k) std::swap(j, k);
    for (std::size_t w = 0; w < bonds_.size(); ++w)
      if (bonds_[w].j() == j && bonds_[w].k() == k) return w;
    return std::nullopt;
  }

  DotArray with_bonds(std::vector<Bond> bonds) const {
    return DotArray(dots_, std::move(bonds));
  }

  DotArray with_exchange_scaled(double factor) const {
    std::vector<Bond> bonds;
    bonds.reserve(bonds_.size());
    for (const Bond& b : bonds_) bonds.push_back(b.with_exchange(b.exchange() * factor));
    return with_bonds(std::move(bonds));
  }

  double max_exchange() const {
    double m = 0.0;
    for (const Bond& b : bonds_) m = std::max(m, b.exchange());
    return m;
  }

  double total_exchange() const {
    double m = 0.0;
    for (const Bond& b : bonds_) m += b.exchange();
    return m;
  }

  double min_zeeman() const {
    double m = dots_.front().zeeman;
    for (const Dot& d : dots_) m = std::min(m, d.zeeman);
    return m;
  }

 private:
  std::vector<Dot> dots_;
  std::vector<Bond> bonds_;
};

// Real diagonal rates over the 2^N basis.
struct PhaseRateVector {
  int n_qubits = 0;
  std::vector<double> values;

  // First half: the control qubit (qubit 0) in spin up.
  std::span<const double> reduced() const {
    return std::span<const double>(values).first(values.size() / 2);
  }

  bool reflective(double tol = 0.0) const {
    const std::size_t all = values.size() - 1;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (std::abs(values[i] - values[all ^ i]) > tol) return false;
    return true;
  }

  PhaseVector times(double tau) const {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = tau * values[i];
    return PhaseVector(std::move(out));
  }
};

inline void add_bond_rates(const Bond& bond, int n_qubits, std::vector<double>& out) {
  const auto v = bond_vector(bond);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int bj = bit_of(i, bond.j(), n_qubits), bk = bit_of(i, bond.k(), n_qubits);
    out[i] += v[static_cast<std::size_t>(2 * bj + bk)];
  }
}

inline PhaseRateVector grid_vector(const DotArray& array) {
  PhaseRateVector out{array.size(), std::vector<double>(array.dimension(), 0.0)};
  for (const Bond& b : array.bonds()) add_bond_rates(b, array.size(), out.values);
  return out;
}

}  // namespace qdgates
