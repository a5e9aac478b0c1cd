#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <array>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "qdgates/qdgates.hpp"

namespace qdgates::testing {

inline std::vector<Dot> make_dots(const std::vector<double>& zeeman) {
  std::vector<Dot> dots;
  for (std::size_t i = 0; i < zeeman.size(); ++i) dots.push_back({static_cast<int>(i), zeeman[i], 0.0});
  return dots;
}

// Bond with |t|^2 = cos^2(theta) and phases on both channels.
inline Bond angled_bond(int j, int k, double exchange, double theta, double eta = 0.0,
                        double chi = 0.0) {
  return Bond(j, k, exchange, std::polar(std::cos(theta), eta), std::polar(std::sin(theta), chi));
}

inline Bond singlet_bond(int j, int k, double exchange) {
  return Bond(j, k, exchange, {1.0, 0.0}, {0.0, 0.0});
}

inline DotArray chain_array(const std::vector<double>& zeeman, double exchange) {
  std::vector<Bond> bonds;
  for (int k = 0; k + 1 < static_cast<int>(zeeman.size()); ++k) bonds.push_back(singlet_bond(k, k + 1, exchange));
  return DotArray(make_dots(zeeman), bonds);
}

inline std::vector<std::pair<int, int>> complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) e.push_back({j, k});
  return e;
}

inline std::vector<std::pair<int, int>> star_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int k = 1; k < n; ++k) e.push_back({0, k});
  return e;
}

inline std::vector<std::pair<int, int>> path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int k = 0; k + 1 < n; ++k) e.push_back({k, k + 1});
  return e;
}

// Zeeman energies spread geometrically so that sums and differences of
// distinct subsets stay well separated.
inline std::vector<double> spread_zeeman(int n, std::mt19937_64& rng, double base = 1.0) {
  std::uniform_real_distribution<double> jitter(0.0, 0.1);
  std::vector<double> z;
  for (int j = 0; j < n; ++j) z.push_back(base * std::pow(2.3, j) * (1.0 + jitter(rng)));
  return z;
}

inline DotArray random_array(std::mt19937_64& rng, int n, const std::vector<std::pair<int, int>>& edges,
                             double exchange) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Bond> bonds;
  for (auto [j, k] : edges)
    bonds.push_back(angled_bond(j, k, exchange * (0.6 + 0.4 * u(rng)), 0.5 * u(rng),
                                kTwoPi * u(rng), kTwoPi * u(rng)));
  return DotArray(make_dots(spread_zeeman(n, rng)), bonds);
}

// Linear 1-C-2 array with the control (dot 0) in the middle, s_j = i sin(theta_j)
// and t_j = e^{i eta_j} cos(theta_j).
struct LinearInstance {
  double theta1 = 0.5, theta2 = 0.7, eta1 = 0.3, eta2 = 1.1;
  double exchange = 1e-2;
  std::vector<double> zeeman{1.0, 0.6, 1.5};

  DotArray array() const {
    return DotArray(make_dots(zeeman), {angled_bond(0, 1, exchange, theta1, eta1, kPi / 2),
                                        angled_bond(0, 2, exchange, theta2, eta2, kPi / 2)});
  }
  double tau() const { return kPi / (2.0 * std::abs(array().bonds()[0].velocity())); }
  double predicted_residue() const {
    return tau() * exchange * exchange / (8.0 * zeeman[0]) * std::sin(2 * theta1) *
           std::sin(2 * theta2) * std::cos(eta1 - eta2);
  }
};

inline FreePhase random_free_phase(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  FreePhase f{u(rng), {}};
  for (int j = 0; j < n; ++j) f.local.push_back(u(rng));
  return f;
}

// Grid vector assembled from Kronecker products of sigma^Z operators:
// Lambda_w = (S + T)/2 - (T - S)/2 Z_j Z_k.
inline Eigen::VectorXd kronecker_grid_vector(const DotArray& array) {
  const int n = array.size();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  Eigen::Vector2d z(1.0, -1.0), one(1.0, 1.0);
  for (const Bond& b : array.bonds()) {
    Eigen::VectorXd zz = Eigen::VectorXd::Ones(1);
    for (int q = 0; q < n; ++q) {
      Eigen::VectorXd f = (q == b.j() || q == b.k()) ? Eigen::VectorXd(z) : Eigen::VectorXd(one);
      Eigen::VectorXd next = Eigen::kroneckerProduct(zz, f);
      zz = next;
    }
    const double s = b.spin_flipped(), t = b.spin_conserved();
    out += Eigen::VectorXd::Constant(dim, 0.5 * (s + t)) - 0.5 * (t - s) * zz;
  }
  return out;
}

inline Eigen::Matrix2cd pauli2(char p) {
  Eigen::Matrix2cd m;
  const Complex i(0.0, 1.0);
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1;
  }
  return m;
}

// Dense operator sum of single-qubit operators placed by Kronecker products.
inline Eigen::MatrixXcd embed(const std::vector<Eigen::Matrix2cd>& factors) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  for (const auto& f : factors) {
    Eigen::MatrixXcd next = Eigen::kroneckerProduct(out, f);
    out = next;
  }
  return out;
}

// Exchange Hamiltonian from the Pauli expansion of each bond projector.
inline Eigen::MatrixXcd pauli_exchange(const DotArray& array) {
  const int n = array.size();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const char labels[4] = {'I', 'X', 'Y', 'Z'};
  for (const Bond& b : array.bonds()) {
    const auto xi = bond_state(b);
    Eigen::Vector4cd v(xi[0], xi[1], xi[2], xi[3]);
    Eigen::Matrix4cd proj = v * v.adjoint();
    for (char a : labels)
      for (char c : labels) {
        Eigen::Matrix4cd sigma = Eigen::kroneckerProduct(pauli2(a), pauli2(c));
        const Complex coeff = (sigma.adjoint() * proj).trace() / 4.0;
        if (std::abs(coeff) < 1e-15) continue;
        std::vector<Eigen::Matrix2cd> f(static_cast<std::size_t>(n), pauli2('I'));
        f[static_cast<std::size_t>(b.j())] = pauli2(a);
        f[static_cast<std::size_t>(b.k())] = pauli2(c);
        h -= b.exchange() * coeff * embed(f);
      }
  }
  return h;
}

// Rectangle with bonds N = (0,1), E = (1,3), W = (0,2), S = (2,3).
inline DotArray rectangle_array(const std::array<double, 4>& exchange,
                                const std::vector<double>& zeeman = {1.0, 1.37, 1.81, 2.43}) {
  return DotArray(make_dots(zeeman), {singlet_bond(0, 1, exchange[0]), singlet_bond(1, 3, exchange[1]),
                                      singlet_bond(0, 2, exchange[2]), singlet_bond(2, 3, exchange[3])});
}

// Diagonal phases of Q^dagger U with the pulse-induced local phases removed,
// plus the largest off-diagonal magnitude left behind.
struct StrippedEvolution {
  PhaseVector phases;
  double off_diagonal = 0.0;
};

inline StrippedEvolution strip_pulsed(const DotArray& array, const PulseSchedule& schedule) {
  const ExtraPhases extra = extra_local_phases(schedule, array);
  const ComplexMatrix u = pauli_matrix(extra.net).adjoint() * pulsed_evolution(array, schedule);
  StrippedEvolution out{diagonal_phases(u) - extra.free.expand(), 0.0};
  for (Eigen::Index r = 0; r < u.rows(); ++r)
    for (Eigen::Index c = 0; c < u.cols(); ++c)
      if (r != c) out.off_diagonal = std::max(out.off_diagonal, std::abs(u(r, c)));
  return out;
}

// Global-phase-insensitive distance between phase vectors.
inline double distance_up_to_global(const PhaseVector& a, const PhaseVector& b) {
  const double shift = a[0] - b[0];
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, phase_distance(a[i] - shift, b[i]));
  return worst;
}

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace qdgates::testing
