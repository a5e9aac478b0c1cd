#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qdgates/core_model.hpp"
#include "qdgates/errors.hpp"
#include "qdgates/phase.hpp"
#include "qdgates/pulse.hpp"

namespace qdgates {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr int kMaxSimulatedQubits = 12;

struct HamiltonianPair {
  Eigen::VectorXd h0;
  ComplexMatrix h_ex;

  ComplexMatrix total() const {
    ComplexMatrix h = h_ex;
    h.diagonal() += h0.cast<Complex>();
    return h;
  }
};

// Amplitudes (s*, t*, -t, s)/sqrt(2) over (up-up, up-down, down-up, down-down).
inline std::array<Complex, 4> bond_state(const Bond& b) {
  const double r = 1.0 / std::sqrt(2.0);
  return {std::conj(b.s()) * r, std::conj(b.t()) * r, -b.t() * r, b.s() * r};
}

inline HamiltonianPair build_hamiltonian(const DotArray& array) {
  const int n = array.size();
  check_qubit_count(n);
  if (n > kMaxSimulatedQubits)
    throw InvalidArgument("dense simulation is limited to " +
                          std::to_string(kMaxSimulatedQubits) + " qubits");
  const std::size_t dim = array.dimension();
  const auto d = static_cast<Eigen::Index>(dim);
  HamiltonianPair h{Eigen::VectorXd::Zero(d), ComplexMatrix::Zero(d, d)};
  for (std::size_t i = 0; i < dim; ++i)
    for (int j = 0; j < n; ++j)
      h.h0(static_cast<Eigen::Index>(i)) +=
          (bit_of(i, j, n) ? -0.5 : 0.5) * array.zeeman(j);
  for (const Bond& b : array.bonds()) {
    const auto xi = bond_state(b);
    const std::size_t mj = qubit_mask(b.j(), n), mk = qubit_mask(b.k(), n);
    for (std::size_t base = 0; base < dim; ++base) {
      if (base & (mj | mk)) continue;
      const std::array<std::size_t, 4> idx{base, base | mk, base | mj, base | mj | mk};
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t c = 0; c < 4; ++c)
          h.h_ex(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[c])) -=
              b.exchange() * xi[a] * std::conj(xi[c]);
    }
  }
  return h;
}

// Left-multiplies m by a single-qubit Pauli acting on `qubit`.
inline void apply_pauli(ComplexMatrix& m, int qubit, Pauli p, int n_qubits) {
  if (p == Pauli::I) return;
  const std::size_t mask = qubit_mask(qubit, n_qubits);
  const auto rows = static_cast<std::size_t>(m.rows());
  const Complex i1(0.0, 1.0);
  for (std::size_t r0 = 0; r0 < rows; ++r0) {
    if (r0 & mask) continue;
    const auto a = static_cast<Eigen::Index>(r0), b = static_cast<Eigen::Index>(r0 | mask);
    switch (p) {
      case Pauli::X: m.row(a).swap(m.row(b)); break;
      case Pauli::Z: m.row(b) *= -1.0; break;
      case Pauli::Y: {
        Eigen::RowVectorXcd up = m.row(a);
        m.row(a) = -i1 * m.row(b);
        m.row(b) = i1 * up;
        break;
      }
      case Pauli::I: break;
    }
  }
}

inline ComplexMatrix pauli_matrix(const PauliAssignment& q) {
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << q.size());
  ComplexMatrix m = ComplexMatrix::Identity(d, d);
  for (int j = 0; j < q.size(); ++j) apply_pauli(m, j, q[j], q.size());
  return m;
}

// Eigendecomposition of H = H0 + H_ex, reused for every evolution time.
class Propagator {
 public:
  explicit Propagator(const DotArray& array)
      : n_qubits_(array.size()), ham_(build_hamiltonian(array)) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(ham_.total());
    if (solver.info() != Eigen::Success)
      throw EigensolverFailure("Hermitian eigensolver did not converge");
    energies_ = solver.eigenvalues();
    states_ = solver.eigenvectors();
  }

  int n_qubits() const { return n_qubits_; }
  const HamiltonianPair& hamiltonian() const { return ham_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const ComplexMatrix& states() const { return states_; }

  // exp(-i tau H)
  ComplexMatrix lab(double tau) const {
    ComplexVector phases = (energies_ * (-tau)).unaryExpr([](double x) {
      return std::polar(1.0, x);
    });
    return states_ * phases.asDiagonal() * states_.adjoint();
  }

  // exp(+i tau H0) exp(-i tau H)
  ComplexMatrix frame(double tau) const {
    ComplexMatrix u = lab(tau);
    to_frame(u, tau);
    return u;
  }

  void to_frame(ComplexMatrix& u, double tau) const {
    for (Eigen::Index r = 0; r < u.rows(); ++r) u.row(r) *= std::polar(1.0, tau * ham_.h0(r));
  }

 private:
  int n_qubits_;
  HamiltonianPair ham_;
  Eigen::VectorXd energies_;
  ComplexMatrix states_;
};

inline ComplexMatrix qubit_frame_evolution(const DotArray& array, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be >= 0");
  return Propagator(array).frame(tau);
}

inline PhaseVector ideal_evolution(const DotArray& array, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be >= 0");
  return grid_vector(array).times(tau);
}

inline PhaseVector diagonal_phases(const ComplexMatrix& u) {
  std::vector<double> out(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index i = 0; i < u.rows(); ++i) out[static_cast<std::size_t>(i)] = std::arg(u(i, i));
  return PhaseVector(std::move(out));
}

inline double average_gate_fidelity(const ComplexMatrix& u, const PhaseVector& v) {
  if (static_cast<std::size_t>(u.rows()) != v.size() || u.rows() != u.cols())
    throw InvalidArgument("unitary and phase vector dimensions differ");
  const double d = static_cast<double>(v.size());
  Complex tr = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    tr += std::conj(u(k, k)) * std::polar(1.0, v[i]);
  }
  return (d + std::norm(tr)) / (d * (d + 1.0));
}

inline double fidelity_lower_bound(std::span<const double> residues, double leak) {
  const double d = static_cast<double>(residues.size());
  double worst = 0.0;
  for (double r : residues) worst = std::max(worst, std::abs(r));
  return 1.0 - 2.0 * d / (d + 1.0) * worst - 4.0 / (d + 1.0) * leak;
}

// phi_n = arg(conj(U_nn) e^{i Lambda_n tau}), so that phi_n ~ tau (dE_n - dE1_n).
inline std::vector<double> frame_residues(const ComplexMatrix& u, const PhaseVector& ideal) {
  std::vector<double> out(ideal.size());
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[i] = wrap_signed(ideal[i] - std::arg(u(k, k)));
  }
  return out;
}

struct EigenDiagnostics {
  std::vector<std::size_t> match;  // eigenvector column paired with bare state n
  std::vector<double> overlap;     // r_nn = |<n|n'>|^2
  std::vector<double> residues;    // tau (dE_n - dE1_n)
  double leak = 0.0;
};

inline EigenDiagnostics eigen_diagnostics(const Propagator& prop, double tau) {
  const ComplexMatrix& v = prop.states();
  const auto dim = static_cast<std::size_t>(v.rows());
  EigenDiagnostics out;
  out.match.resize(dim);
  out.overlap.resize(dim);
  out.residues.resize(dim);
  std::vector<bool> used(dim, false);
  for (std::size_t n = 0; n < dim; ++n) {
    const auto r = static_cast<Eigen::Index>(n);
    std::size_t best = 0;
    double best_ov = -1.0;
    for (std::size_t c = 0; c < dim; ++c) {
      double ov = std::norm(v(r, static_cast<Eigen::Index>(c)));
      if (ov > best_ov) {
        best_ov = ov;
        best = c;
      }
    }
    if (best_ov < 0.5 || used[best])
      throw NonPerturbative("bare state " + std::to_string(n) +
                            " has no eigenvector with overlap >= 0.5");
    used[best] = true;
    out.match[n] = best;
    out.overlap[n] = best_ov;
    out.leak += 1.0 - best_ov;
    const auto& h = prop.hamiltonian();
    double shift = prop.energies()(static_cast<Eigen::Index>(best)) - h.h0(r);
    out.residues[n] = tau * (shift - h.h_ex(r, r).real());
  }
  return out;
}

struct PerturbationOptions {
  double gap_factor = 10.0;  // coupled levels must be >= gap_factor * sum J apart
};

struct PerturbativeEstimate {
  std::vector<double> residues;
  std::vector<double> leak_terms;
  double leak = 0.0;
};

inline PerturbativeEstimate perturbation_second_order(const DotArray& array, double tau,
                                                      const PerturbationOptions& opts = {}) {
  const HamiltonianPair h = build_hamiltonian(array);
  const auto dim = static_cast<std::size_t>(h.h0.size());
  const double sum_j = array.total_exchange();
  const double threshold = opts.gap_factor * sum_j;
  PerturbativeEstimate out{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), 0.0};
  if (sum_j == 0.0) return out;
  for (std::size_t n = 0; n < dim; ++n) {
    for (std::size_t m = 0; m < dim; ++m) {
      if (m == n) continue;
      const double v2 = std::norm(h.h_ex(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)));
      if (v2 <= 1e-24 * sum_j * sum_j) continue;
      const double gap = h.h0(static_cast<Eigen::Index>(n)) - h.h0(static_cast<Eigen::Index>(m));
      if (std::abs(gap) < threshold || gap == 0.0)
        throw DegenerateSpectrum(std::min(n, m), std::max(n, m), std::abs(gap));
      out.residues[n] += tau * v2 / gap;
      out.leak_terms[n] += v2 / (gap * gap);
    }
    out.leak += out.leak_terms[n];
  }
  return out;
}

// Columns: all ones, then the bit indicator of each qubit.
inline Eigen::MatrixXd free_phase_basis(int n_qubits) {
  check_qubit_count(n_qubits);
  const std::size_t dim = std::size_t{1} << n_qubits;
  Eigen::MatrixXd k(static_cast<Eigen::Index>(dim), n_qubits + 1);
  for (std::size_t i = 0; i < dim; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    k(r, 0) = 1.0;
    for (int j = 0; j < n_qubits; ++j) k(r, j + 1) = bit_of(i, j, n_qubits);
  }
  return k;
}

struct PhaseCorrection {
  FreePhase y;
  std::vector<double> post;
};

inline PhaseCorrection optimal_phase_correction(std::span<const double> residues, int n_qubits) {
  const Eigen::MatrixXd k = free_phase_basis(n_qubits);
  if (static_cast<std::size_t>(k.rows()) != residues.size())
    throw InvalidArgument("residue count must be 2^N");
  Eigen::Map<const Eigen::VectorXd> phi(residues.data(), k.rows());
  const Eigen::VectorXd y = k.completeOrthogonalDecomposition().solve(phi);
  const Eigen::VectorXd post = phi - k * y;
  PhaseCorrection out;
  out.y.global = y(0);
  out.y.local.assign(y.data() + 1, y.data() + y.size());
  out.post.assign(post.data(), post.data() + post.size());
  return out;
}

inline ComplexMatrix pulsed_evolution(const Propagator& prop, const PulseSchedule& schedule) {
  const int n = prop.n_qubits();
  if (schedule.n_qubits() != n) throw InvalidArgument("schedule and array qubit counts differ");
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << n);
  ComplexMatrix u = ComplexMatrix::Identity(d, d);
  for (const Stage& s : schedule.stages()) {
    if (s.tau > 0.0) u = prop.lab(s.tau) * u;
    for (const PulseOp& p : s.pulses) apply_pauli(u, p.dot, p.pauli, n);
  }
  prop.to_frame(u, schedule.total_time());
  return u;
}

inline ComplexMatrix pulsed_evolution(const DotArray& array, const PulseSchedule& schedule) {
  return pulsed_evolution(Propagator(array), schedule);
}

inline double unitarity_error(const ComplexMatrix& u) {
  return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

struct SimReport {
  int n_qubits = 0;
  double tau = 0.0;
  ComplexMatrix u_exact;
  PhaseVector u_ideal;
  double fidelity = 0.0;
  double bound = 0.0;
  std::vector<double> residues;
  double leak = 0.0;
  PhaseCorrection correction;
  double fidelity_corrected = 0.0;
  double bound_corrected = 0.0;

  double max_residue() const {
    double m = 0.0;
    for (double r : residues) m = std::max(m, std::abs(r));
    return m;
  }
};

inline SimReport simulate(const Propagator& prop, const DotArray& array, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be >= 0");
  SimReport r;
  r.n_qubits = array.size();
  r.tau = tau;
  r.u_exact = prop.frame(tau);
  r.u_ideal = ideal_evolution(array, tau);
  r.fidelity = average_gate_fidelity(r.u_exact, r.u_ideal);
  r.residues = frame_residues(r.u_exact, r.u_ideal);
  r.leak = eigen_diagnostics(prop, tau).leak;
  r.bound = fidelity_lower_bound(r.residues, r.leak);
  r.correction = optimal_phase_correction(r.residues, r.n_qubits);
  // The corrected evolution e^{iKy} U is compared against the same ideal gate.
  r.fidelity_corrected =
      average_gate_fidelity(r.u_exact, r.u_ideal - r.correction.y.expand());
  r.bound_corrected = fidelity_lower_bound(r.correction.post, r.leak);
  return r;
}

inline SimReport simulate(const DotArray& array, double tau) {
  return simulate(Propagator(array), array, tau);
}

struct SweepRow {
  double ratio = 0.0;  // max J / min Zeeman energy
  double infidelity = 0.0;
  double bound = 0.0;
  double max_residue = 0.0;
  double leak = 0.0;
};

// Rescales every exchange so that max J / min eps_Z equals each ratio, keeping
// the product tau * max J fixed.
inline std::vector<SweepRow> sweep_exchange_ratio(const DotArray& array, double tau_times_j,
                                                  std::span<const double> ratios, int jobs = 1) {
  const double j0 = array.max_exchange();
  if (!(j0 > 0.0)) throw InvalidArgument("sweep needs a nonzero exchange");
  std::vector<SweepRow> rows(ratios.size());
  auto work = [&](std::size_t i) {
    const double ratio = ratios[i];
    const double jmax = ratio * array.min_zeeman();
    const DotArray scaled = array.with_exchange_scaled(jmax / j0);
    const SimReport r = simulate(scaled, tau_times_j / jmax);
    rows[i] = {ratio, 1.0 - r.fidelity, r.bound, r.max_residue(), r.leak};
  };
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, ratios.size() ? ratios.size() : 1);
  if (workers == 1) {
    for (std::size_t i = 0; i < ratios.size(); ++i) work(i);
    return rows;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < ratios.size(); i += workers) work(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace qdgates
