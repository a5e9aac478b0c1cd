#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

namespace qdgates {
namespace {

using testing::angled_bond;
using testing::make_dots;
using testing::singlet_bond;

PhaseVector ccz() {
  std::vector<double> v(8, 0.0);
  v[7] = kPi;
  return PhaseVector(v);
}

// Row a of L times (phi_c, phi_1, ...), by direct bit arithmetic.
std::vector<double> apply_parity(const Eigen::MatrixXi& l, const std::vector<double>& local) {
  std::vector<double> out(static_cast<std::size_t>(l.rows()), 0.0);
  for (Eigen::Index r = 0; r < l.rows(); ++r)
    for (Eigen::Index c = 0; c < l.cols(); ++c) out[static_cast<std::size_t>(r)] += l(r, c) * local[static_cast<std::size_t>(c)];
  return out;
}

TEST(ParityMatrix, TwoQubits) {
  Eigen::MatrixXi expected(2, 2);
  expected << -1, 1, -1, -1;
  EXPECT_EQ(parity_matrix(2), expected);
}

TEST(ParityMatrix, ThreeQubits) {
  Eigen::MatrixXi expected(4, 3);
  expected << -1, 1, 1, -1, 1, -1, -1, -1, 1, -1, -1, -1;
  EXPECT_EQ(parity_matrix(3), expected);
}

TEST(ParityMatrix, FourQubitsMatchesFreePhaseExpansion) {
  const Eigen::MatrixXi l = parity_matrix(4);
  ASSERT_EQ(l.rows(), 8);
  ASSERT_EQ(l.cols(), 4);
  for (Eigen::Index r = 0; r < 8; ++r) {
    EXPECT_EQ(l(r, 0), -1);
    EXPECT_EQ(((l.row(r).sum() - 4) % 2 + 2) % 2, 0);
  }
  // The reduced vector of a free phase map f is -L f.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    FreePhase f = testing::random_free_phase(rng, 4);
    auto theta = reduced_gate_vector(f.expand());
    auto lf = apply_parity(l, f.local);
    for (std::size_t a = 0; a < theta.size(); ++a) EXPECT_LE(phase_distance(theta[a], -lf[a]), 1e-9);
  }
}

TEST(ParityMatrix, RowSumIdentityForThreeQubits) {
  const Eigen::MatrixXi l = parity_matrix(3);
  EXPECT_EQ(l.row(0) + l.row(3), l.row(1) + l.row(2));
}

TEST(SolveParity, CczIsInfeasible) {
  auto theta = reduced_gate_vector(ccz());
  EXPECT_EQ(theta, (std::vector<double>{0.0, 0.0, 0.0, kPi}));
  ParitySolution sol = solve_parity(theta, 3);
  EXPECT_FALSE(sol.feasible);
  EXPECT_GT(sol.residual, 1.0);
}

TEST(SolveParity, CczRejectedForEveryLocalAssignment) {
  // Any L phi satisfies theta0 + theta3 = theta1 + theta2 mod 2 pi; CCZ gives pi = 0.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  const Eigen::MatrixXi l = parity_matrix(3);
  for (int i = 0; i < 1000; ++i) {
    auto lf = apply_parity(l, {u(rng), u(rng), u(rng)});
    EXPECT_LE(phase_distance(lf[0] + lf[3], lf[1] + lf[2]), 1e-9);
  }
}

TEST(SolveParity, ControlledPhaseClosedForm) {
  for (double theta : {0.3, kPi, 2.0, 5.5}) {
    std::vector<double> g{0.0, theta};
    ParitySolution sol = solve_parity(g, 2);
    ASSERT_TRUE(sol.feasible);
    EXPECT_LE(lattice_distance(sol.free.local[1] + theta / 2, kPi), 1e-12);
    // phi_c = -theta/2 + (k1 + 2 k2) pi.
    const double k1 = std::round((sol.free.local[1] + theta / 2) / kPi);
    EXPECT_LE(lattice_distance(sol.free.local[0] + theta / 2 - k1 * kPi, kTwoPi), 1e-12);
  }
}

TEST(SolveParity, ControlledPhaseTwoTargetsClosedForm) {
  const double t1 = 0.7, t2 = 2.9;
  PhaseVector gate = mqcp_gate({0, {{1, t1}, {2, t2}}}, 3);
  ParitySolution sol = solve_parity(reduced_gate_vector(gate), 3);
  ASSERT_TRUE(sol.feasible);
  const double k1 = std::round((sol.free.local[1] + t1 / 2) / kPi);
  const double k2 = std::round((sol.free.local[2] + t2 / 2) / kPi);
  EXPECT_LE(std::abs(sol.free.local[1] + t1 / 2 - k1 * kPi), 1e-9);
  EXPECT_LE(std::abs(sol.free.local[2] + t2 / 2 - k2 * kPi), 1e-9);
  EXPECT_LE(lattice_distance(sol.free.local[0] + (t1 + t2) / 2 - (k1 + k2) * kPi, kTwoPi), 1e-9);
}

TEST(SolveParity, RoundTripRandomFreePhases) {
  std::mt19937_64 rng(12);
  for (int n = 2; n <= 8; ++n) {
    const Eigen::MatrixXi l = parity_matrix(n);
    for (int trial = 0; trial < 150; ++trial) {
      FreePhase f = testing::random_free_phase(rng, n);
      std::vector<double> theta = apply_parity(l, f.local);
      for (double& x : theta) x = wrap_2pi(x);
      ParitySolution sol = solve_parity(theta, n);
      ASSERT_TRUE(sol.feasible) << "n=" << n;
      EXPECT_LE(sol.residual, 1e-9);
      auto back = apply_parity(l, sol.free.local);
      for (std::size_t a = 0; a < theta.size(); ++a) EXPECT_LE(phase_distance(back[a], theta[a]), 1e-9);
    }
  }
}

TEST(SolveParity, SolutionCancelsReducedGate) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int n = 2; n <= 6; ++n) {
    MqcpFactor f{0, {}};
    for (int t = 1; t < n; ++t) f.targets.push_back({t, u(rng)});
    PhaseVector gate = mqcp_gate(f, n);
    ParitySolution sol = solve_parity(reduced_gate_vector(gate), n);
    ASSERT_TRUE(sol.feasible);
    auto rest = reduced_gate_vector(gate + sol.free.expand());
    for (double x : rest) EXPECT_LE(lattice_distance(x, kTwoPi), 1e-9);
  }
}

TEST(SolveParity, RejectsWrongLength) {
  std::vector<double> theta{0.0, 0.0, 0.0};
  EXPECT_THROW(solve_parity(theta, 3), InvalidArgument);
}

TEST(Mqcp, CzzClosedForm) {
  FreePhase f = mqcp_phase_solution({0, {{1, kPi}, {2, kPi}}}, 3);
  EXPECT_NEAR(f.local[1], kPi / 2, 1e-15);
  EXPECT_NEAR(f.local[2], kPi / 2, 1e-15);
  EXPECT_NEAR(f.local[0], kPi, 1e-15);
  EXPECT_EQ(f.global, 0.0);
}

TEST(Mqcp, IdentityGate) {
  FreePhase f = mqcp_phase_solution({0, {{1, 0.0}, {2, 0.0}}}, 3);
  for (double x : f.local) EXPECT_EQ(x, 0.0);
}

TEST(Mqcp, SingleTargetControlledZ) {
  FreePhase f = mqcp_phase_solution({0, {{1, kPi}}}, 2);
  EXPECT_NEAR(f.local[1], kPi / 2, 1e-15);
  EXPECT_NEAR(f.local[0], kPi / 2, 1e-15);
}

TEST(Mqcp, AgreesWithSolveParity) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int n = 2; n <= 7; ++n)
    for (int trial = 0; trial < 30; ++trial) {
      MqcpFactor f{0, {}};
      for (int t = 1; t < n; ++t) f.targets.push_back({t, u(rng)});
      PhaseVector gate = mqcp_gate(f, n);
      FreePhase closed = mqcp_phase_solution(f, n);
      EXPECT_LE(parity_row_residual(reduced_gate_vector(gate), n, closed.local), 1e-9);
      EXPECT_TRUE(solve_parity(reduced_gate_vector(gate), n).feasible);
    }
}

TEST(Mqcp, RejectsMalformedFactor) {
  EXPECT_THROW(mqcp_gate({0, {{0, 1.0}}}, 2), InvalidArgument);
  EXPECT_THROW(mqcp_gate({0, {{1, 1.0}, {1, 2.0}}}, 3), InvalidArgument);
  EXPECT_THROW(mqcp_gate({3, {{1, 1.0}}}, 3), InvalidArgument);
}

TEST(Mqcp, GateSpecExpandsProductOfFactors) {
  GateSpec spec{{{0, {{1, kPi}}}, {1, {{2, kPi}}}, {2, {{0, kPi}}}}, std::nullopt};
  PhaseVector g = spec.expand(3);
  EXPECT_TRUE(g.approx_equal(PhaseVector({0, 0, 0, kPi, 0, kPi, kPi, kPi})));
}

TEST(SingleControl, CczHasSecondControl) {
  auto theta = reduced_gate_vector(ccz());
  ControlAnalysis c = assert_single_control(theta);
  EXPECT_TRUE(c.second_control);
  EXPECT_FALSE(c.degenerate);
  EXPECT_FALSE(solve_parity(theta, 3).feasible);
}

TEST(SingleControl, MqcpHasOneControl) {
  PhaseVector gate = mqcp_gate({0, {{1, 0.4}, {2, 1.3}}}, 3);
  EXPECT_FALSE(assert_single_control(reduced_gate_vector(gate)).second_control);
}

TEST(SingleControl, ConstantPatternIsDegenerateControlledPhase) {
  const double phi1 = 0.45;
  std::vector<double> theta{0.0, 0.0, wrap_2pi(-2 * phi1), wrap_2pi(-2 * phi1)};
  ControlAnalysis c = assert_single_control(theta);
  EXPECT_TRUE(c.second_control);
  EXPECT_TRUE(c.degenerate);
  EXPECT_EQ(c.qubit, 1);
  EXPECT_TRUE(solve_parity(theta, 3).feasible);
}

TEST(PairCoefficients, ReadsBondPhases) {
  PhaseVector gate = mqcp_gate({0, {{1, 0.4}, {2, 1.3}}}, 3);
  auto pairs = pair_coefficients(gate);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].j, 0);
  EXPECT_EQ(pairs[0].k, 1);
  EXPECT_NEAR(pairs[0].theta, 0.4, 1e-12);
  EXPECT_NEAR(pairs[1].theta, 1.3, 1e-12);
  EXPECT_THROW(pair_coefficients(ccz()), InvalidArgument);
}

TEST(PairCoefficients, GateOffTheBondGraphRejected) {
  DotArray a(make_dots({1.0, 1.3, 1.7}), {singlet_bond(0, 1, 0.1), singlet_bond(1, 2, 0.1)});
  EXPECT_THROW(bond_phase_targets(a, mqcp_gate({0, {{2, kPi}}}, 3)), InvalidArgument);
}

TEST(Dynamics, ControlledPhaseTime) {
  const Bond b = angled_bond(0, 1, 0.02, 0.3);
  DotArray a(make_dots({1.0, 1.6}), {b});
  const double delta = b.velocity();
  for (double theta : {0.5, kPi, 4.0}) {
    DynamicsResult r = solve_dynamics(a, mqcp_gate({0, {{1, theta}}}, 2), 100.0 / delta);
    const LatticeScan& s = r.branch(LatticeBranch::ModPi);
    ASSERT_TRUE(s.exact());
    EXPECT_NEAR(s.frontier.back().tau, wrap_pi(-theta / 2) / delta, 1e-9 / delta);
    // The resulting ideal gate equals the target up to free phases.
    PhaseVector ideal = ideal_evolution(a, s.frontier.back().tau);
    EXPECT_TRUE(equiv_up_to_free_phase(ideal, mqcp_gate({0, {{1, theta}}}, 2)).equivalent);
  }
}

TEST(Dynamics, HomogeneousChainEndToEndTimes) {
  for (int n = 3; n <= 7; ++n) {
    std::vector<double> z;
    for (int j = 0; j < n; ++j) z.push_back(1.0 + 0.37 * j);
    DotArray a = testing::chain_array(z, 0.01);
    const double delta = a.bonds()[0].velocity();
    std::vector<double> zz(std::size_t{1} << n, 0.0);
    for (std::size_t i = 0; i < zz.size(); ++i)
      if (bit_of(i, 0, n) != bit_of(i, n - 1, n)) zz[i] = kPi;
    const PhaseVector target(zz);
    // Z...Z is local, so every bond's target lies on the mod-pi lattice at tau = k pi / Delta.
    DynamicsResult r = solve_dynamics(a, target, 10.0 / delta);
    for (int k = 0; k < 3; ++k) {
      const double tau = (2 * k + 1) * kPi / delta;
      for (const Bond& b : a.bonds()) EXPECT_LE(lattice_distance(tau * b.velocity(), kPi), 1e-9);
      PhaseVector ideal = ideal_evolution(a, tau);
      PhaseVector shifted = ideal - PhaseVector(std::vector<double>(zz.size(), ideal[0]));
      EXPECT_LE(shifted.max_distance(target), 1e-9) << "n=" << n << " k=" << k;
    }
    EXPECT_TRUE(r.mod_pi.exact());
  }
}

TEST(Dynamics, StellarCzzHomogeneous) {
  const double j = 1e-3;
  DotArray a(make_dots({1.0, 2.3, 5.1}), {angled_bond(0, 1, j, 0.2), angled_bond(0, 2, j, 0.2)});
  const double delta = a.bonds()[0].velocity();
  const PhaseVector czz = mqcp_gate({0, {{1, kPi}, {2, kPi}}}, 3);
  DynamicsResult r = solve_dynamics(a, czz, 10.0 / delta);
  ASSERT_TRUE(r.mod_pi.exact());
  EXPECT_EQ(r.mod_pi.frontier.back().max_residual, 0.0);
  const double tau = r.mod_pi.frontier.back().tau;
  EXPECT_NEAR(tau, kPi / 2 / delta, 1e-9 / delta);
  EXPECT_TRUE(equiv_up_to_free_phase(ideal_evolution(a, tau), czz).equivalent);
  // Exact evolution: the diagonal matches CZZ up to free phases at the J/eps scale.
  SimReport rep = simulate(a, tau);
  Equivalence e = equiv_up_to_free_phase(diagonal_phases(rep.u_exact), czz, 1e-2);
  EXPECT_TRUE(e.equivalent) << e.residual;
}

TEST(Dynamics, ModTwoPiBranchTimeDoesNotRealizeCzz) {
  const double j = 1e-3;
  DotArray a(make_dots({1.0, 2.3, 5.1}), {singlet_bond(0, 1, j), singlet_bond(0, 2, j)});
  const PhaseVector czz = mqcp_gate({0, {{1, kPi}, {2, kPi}}}, 3);
  DynamicsResult r = solve_dynamics(a, czz, 100.0 / j);
  ASSERT_TRUE(r.mod_two_pi.exact());
  const double tau = r.mod_two_pi.frontier.back().tau;
  EXPECT_NEAR(tau * a.bonds()[0].velocity(), kPi, 1e-9);
  EXPECT_FALSE(equiv_up_to_free_phase(ideal_evolution(a, tau), czz).equivalent);
}

TEST(Dynamics, IrrationalVelocitiesOnlyApproach) {
  DotArray a(make_dots({1.0, 2.3, 5.1}),
             {singlet_bond(0, 1, 1.0), singlet_bond(0, 2, std::sqrt(2.0))});
  const PhaseVector czz = mqcp_gate({0, {{1, kPi}, {2, kPi}}}, 3);
  DynamicsResult r = solve_dynamics(a, czz, 200.0);
  const auto& f = r.mod_pi.frontier;
  ASSERT_FALSE(f.empty());
  EXPECT_FALSE(r.mod_pi.exact());
  for (std::size_t i = 1; i < f.size(); ++i) {
    EXPECT_GT(f[i].tau, f[i - 1].tau);
    EXPECT_LT(f[i].max_residual, f[i - 1].max_residual);
  }
}

TEST(Dynamics, ZeroVelocityBondWithNonzeroTarget) {
  const double r = std::sqrt(0.5);
  DotArray a(make_dots({1.0, 1.5}), {Bond(0, 1, 1.0, {r, 0}, {0, r})});
  try {
    solve_dynamics(a, mqcp_gate({0, {{1, kPi}}}, 2), 10.0);
    FAIL() << "expected NoBondVelocity";
  } catch (const NoBondVelocity& e) {
    EXPECT_EQ(e.bond(), 0u);
  }
  // Identity target is fine on a disconnected bond.
  EXPECT_NO_THROW(solve_dynamics(a, PhaseVector::zeros(2), 10.0));
}

TEST(Dynamics, ScanLatticeBestLatticePoint) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.2, 2.0), g(0.0, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v{u(rng), -u(rng), u(rng)}, goal{g(rng), g(rng), g(rng)};
    const double tmax = 12.0;
    LatticeScan s = scan_lattice(v, goal, kPi, tmax);
    auto score = [&](double tau) {
      double worst = 0.0;
      for (std::size_t w = 0; w < 3; ++w) worst = std::max(worst, lattice_distance(tau * v[w] - goal[w], kPi));
      return worst;
    };
    double best = score(0.0);
    for (std::size_t w = 0; w < 3; ++w)
      for (int m = -40; m <= 40; ++m) {
        const double tau = (goal[w] + m * kPi) / v[w];
        if (tau >= 0.0 && tau <= tmax) best = std::min(best, score(tau));
      }
    EXPECT_NEAR(s.frontier.back().max_residual, best, 1e-12);
  }
}

TEST(Dynamics, ScanLatticeRationalExactHit) {
  // 5:3 velocities; tau = 7 hits phases 3.5 and 2.1 exactly.
  std::vector<double> v{0.5, 0.3}, goal{wrap_pi(3.5), wrap_pi(2.1)};
  LatticeScan s = scan_lattice(v, goal, kPi, 100.0);
  ASSERT_TRUE(s.exact());
  EXPECT_LE(s.frontier.back().tau, 7.0 + 1e-9);
  for (std::size_t w = 0; w < 2; ++w)
    EXPECT_LE(lattice_distance(s.frontier.back().tau * v[w] - goal[w], kPi), 1e-9);
}

Decomposition six_qubit_tree(double tau, std::vector<Bond> bonds) {
  std::vector<double> z{1.0, 1.2, 1.45, 1.7, 2.0, 2.4};
  return decompose_intrinsic(DotArray(make_dots(z), std::move(bonds)), tau);
}

TEST(Decomposition, SixQubitArray) {
  const double j = 0.01;
  std::vector<Bond> bonds{singlet_bond(0, 1, j), singlet_bond(0, 2, j), singlet_bond(0, 3, j),
                          singlet_bond(1, 4, j), singlet_bond(1, 5, j)};
  const double tau = kPi / 2 / bonds[0].velocity();
  Decomposition d = six_qubit_tree(tau, bonds);
  const std::vector<double> expected{3 * kPi / 2, 3 * kPi / 2, kPi / 2, kPi / 2, kPi / 2, kPi / 2};
  for (std::size_t q = 0; q < 6; ++q) EXPECT_LE(phase_distance(d.corrections.local[q], expected[q]), 1e-12);
  for (const MqcpFactor& f : d.factors.factors) EXPECT_NEAR(f.targets[0].theta, kPi, 1e-12);

  std::mt19937_64 rng(8);
  for (int shuffle = 0; shuffle < 100; ++shuffle) {
    std::vector<Bond> perm = bonds;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Bond& b : perm)
      if (rng() & 1) b = Bond(b.k(), b.j(), b.exchange(), -std::conj(b.t()), b.s());
    Decomposition e = six_qubit_tree(tau, perm);
    EXPECT_EQ(e.corrections.local, d.corrections.local);
    EXPECT_EQ(e.corrections.global, d.corrections.global);
    ASSERT_EQ(e.factors.factors.size(), d.factors.factors.size());
    for (std::size_t w = 0; w < e.factors.factors.size(); ++w) {
      EXPECT_EQ(e.factors.factors[w].control, d.factors.factors[w].control);
      EXPECT_EQ(e.factors.factors[w].targets[0].dot, d.factors.factors[w].targets[0].dot);
      EXPECT_EQ(e.factors.factors[w].targets[0].theta, d.factors.factors[w].targets[0].theta);
    }
  }
}

TEST(Decomposition, ReassemblesIdealEvolution) {
  std::mt19937_64 rng(9);
  for (int n = 2; n <= 6; ++n) {
    DotArray a = testing::random_array(rng, n, testing::complete_graph(n), 0.01);
    const double tau = 137.0;
    Decomposition d = decompose_intrinsic(a, tau);
    PhaseVector total = d.factors.expand(n) + d.corrections.expand();
    EXPECT_LE(total.max_distance(ideal_evolution(a, tau)), 1e-9);
  }
}

TEST(Decomposition, SingleBond) {
  const Bond b = angled_bond(0, 1, 0.05, 0.4);
  Decomposition d = decompose_intrinsic(DotArray(make_dots({1.0, 1.5}), {b}), 3.0);
  ASSERT_EQ(d.factors.factors.size(), 1u);
  EXPECT_NEAR(d.factors.factors[0].targets[0].theta, wrap_2pi(-2 * 3.0 * b.velocity()), 1e-15);
}

TEST(Decomposition, TriangleLogicalZ) {
  const double j = 0.01;
  DotArray a(make_dots({1.0, 1.3, 1.7}), {singlet_bond(0, 1, j), singlet_bond(1, 2, j), singlet_bond(0, 2, j)});
  const double tau = kPi / 2 / a.bonds()[0].velocity();
  Decomposition d = decompose_intrinsic(a, tau);
  EXPECT_TRUE(d.factors.expand(3).approx_equal(PhaseVector({0, 0, 0, kPi, 0, kPi, kPi, kPi})));
}

TEST(Equivalence, IdentityAndShift) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int n = 1; n <= 6; ++n) {
    std::vector<double> raw(std::size_t{1} << n);
    for (double& x : raw) x = u(rng);
    PhaseVector target(raw);
    Equivalence same = equiv_up_to_free_phase(target, target);
    EXPECT_TRUE(same.equivalent);
    EXPECT_EQ(same.residual, 0.0);
    for (double x : same.shift.local) EXPECT_EQ(x, 0.0);
    FreePhase f = testing::random_free_phase(rng, n);
    Equivalence e = equiv_up_to_free_phase(target + f.expand(), target);
    EXPECT_TRUE(e.equivalent);
    EXPECT_LE(phase_distance(e.shift.global, f.global), 1e-9);
    for (int j = 0; j < n; ++j) EXPECT_LE(phase_distance(e.shift.local[j], f.local[j]), 1e-9);
  }
}

TEST(Equivalence, InvariantUnderAddedFreePhase) {
  std::mt19937_64 rng(15);
  PhaseVector u = mqcp_gate({0, {{1, 1.0}, {2, 0.3}}}, 3) + PhaseVector({0, 0, 0, 0, 0, 0, 0, 0.2});
  PhaseVector target = mqcp_gate({0, {{1, 1.0}, {2, 0.3}}}, 3);
  Equivalence base = equiv_up_to_free_phase(u, target);
  EXPECT_FALSE(base.equivalent);
  for (int i = 0; i < 20; ++i) {
    Equivalence e = equiv_up_to_free_phase(u + testing::random_free_phase(rng, 3).expand(), target);
    EXPECT_EQ(e.equivalent, base.equivalent);
    EXPECT_NEAR(e.residual, base.residual, 1e-9);
  }
}

}  // namespace
}  // namespace qdgates
