#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdgates/core_model.hpp"
#include "qdgates/errors.hpp"
#include "qdgates/gate_algebra.hpp"
#include "qdgates/nnls.hpp"
#include "qdgates/phase.hpp"
#include "qdgates/pulse.hpp"

namespace qdgates {

// +1 / -1 per dot: the spin label after the frame's bit flips.
using DotSigns = std::vector<int>;
// +1 / -1 per bond: a_w = s_j s_k.
using BondSigns = std::vector<int>;

inline DotSigns frame_signs(const PauliAssignment& q) {
  DotSigns s(static_cast<std::size_t>(q.size()));
  for (int j = 0; j < q.size(); ++j) s[static_cast<std::size_t>(j)] = q.sign(j);
  return s;
}

inline BondSigns bond_signs(const DotArray& array, const DotSigns& s) {
  if (static_cast<int>(s.size()) != array.size())
    throw InvalidArgument("one sign per dot required");
  BondSigns a;
  a.reserve(array.bonds().size());
  for (const Bond& b : array.bonds())
    a.push_back(s[static_cast<std::size_t>(b.j())] * s[static_cast<std::size_t>(b.k())]);
  return a;
}

inline PhaseRateVector conjugated_grid_vector(const DotArray& array, const PauliAssignment& q) {
  if (q.size() != array.size()) throw InvalidArgument("assignment length differs from dot count");
  PhaseRateVector out{array.size(), std::vector<double>(array.dimension(), 0.0)};
  for (const Bond& b : array.bonds()) {
    const bool swapped = q.sign(b.j()) * q.sign(b.k()) < 0;
    add_bond_rates(swapped ? b.with_channels_swapped() : b, array.size(), out.values);
  }
  return out;
}

struct AssignmentSet {
  std::vector<BondSigns> vectors;     // distinct, in order of first appearance
  std::vector<DotSigns> dot_signs;    // one representative flip pattern each
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  int rank = 0;
  bool linear_span = false;
  std::optional<bool> positive_span;  // omitted for very large sets
};

inline Eigen::MatrixXd sign_matrix(const std::vector<BondSigns>& columns, std::size_t n_bonds) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n_bonds), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (std::size_t w = 0; w < n_bonds; ++w)
      a(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(c)) = columns[c][w];
  return a;
}

inline bool positively_spans(const Eigen::MatrixXd& a, int rank) {
  if (rank < a.rows()) return false;
  if (a.cols() == 0) return a.rows() == 0;
  // Full rank plus a strictly positive null combination: A (1 + l) = 0, l >= 0.
  const Eigen::VectorXd rhs = -a * Eigen::VectorXd::Ones(a.cols());
  const NnlsResult r = nnls(a, rhs);
  return r.residual <= 1e-9 * std::max(1.0, rhs.norm());
}

inline AssignmentSet assignment_vectors(const DotArray& array,
                                        std::size_t positive_span_limit = 1u << 14) {
  const int n = array.size();
  AssignmentSet out;
  out.n_b = array.bonds().size();
  std::map<BondSigns, std::size_t> seen;
  const std::size_t subsets = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    DotSigns s(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(j)] = (mask >> j) & 1u ? -1 : 1;
    BondSigns a = bond_signs(array, s);
    if (seen.emplace(a, out.vectors.size()).second) {
      out.vectors.push_back(std::move(a));
      out.dot_signs.push_back(std::move(s));
    }
  }
  out.n_a = out.vectors.size();
  if (out.n_b == 0) {
    out.linear_span = true;
    out.positive_span = true;
    return out;
  }
  const Eigen::MatrixXd a = sign_matrix(out.vectors, out.n_b);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  out.rank = static_cast<int>(lu.rank());
  out.linear_span = out.rank == static_cast<int>(out.n_b);
  if (out.n_a * out.n_b <= positive_span_limit) out.positive_span = positively_spans(a, out.rank);
  return out;
}

struct CalibrationTarget {
  std::vector<double> phases;      // phi_w
  std::vector<double> velocities;  // Delta_w
};

inline CalibrationTarget make_calibration_target(const DotArray& array,
                                                 std::vector<double> bond_phases) {
  if (bond_phases.size() != array.bonds().size())
    throw InvalidArgument("one target phase per bond required");
  CalibrationTarget t{std::move(bond_phases), {}};
  for (const Bond& b : array.bonds()) t.velocities.push_back(b.velocity());
  return t;
}

inline CalibrationTarget make_calibration_target(const DotArray& array, const PhaseVector& gate) {
  return make_calibration_target(array, bond_phase_targets(array, gate));
}

struct IntervalOptions {
  int offset_bound = 8;
  double tol = 1e-9;
  LatticeBranch branch = LatticeBranch::ModPi;
  std::size_t exhaustive_order_limit = 8;  // stages reordered by brute force up to this count
};

struct IntervalSolution {
  PulseSchedule schedule;
  std::vector<int> offsets;               // m_w per bond
  std::vector<BondSigns> stage_signs;     // per stage, per bond
  double total_time = 0.0;
  double residual = 0.0;                  // max per-bond phase error
  std::size_t combinations_tried = 0;
};

namespace detail {

inline int class_distance(const DotSigns& from, const DotSigns& to, bool* flip_all) {
  int same = 0;
  for (std::size_t j = 0; j < from.size(); ++j) same += from[j] != to[j];
  const int n = static_cast<int>(from.size());
  *flip_all = n - same < same;
  return std::min(same, n - same);
}

inline DotSigns negated(DotSigns s) {
  for (int& v : s) v = -v;
  return s;
}

// Orders stage states to minimize the number of boundary flips, starting
// from the all-up frame. Returns the concrete dot-sign states visited.
inline std::vector<DotSigns> order_states(std::vector<DotSigns> states, std::size_t limit,
                                          std::vector<std::size_t>& order) {
  const std::size_t n = states.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const DotSigns start(states.empty() ? 0 : states.front().size(), 1);
  auto cost = [&](const std::vector<std::size_t>& perm) {
    DotSigns cur = start;
    int total = 0;
    for (std::size_t p : perm) {
      bool flip;
      total += class_distance(cur, states[p], &flip);
      cur = flip ? negated(states[p]) : states[p];
    }
    return total;
  };
  if (n <= limit) {
    std::vector<std::size_t> best = idx;
    int best_cost = cost(idx);
    while (std::next_permutation(idx.begin(), idx.end())) {
      int c = cost(idx);
      if (c < best_cost) {
        best_cost = c;
        best = idx;
      }
    }
    order = best;
  } else {
    std::vector<bool> used(n, false);
    DotSigns cur = start;
    order.clear();
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t pick = n;
      int pick_cost = std::numeric_limits<int>::max();
      for (std::size_t p = 0; p < n; ++p) {
        if (used[p]) continue;
        bool flip;
        int c = class_distance(cur, states[p], &flip);
        if (c < pick_cost) {
          pick_cost = c;
          pick = p;
        }
      }
      used[pick] = true;
      order.push_back(pick);
      bool flip;
      class_distance(cur, states[pick], &flip);
      cur = flip ? negated(states[pick]) : states[pick];
    }
  }
  std::vector<DotSigns> visited;
  DotSigns cur = start;
  for (std::size_t p : order) {
    bool flip;
    class_distance(cur, states[p], &flip);
    cur = flip ? negated(states[p]) : states[p];
    visited.push_back(cur);
  }
  return visited;
}

inline std::vector<PulseOp> flips_between(const DotSigns& from, const DotSigns& to) {
  std::vector<PulseOp> out;
  for (std::size_t j = 0; j < from.size(); ++j)
    if (from[j] != to[j]) out.push_back({static_cast<int>(j), Pauli::X});
  return out;
}

}  // namespace detail

inline std::vector<BondSigns> schedule_bond_signs(const DotArray& array,
                                                  const PulseSchedule& schedule) {
  std::vector<BondSigns> out;
  for (const PauliAssignment& q : schedule.frames())
    out.push_back(bond_signs(array, frame_signs(q)));
  return out;
}

// Per-bond accumulated conditional phase sum_n a_w^(n) tau_n Delta_w.
inline std::vector<double> accumulated_bond_phases(const DotArray& array,
                                                   const PulseSchedule& schedule) {
  const auto signs = schedule_bond_signs(array, schedule);
  std::vector<double> out(array.bonds().size(), 0.0);
  for (std::size_t w = 0; w < out.size(); ++w) {
    double acc = 0.0;
    for (std::size_t n = 0; n < schedule.size(); ++n)
      acc += signs[n][w] * schedule.stages()[n].tau;
    out[w] = acc * array.bonds()[w].velocity();
  }
  return out;
}

inline double lattice_period(LatticeBranch branch) {
  return branch == LatticeBranch::ModPi ? kPi : kTwoPi;
}

inline double lattice_goal(double phase, LatticeBranch branch) {
  return branch == LatticeBranch::ModPi ? wrap_pi(phase) : wrap_2pi(2.0 * phase);
}

inline IntervalSolution solve_intervals(const DotArray& array, const CalibrationTarget& target,
                                        std::span<const DotSigns> assignments,
                                        const IntervalOptions& opts = {}) {
  const std::size_t nb = array.bonds().size();
  if (target.phases.size() != nb || target.velocities.size() != nb)
    throw InvalidArgument("calibration target must list every bond");
  if (assignments.empty()) throw InvalidArgument("at least one assignment is required");
  if (opts.offset_bound < 0) throw InvalidArgument("offset bound must be >= 0");
  const double period = lattice_period(opts.branch);

  std::vector<std::size_t> active;
  for (std::size_t w = 0; w < nb; ++w) {
    if (zero_velocity(target.velocities[w], array.bonds()[w].exchange())) {
      if (lattice_distance(target.phases[w], kPi) > opts.tol)
        throw NoBondVelocity(w, "bond " + std::to_string(w) +
                                    " has zero velocity but a nonzero target phase");
      continue;
    }
    active.push_back(w);
  }

  // Distinct columns, each with its dot-sign representative.
  std::vector<DotSigns> reps;
  std::vector<BondSigns> columns;
  for (const DotSigns& s : assignments) {
    BondSigns a = bond_signs(array, s);
    if (std::find(columns.begin(), columns.end(), a) == columns.end()) {
      columns.push_back(std::move(a));
      reps.push_back(s);
    }
  }
  const auto na = static_cast<Eigen::Index>(active.size());
  const auto ns = static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd a(na, ns);
  for (Eigen::Index r = 0; r < na; ++r)
    for (Eigen::Index c = 0; c < ns; ++c)
      a(r, c) = columns[static_cast<std::size_t>(c)][active[static_cast<std::size_t>(r)]];

  // Candidate right-hand sides per active bond, sorted by |r|.
  struct Option {
    int m;
    double r;
  };
  std::vector<std::vector<Option>> options(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    const std::size_t w = active[i];
    const double g = lattice_goal(target.phases[w], opts.branch);
    for (int m = -opts.offset_bound; m <= opts.offset_bound; ++m)
      options[i].push_back({m, (g + m * period) / target.velocities[w]});
    std::stable_sort(options[i].begin(), options[i].end(), [](const Option& x, const Option& y) {
      return std::abs(x.r) < std::abs(y.r);
    });
  }

  double best_total = std::numeric_limits<double>::infinity();
  std::vector<int> best_offsets;
  Eigen::VectorXd best_tau;
  double best_residual = std::numeric_limits<double>::infinity();
  std::size_t tried = 0;
  std::vector<int> offs(active.size(), 0);
  Eigen::VectorXd rhs(na);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ns);

  auto leaf = [&]() {
    ++tried;
    const NnlsResult fit = nnls(a, rhs);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    best_residual = std::min(best_residual, fit.residual / scale);
    if (fit.residual > opts.tol * scale) return;
    LpResult lp = linear_program(ones, a, rhs);
    Eigen::VectorXd tau = lp.feasible ? lp.x : fit.x;
    if (lp.feasible && (a * tau - rhs).norm() > opts.tol * scale) tau = fit.x;
    const double total = tau.sum();
    const double slack = 1e-12 * std::max(1.0, total);
    auto weight = [](const std::vector<int>& m) {
      int k = 0;
      for (int v : m) k += std::abs(v);
      return k;
    };
    const bool tie = total <= best_total + slack;
    const bool smaller_offsets =
        weight(offs) < weight(best_offsets) ||
        (weight(offs) == weight(best_offsets) && offs < best_offsets);
    if (!std::isfinite(best_total) || total < best_total - slack || (tie && smaller_offsets)) {
      best_total = total;
      best_offsets = offs;
      best_tau = tau;
    }
  };

  auto dfs = [&](auto&& self, std::size_t i, double bound) -> void {
    if (i == active.size()) {
      leaf();
      return;
    }
    for (const Option& o : options[i]) {
      const double lb = std::max(bound, std::abs(o.r));
      if (lb > best_total * (1.0 + 1e-12)) break;
      offs[i] = o.m;
      rhs(static_cast<Eigen::Index>(i)) = o.r;
      self(self, i + 1, lb);
    }
  };
  dfs(dfs, 0, 0.0);

  if (!std::isfinite(best_total))
    throw Infeasible("no lattice offsets within +/-" + std::to_string(opts.offset_bound) +
                         " admit nonnegative durations",
                     best_residual);

  // Keep stages with nonzero duration and order them to minimize flips.
  const double drop = 1e-14 * std::max(1.0, best_total);
  std::vector<DotSigns> states;
  std::vector<double> durations;
  for (Eigen::Index c = 0; c < ns; ++c)
    if (best_tau(c) > drop) {
      states.push_back(reps[static_cast<std::size_t>(c)]);
      durations.push_back(best_tau(c));
    }
  std::vector<std::size_t> order;
  std::vector<DotSigns> visited = detail::order_states(states, opts.exhaustive_order_limit, order);

  std::vector<Stage> stages;
  DotSigns cur(static_cast<std::size_t>(array.size()), 1);
  for (std::size_t p = 0; p < order.size(); ++p) {
    auto flips = detail::flips_between(cur, visited[p]);
    if (!flips.empty()) {
      if (stages.empty()) stages.push_back({0.0, {}});
      stages.back().pulses = std::move(flips);
    }
    stages.push_back({durations[order[p]], {}});
    cur = visited[p];
  }
  if (stages.empty()) stages.push_back({0.0, {}});

  IntervalSolution out;
  out.schedule = PulseSchedule(array.size(), std::move(stages));
  out.offsets.assign(nb, 0);
  for (std::size_t i = 0; i < active.size(); ++i) out.offsets[active[i]] = best_offsets[i];
  out.stage_signs = schedule_bond_signs(array, out.schedule);
  out.total_time = out.schedule.total_time();
  out.combinations_tried = tried;
  const auto phases = accumulated_bond_phases(array, out.schedule);
  for (std::size_t w = 0; w < nb; ++w) {
    const double g = lattice_goal(target.phases[w], opts.branch);
    out.residual = std::max(out.residual, lattice_distance(phases[w] - g, period));
  }
  return out;
}

inline IntervalSolution solve_intervals(const DotArray& array, const CalibrationTarget& target,
                                        const IntervalOptions& opts = {}) {
  const AssignmentSet set = assignment_vectors(array);
  return solve_intervals(array, target, set.dot_signs, opts);
}

struct ExtraPhases {
  std::vector<double> sigma_z;  // phi'_j multiplying sigma^Z_j
  FreePhase free;               // the same phases as a free phase map
  PauliAssignment net;
};

inline ExtraPhases extra_local_phases(const PulseSchedule& schedule, const DotArray& array) {
  if (schedule.n_qubits() != array.size())
    throw InvalidArgument("schedule and array qubit counts differ");
  const int n = array.size();
  const auto frames = schedule.frames();
  ExtraPhases out;
  out.net = schedule.net();
  out.sigma_z.assign(static_cast<std::size_t>(n), 0.0);
  for (std::size_t s = 0; s < frames.size(); ++s)
    for (int j = 0; j < n; ++j)
      out.sigma_z[static_cast<std::size_t>(j)] += 0.5 * (out.net.sign(j) - frames[s].sign(j)) *
                                                  array.zeeman(j) * schedule.stages()[s].tau;
  out.free = FreePhase::zero(n);
  for (int j = 0; j < n; ++j) {
    out.free.global += out.sigma_z[static_cast<std::size_t>(j)];
    out.free.local[static_cast<std::size_t>(j)] = -2.0 * out.sigma_z[static_cast<std::size_t>(j)];
  }
  return out;
}

// First-order diagonal phases sum_n tau_n Lambda^(n) of a pulsed evolution.
inline PhaseVector pulsed_ideal_phases(const DotArray& array, const PulseSchedule& schedule) {
  std::vector<double> acc(array.dimension(), 0.0);
  const auto frames = schedule.frames();
  for (std::size_t s = 0; s < frames.size(); ++s) {
    const PhaseRateVector lam = conjugated_grid_vector(array, frames[s]);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += schedule.stages()[s].tau * lam.values[i];
  }
  return PhaseVector(std::move(acc));
}

struct DdOptions {
  int repetitions = 4;
  int budget = 4;  // maximum pulses per qubit in one base period
};

// Repeats a base period closed by a global flip, relabelling each qubit's
// successive pulses X, Y, X, Y, ...
inline PulseSchedule weave_dd(const PulseSchedule& schedule, const DdOptions& opts = {}) {
  const int n = schedule.n_qubits();
  if (opts.repetitions < 1 || opts.repetitions % 2 != 0)
    throw InvalidArgument("DD repetitions must be a positive even number");
  std::vector<Stage> base = schedule.stages();
  if (base.empty()) base.push_back({0.0, {}});
  for (const Stage& s : base)
    for (const PulseOp& p : s.pulses)
      if (p.pauli != Pauli::X && p.pauli != Pauli::Y)
        throw InvalidArgument("DD weaving expects X or Y pulses only");
  // Close the period on the all-flipped frame, which leaves every bond sign unchanged.
  PauliAssignment net = schedule.net();
  std::vector<PulseOp> closing;
  for (int j = 0; j < n; ++j)
    if (net.sign(j) > 0) closing.push_back({j, Pauli::X});
  for (const PulseOp& p : closing) base.back().pulses.push_back(p);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (const Stage& s : base)
    for (const PulseOp& p : s.pulses) ++counts[static_cast<std::size_t>(p.dot)];
  for (int j = 0; j < n; ++j)
    if (counts[static_cast<std::size_t>(j)] > opts.budget)
      throw BudgetExceeded("qubit " + std::to_string(j) + " needs " +
                           std::to_string(counts[static_cast<std::size_t>(j)]) +
                           " pulses per period, budget is " + std::to_string(opts.budget));
  std::vector<Stage> woven;
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  const double scale = 1.0 / opts.repetitions;
  for (int r = 0; r < opts.repetitions; ++r)
    for (const Stage& s : base) {
      Stage t{s.tau * scale, {}};
      for (const PulseOp& p : s.pulses) {
        int& k = seen[static_cast<std::size_t>(p.dot)];
        t.pulses.push_back({p.dot, k % 2 == 0 ? Pauli::X : Pauli::Y});
        ++k;
      }
      woven.push_back(std::move(t));
    }
  return PulseSchedule(n, std::move(woven));
}

// Pulse times of one qubit, measured from the start of the schedule.
inline std::vector<double> pulse_times(const PulseSchedule& schedule, int dot) {
  std::vector<double> out;
  double t = 0.0;
  for (const Stage& s : schedule.stages()) {
    t += s.tau;
    for (const PulseOp& p : s.pulses)
      if (p.dot == dot) out.push_back(t);
  }
  return out;
}

struct KSpacePath {
  std::vector<double> times;                 // stage boundaries, starting at 0
  std::vector<std::vector<double>> points;   // per time, per bond: phase / pi
  std::vector<double> targets;               // per bond: target phase / pi, folded

  static double fold(double x) { return wrap_period(x, 1.0); }

  double endpoint_distance() const {
    double worst = 0.0;
    for (std::size_t w = 0; w < targets.size(); ++w)
      worst = std::max(worst, lattice_distance(points.back()[w] - targets[w], 1.0));
    return worst;
  }

  bool reaches_target(double tol = 1e-9) const { return endpoint_distance() <= tol; }
};

inline KSpacePath kspace_path(const DotArray& array, const PulseSchedule& schedule,
                              const CalibrationTarget& target) {
  const std::size_t nb = array.bonds().size();
  if (target.velocities.size() != nb) throw InvalidArgument("target must list every bond");
  const auto signs = schedule_bond_signs(array, schedule);
  KSpacePath path;
  for (std::size_t w = 0; w < nb; ++w) path.targets.push_back(KSpacePath::fold(target.phases[w] / kPi));
  std::vector<double> cur(nb, 0.0);
  double t = 0.0;
  path.times.push_back(t);
  path.points.push_back(cur);
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    const double tau = schedule.stages()[s].tau;
    if (tau == 0.0) continue;
    t += tau;
    for (std::size_t w = 0; w < nb; ++w) cur[w] += signs[s][w] * tau * target.velocities[w] / kPi;
    path.times.push_back(t);
    path.points.push_back(cur);
  }
  return path;
}

struct ClosestApproach {
  double distance = std::numeric_limits<double>::infinity();  // max-norm, units of pi
  double time = 0.0;
};

// Exact minimum over t in [0, horizon] of max_w dist(t Delta_w / pi - target_w, Z)
// for an unpulsed straight path.
inline ClosestApproach kspace_closest_approach(const CalibrationTarget& target, double horizon) {
  const std::size_t nb = target.velocities.size();
  std::vector<double> rate(nb), goal(nb);
  for (std::size_t w = 0; w < nb; ++w) {
    rate[w] = target.velocities[w] / kPi;
    goal[w] = target.phases[w] / kPi;
  }
  auto dist = [&](double t) {
    double worst = 0.0;
    for (std::size_t w = 0; w < nb; ++w) worst = std::max(worst, lattice_distance(t * rate[w] - goal[w], 1.0));
    return worst;
  };
  // Each distance is piecewise linear with kinks where t rate - goal hits Z/2.
  std::vector<double> kinks{0.0, horizon};
  for (std::size_t w = 0; w < nb; ++w) {
    if (rate[w] == 0.0) continue;
    const double v = rate[w];
    double lo = std::ceil(2.0 * std::min(-goal[w], horizon * v - goal[w]));
    double hi = std::floor(2.0 * std::max(-goal[w], horizon * v - goal[w]));
    for (double k = lo; k <= hi; k += 1.0) {
      double t = (0.5 * k + goal[w]) / v;
      if (t >= 0.0 && t <= horizon) kinks.push_back(t);
    }
  }
  std::sort(kinks.begin(), kinks.end());
  ClosestApproach best;
  auto consider = [&](double t) {
    double d = dist(t);
    if (d < best.distance) best = {d, t};
  };
  for (std::size_t i = 0; i + 1 < kinks.size(); ++i) {
    const double a = kinks[i], b = kinks[i + 1];
    consider(a);
    if (b <= a) continue;
    // On (a, b) each distance is linear: slope +-|rate|. The convex maximum
    // attains its minimum at an endpoint or where a rising and a falling line cross.
    const double mid = 0.5 * (a + b);
    std::vector<std::pair<double, double>> lines;  // value at mid, slope
    for (std::size_t w = 0; w < nb; ++w) {
      const double x = mid * rate[w] - goal[w];
      const double r = wrap_period(x, 1.0);
      const double slope = r < 0.5 ? rate[w] : -rate[w];
      lines.push_back({std::min(r, 1.0 - r), slope});
    }
    for (const auto& up : lines)
      for (const auto& down : lines) {
        if (!(up.second > 0.0 && down.second < 0.0)) continue;
        const double t = mid + (down.first - up.first) / (up.second - down.second);
        if (t > a && t < b) consider(t);
      }
  }
  consider(kinks.back());
  return best;
}

// Evolution-time estimate for n targets at infidelity epsilon without calibration.
inline double time_upper_bound(int n_targets, double epsilon, double v_min) {
  if (n_targets < 2) throw InvalidArgument("time bound needs n >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(v_min > 0.0)) throw InvalidArgument("v_min must be positive");
  const double n = n_targets;
  return 1.0 / (std::sqrt(n - 1.0) * v_min) * std::tgamma(n / 2.0) *
         std::pow((8.0 / kPi) / (epsilon * (n - 1.0)), (n - 2.0) / 2.0);
}

// Smallest nonzero |Delta_w| / 2 pi.
inline double slowest_bond_rate(const DotArray& array) {
  double v = std::numeric_limits<double>::infinity();
  for (const Bond& b : array.bonds()) {
    const double d = std::abs(b.velocity());
    if (!zero_velocity(d, b.exchange())) v = std::min(v, d / kTwoPi);
  }
  if (!std::isfinite(v)) throw InvalidArgument("array has no bond with nonzero velocity");
  return v;
}

}  // namespace qdgates
