// qdgates: command-line front end for the gate calculus, simulator and
// calibration. Exit codes: 0 success, 2 infeasible, 1 input or runtime error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qdgates/io.hpp"
#include "qdgates/qdgates.hpp"

namespace {

using namespace qdgates;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct RunConfig {
  std::string array_path;
  std::string gate_path;
  int qubits = 0;
  std::optional<double> tau;
  std::optional<double> horizon;
  std::string sweep;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string out_dir;
  bool dd = false;
  int offset_bound = 8;
  double tol = kPhaseTol;
  double sim_tol = 1e-2;
  // apps
  std::string which;
  int targets = 2;
  std::string basis = "Z";
  int trials = 1000;
};

struct SweepGrid {
  double lo = 0.0, hi = 0.0;
  int steps = 0;

  std::vector<double> ratios() const {
    std::vector<double> out;
    for (int i = 0; i < steps; ++i) {
      const double f = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
      out.push_back(i == 0 ? lo : i == steps - 1 ? hi : lo * std::pow(hi / lo, f));
    }
    return out;
  }
};

SweepGrid parse_sweep(const std::string& text) {
  SweepGrid g;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> g.lo >> c1 >> g.hi >> c2 >> g.steps) || c1 != ':' || c2 != ':' || !in.eof())
    throw InvalidArgument("--sweep expects lo:hi:steps");
  if (!(g.lo > 0.0) || !(g.hi >= g.lo) || g.steps < 1)
    throw InvalidArgument("--sweep needs 0 < lo <= hi and steps >= 1");
  return g;
}

void emit(const RunConfig& cfg, const std::string& name, const std::string& text) {
  if (cfg.out_dir.empty()) return;
  std::filesystem::create_directories(cfg.out_dir);
  io::write_text_file((std::filesystem::path(cfg.out_dir) / name).string(), text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

DotArray load_array(const RunConfig& cfg) {
  if (cfg.array_path.empty()) throw InvalidArgument("--array is required");
  return io::array_from_json(io::read_json_file(cfg.array_path));
}

GateSpec load_gate(const RunConfig& cfg, int n_qubits) {
  if (cfg.gate_path.empty()) throw InvalidArgument("--gate is required");
  const json doc = io::read_json_file(cfg.gate_path);
  try {
    return io::gate_from_json(doc, n_qubits);
  } catch (const ParseError& e) {
    throw ParseError(cfg.gate_path + e.location(), e.what());
  }
}

void check_tolerances(const RunConfig& cfg) {
  if (!(cfg.tol > 0.0) || !(cfg.sim_tol > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (cfg.jobs < 1) throw InvalidArgument("--jobs must be >= 1");
  if (cfg.offset_bound < 0) throw InvalidArgument("--offset-bound must be >= 0");
}

double default_horizon(const DotArray& array) {
  return 1e3 * kPi / (kTwoPi * slowest_bond_rate(array));
}

int cmd_check(const RunConfig& cfg) {
  int n = cfg.qubits;
  if (!cfg.array_path.empty()) n = load_array(cfg).size();
  if (n < 2) throw InvalidArgument("check needs --array or --qubits >= 2");
  const GateSpec spec = load_gate(cfg, n);
  const PhaseVector gate = spec.expand(n);
  const std::vector<double> theta = reduced_gate_vector(gate);
  const ParitySolution p = solve_parity(theta, n, cfg.tol);
  const ControlAnalysis c = assert_single_control(theta, cfg.tol);
  json out = io::parity_to_json(p, c);
  out["n_qubits"] = n;
  out["reduced_gate"] = theta;
  json factors = json::array();
  for (const MqcpFactor& f : spec.factors)
    factors.push_back({{"control", f.control}, {"phases", io::free_phase_to_json(mqcp_phase_solution(f, n))}});
  if (!spec.factors.empty()) out["mqcp_phases"] = factors;
  out["message"] = p.feasible ? "feasible" : "infeasible by parity";
  std::cout << dump(out);
  emit(cfg, "check.json", dump(out));
  return p.feasible ? kExitOk : kExitInfeasible;
}

int cmd_solve(const RunConfig& cfg) {
  const DotArray array = load_array(cfg);
  const PhaseVector gate = load_gate(cfg, array.size()).expand(array.size());
  DynamicsOptions opts;
  opts.tol = cfg.tol;
  const double horizon = cfg.horizon ? *cfg.horizon : default_horizon(array);
  const DynamicsResult r = solve_dynamics(array, gate, horizon, opts);
  json out{{"bond_targets", bond_phase_targets(array, gate, cfg.tol)},
           {"mod_pi", io::scan_to_json(r.mod_pi)},
           {"mod_two_pi", io::scan_to_json(r.mod_two_pi)}};
  const bool exact = r.mod_pi.exact(cfg.tol);
  if (exact) {
    const double tau = r.mod_pi.frontier.back().tau;
    out["tau"] = tau;
    out["decomposition"] = io::decomposition_to_json(decompose_intrinsic(array, tau));
    out["ideal_equivalence"] =
        io::equivalence_to_json(equiv_up_to_free_phase(ideal_evolution(array, tau), gate, cfg.tol));
  }
  out["message"] = exact ? "exact time found" : "no exact time within horizon; see frontier";
  std::cout << dump(out);
  emit(cfg, "solve.json", dump(out));
  return exact ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const RunConfig& cfg) {
  const DotArray array = load_array(cfg);
  if (array.size() > kMaxSimulatedQubits) throw InvalidArgument("simulation supports at most 12 dots");
  double tau = 0.0;
  std::optional<PhaseVector> gate;
  if (!cfg.gate_path.empty()) gate = load_gate(cfg, array.size()).expand(array.size());
  if (cfg.tau) {
    tau = *cfg.tau;
  } else {
    if (!gate) throw InvalidArgument("simulate needs --tau or --gate");
    DynamicsOptions opts;
    opts.tol = cfg.tol;
    const LatticeScan scan = solve_dynamics(array, *gate, default_horizon(array), opts).mod_pi;
    if (!scan.exact(cfg.tol)) {
      std::cerr << "no exact gate time within the default horizon\n";
      return kExitInfeasible;
    }
    tau = scan.frontier.back().tau;
  }
  const SimReport report = simulate(array, tau);
  json out = io::sim_report_to_json(report);
  if (gate)
    out["gate_equivalence"] = io::equivalence_to_json(
        equiv_up_to_free_phase(diagonal_phases(report.u_exact), *gate, cfg.sim_tol));
  emit(cfg, "sim_report.json", dump(out));
  if (!cfg.sweep.empty()) {
    const SweepGrid grid = parse_sweep(cfg.sweep);
    const std::vector<double> ratios = grid.ratios();
    const auto rows = sweep_exchange_ratio(array, tau * array.max_exchange(), ratios, cfg.jobs);
    emit(cfg, "sweep.csv", io::sweep_csv(rows));
    if (cfg.out_dir.empty()) std::cout << io::sweep_csv(rows);
  }
  json summary{{"tau", tau},
               {"fidelity", report.fidelity},
               {"bound", report.bound},
               {"max_residue", report.max_residue()},
               {"leak", report.leak},
               {"fidelity_corrected", report.fidelity_corrected}};
  if (gate) summary["gate_equivalence"] = out["gate_equivalence"];
  std::cout << dump(summary);
  return kExitOk;
}

json verification_json(const DotArray& array, const PulseSchedule& schedule, const PhaseVector& gate,
                       double tol) {
  const PulsedVerification v = verify_pulsed(array, schedule, gate, tol);
  return {{"equivalence", io::equivalence_to_json(v.equivalence)},
          {"off_diagonal", v.off_diagonal},
          {"fidelity", v.fidelity},
          {"net_pauli", schedule.net().str()}};
}

int cmd_calibrate(const RunConfig& cfg) {
  const DotArray array = load_array(cfg);
  const PhaseVector gate = load_gate(cfg, array.size()).expand(array.size());
  const CalibrationTarget target = make_calibration_target(array, gate);
  IntervalOptions opts;
  opts.offset_bound = cfg.offset_bound;
  opts.tol = cfg.tol;
  IntervalSolution sol;
  try {
    sol = solve_intervals(array, target, opts);
  } catch (const Infeasible& e) {
    json out{{"message", e.what()}, {"best_residual", e.best_residual()}};
    std::cout << dump(out);
    emit(cfg, "calibration.json", dump(out));
    return kExitInfeasible;
  }
  json out = io::interval_solution_to_json(sol);
  emit(cfg, "schedule.json", dump(io::schedule_to_json(sol.schedule)));
  emit(cfg, "kspace.csv", io::kspace_csv(kspace_path(array, sol.schedule, target)));
  json verification = json::object();
  std::optional<PulseSchedule> woven;
  if (cfg.dd) {
    woven = weave_dd(sol.schedule);
    out["dd_schedule"] = io::schedule_to_json(*woven);
    emit(cfg, "schedule_dd.json", dump(out["dd_schedule"]));
  }
  if (array.size() <= kMaxSimulatedQubits) {
    verification["plain"] = verification_json(array, sol.schedule, gate, cfg.sim_tol);
    if (woven) verification["dd"] = verification_json(array, *woven, gate, cfg.sim_tol);
  } else {
    verification["skipped"] = "array too large for exact simulation";
  }
  out["verification"] = verification;
  emit(cfg, "verification.json", dump(verification));
  std::cout << dump(out);
  return kExitOk;
}

int cmd_apps(const RunConfig& cfg) {
  json out;
  if (cfg.which == "logicalz") {
    const PhaseVector g = logical_z_triangle();
    std::vector<int> signs;
    for (double v : g.values()) signs.push_back(std::cos(v) > 0.0 ? 1 : -1);
    ComplexMatrix d = ComplexMatrix::Zero(8, 8);
    for (Eigen::Index i = 0; i < 8; ++i) d(i, i) = signs[static_cast<std::size_t>(i)];
    const ComplexMatrix x = pauli_matrix(PauliAssignment({Pauli::X, Pauli::X, Pauli::X}));
    out = {{"diagonal", signs}, {"anticommutator_norm", (d * x + x * d).norm()}};
  } else if (cfg.which == "paritycheck") {
    if (cfg.basis != "Z" && cfg.basis != "X") throw InvalidArgument("--basis must be Z or X");
    if (cfg.trials < 1) throw InvalidArgument("--trials must be >= 1");
    const ParityCheckReport r =
        verify_parity_check(cfg.targets, cfg.basis == "Z" ? Basis::Z : Basis::X, cfg.trials, cfg.seed);
    out = io::parity_report_to_json(r);
  } else {
    const int n = cfg.qubits ? cfg.qubits : 4;
    const Eigen::MatrixXd r = order_reversal(n);
    json signs = json::array();
    int agree = 0;
    for (std::size_t a = 0; a < (std::size_t{1} << n); ++a) {
      const std::string s = bit_string(a, n);
      const double entry = r(static_cast<Eigen::Index>(reversed_index(a, n)), static_cast<Eigen::Index>(a));
      const int predicted = consecutive_ones_parity(s);
      agree += std::abs(entry - predicted) < 1e-9;
      signs.push_back({{"input", s}, {"output", bit_string(reversed_index(a, n), n)}, {"sign", predicted}});
    }
    const Eigen::MatrixXd rounded = r.array().round().matrix();
    out = {{"n_qubits", n},
           {"matrix", io::matrix_json(rounded)},
           {"max_rounding_error", (r - rounded).cwiseAbs().maxCoeff()},
           {"signs", signs},
           {"predicate_agreements", agree}};
  }
  std::cout << dump(out);
  emit(cfg, cfg.which + ".json", dump(out));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrinsic multi-qubit gates in exchange-coupled spin arrays"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qdgates 1.0");
  RunConfig cfg;

  auto array_opt = [&](CLI::App* sub) {
    sub->add_option("--array", cfg.array_path, "Dot array JSON")->envname("QDGATES_ARRAY")->check(CLI::ExistingFile);
  };
  auto gate_opt = [&](CLI::App* sub) {
    sub->add_option("--gate", cfg.gate_path, "Gate spec JSON")->envname("QDGATES_GATE")->check(CLI::ExistingFile);
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", cfg.tol, "Phase tolerance (rad)")->envname("QDGATES_TOL");
    sub->add_option("--out", cfg.out_dir, "Output directory")->envname("QDGATES_OUT");
  };

  CLI::App* check = app.add_subcommand("check", "Parity-rule feasibility of a gate");
  array_opt(check);
  gate_opt(check);
  check->add_option("--qubits", cfg.qubits, "Qubit count when no array is given")->envname("QDGATES_QUBITS");
  common(check);

  CLI::App* solve = app.add_subcommand("solve", "Gate times from the dynamics rule");
  array_opt(solve);
  gate_opt(solve);
  solve->add_option("--horizon", cfg.horizon, "Largest gate time searched")->envname("QDGATES_HORIZON");
  common(solve);

  CLI::App* sim = app.add_subcommand("simulate", "Exact evolution against the ideal gate");
  array_opt(sim);
  gate_opt(sim);
  sim->add_option("--tau", cfg.tau, "Evolution time")->envname("QDGATES_TAU");
  sim->add_option("--sweep", cfg.sweep, "J/eps_Z sweep lo:hi:steps (log spaced)")->envname("QDGATES_SWEEP");
  sim->add_option("--jobs", cfg.jobs, "Sweep worker threads")->envname("QDGATES_JOBS");
  sim->add_option("--sim-tol", cfg.sim_tol, "Tolerance for the simulated gate check")->envname("QDGATES_SIM_TOL");
  common(sim);

  CLI::App* cal = app.add_subcommand("calibrate", "Pulse schedule for inhomogeneous bonds");
  array_opt(cal);
  gate_opt(cal);
  cal->add_flag("--dd", cfg.dd, "Also weave XY dynamical decoupling")->envname("QDGATES_DD");
  cal->add_option("--offset-bound", cfg.offset_bound, "Lattice offset search bound")->envname("QDGATES_OFFSET_BOUND");
  cal->add_option("--sim-tol", cfg.sim_tol, "Tolerance for the simulated gate check")->envname("QDGATES_SIM_TOL");
  common(cal);

  CLI::App* apps = app.add_subcommand("apps", "Logical Z, parity check and array reversal");
  apps->add_option("which", cfg.which, "logicalz | paritycheck | reversal")
      ->required()
      ->check(CLI::IsMember({"logicalz", "paritycheck", "reversal"}));
  apps->add_option("--targets", cfg.targets, "Parity-check targets (2-4)")->envname("QDGATES_TARGETS");
  apps->add_option("--basis", cfg.basis, "Parity-check basis Z or X")->envname("QDGATES_BASIS");
  apps->add_option("--trials", cfg.trials, "Random parity-check inputs")->envname("QDGATES_TRIALS");
  apps->add_option("--seed", cfg.seed, "RNG seed")->envname("QDGATES_SEED");
  apps->add_option("--qubits", cfg.qubits, "Reversal register size")->envname("QDGATES_QUBITS");
  apps->add_option("--out", cfg.out_dir, "Output directory")->envname("QDGATES_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    check_tolerances(cfg);
    if (check->parsed()) return cmd_check(cfg);
    if (solve->parsed()) return cmd_solve(cfg);
    if (sim->parsed()) return cmd_simulate(cfg);
    if (cal->parsed()) return cmd_calibrate(cfg);
    return cmd_apps(cfg);
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
  } catch (const DegenerateSpectrum& e) {
    std::cerr << "degenerate spectrum: " << e.what() << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitError;
}
