#pragma once

#include <charconv>
#include <complex>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdgates/applications.hpp"
#include "qdgates/calibration.hpp"
#include "qdgates/core_model.hpp"
#include "qdgates/errors.hpp"
#include "qdgates/gate_algebra.hpp"
#include "qdgates/pulse.hpp"
#include "qdgates/simulator.hpp"

namespace qdgates::io {

using nlohmann::json;

// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + " byte " + std::to_string(e.byte), e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_text(text, path);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << text;
}

namespace detail {

inline const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "/" + key, "missing field");
  return *it;
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where, "expected a number");
  return v.get<double>();
}

inline int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where, "expected an integer");
  return v.get<int>();
}

inline Complex complex_value(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) throw ParseError(where, "expected [re, im]");
  return {number(v[0], where + "/0"), number(v[1], where + "/1")};
}

inline const json& array_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) throw ParseError(where + "/" + key, "expected an array");
  return v;
}

// Rethrows model validation errors with the JSON location attached.
template <class F>
auto located(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(where, e.what());
  }
}

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

}  // namespace detail

inline DotArray array_from_json(const json& doc) {
  using namespace detail;
  const json& jd = array_field(doc, "dots", "");
  std::vector<Dot> dots;
  for (std::size_t i = 0; i < jd.size(); ++i) {
    const std::string w = "/dots/" + std::to_string(i);
    Dot d;
    d.id = integer(field(jd[i], "id", w), w + "/id");
    d.zeeman = number(field(jd[i], "zeeman", w), w + "/zeeman");
    if (jd[i].contains("chem_potential"))
      d.chem_potential = number(jd[i]["chem_potential"], w + "/chem_potential");
    dots.push_back(d);
  }
  std::vector<Bond> bonds;
  if (doc.contains("bonds")) {
    const json& jb = array_field(doc, "bonds", "");
    for (std::size_t i = 0; i < jb.size(); ++i) {
      const std::string w = "/bonds/" + std::to_string(i);
      const json& b = jb[i];
      const int j = integer(field(b, "j", w), w + "/j");
      const int k = integer(field(b, "k", w), w + "/k");
      const double ex = number(field(b, "J", w), w + "/J");
      const bool amplitudes = b.contains("t") || b.contains("s");
      const bool soi = b.contains("gamma_so") || b.contains("theta_b");
      if (amplitudes && soi)
        throw ParseError(w, "give either (t, s) or (gamma_so, theta_b), not both");
      if (soi) {
        const double g = number(field(b, "gamma_so", w), w + "/gamma_so");
        const double th = number(field(b, "theta_b", w), w + "/theta_b");
        bonds.push_back(located(w, [&] { return Bond::from_soi(j, k, ex, g, th); }));
      } else {
        const Complex t = complex_value(field(b, "t", w), w + "/t");
        const Complex s = complex_value(field(b, "s", w), w + "/s");
        bonds.push_back(located(w, [&] { return Bond(j, k, ex, t, s); }));
      }
    }
  }
  return located("", [&] { return DotArray(std::move(dots), std::move(bonds)); });
}

inline json array_to_json(const DotArray& array) {
  json dots = json::array(), bonds = json::array();
  for (const Dot& d : array.dots()) {
    json jd{{"id", d.id}, {"zeeman", d.zeeman}};
    if (d.chem_potential != 0.0) jd["chem_potential"] = d.chem_potential;
    dots.push_back(jd);
  }
  for (const Bond& b : array.bonds())
    bonds.push_back({{"j", b.j()},
                     {"k", b.k()},
                     {"J", b.exchange()},
                     {"t", detail::complex_json(b.t())},
                     {"s", detail::complex_json(b.s())}});
  return {{"dots", dots}, {"bonds", bonds}};
}

inline GateSpec gate_from_json(const json& doc, int n_qubits) {
  using namespace detail;
  GateSpec spec;
  const bool has_raw = doc.is_object() && doc.contains("raw");
  const bool has_factors = doc.is_object() && doc.contains("factors");
  if (has_raw == has_factors) throw ParseError("", "gate needs exactly one of 'factors' or 'raw'");
  if (has_raw) {
    const json& raw = array_field(doc, "raw", "");
    std::vector<double> v;
    for (std::size_t i = 0; i < raw.size(); ++i) v.push_back(number(raw[i], "/raw/" + std::to_string(i)));
    spec.raw = located("/raw", [&] { return PhaseVector(std::move(v)); });
  } else {
    const json& fs = array_field(doc, "factors", "");
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const std::string w = "/factors/" + std::to_string(i);
      MqcpFactor f;
      f.control = integer(field(fs[i], "control", w), w + "/control");
      const json& ts = array_field(fs[i], "targets", w);
      for (std::size_t k = 0; k < ts.size(); ++k) {
        const std::string wt = w + "/targets/" + std::to_string(k);
        f.targets.push_back({integer(field(ts[k], "dot", wt), wt + "/dot"),
                             number(field(ts[k], "theta", wt), wt + "/theta")});
      }
      located(w, [&] {
        f.validate(n_qubits);
        return 0;
      });
      spec.factors.push_back(std::move(f));
    }
  }
  located("", [&] { return spec.expand(n_qubits); });
  return spec;
}

inline json gate_to_json(const GateSpec& spec) {
  if (spec.raw) return {{"raw", std::vector<double>(spec.raw->values().begin(), spec.raw->values().end())}};
  json fs = json::array();
  for (const MqcpFactor& f : spec.factors) {
    json ts = json::array();
    for (const TargetPhase& t : f.targets) ts.push_back({{"dot", t.dot}, {"theta", t.theta}});
    fs.push_back({{"control", f.control}, {"targets", ts}});
  }
  return {{"factors", fs}};
}

inline json phases_json(const PhaseVector& v) {
  return std::vector<double>(v.values().begin(), v.values().end());
}

inline json free_phase_to_json(const FreePhase& f) {
  return {{"global", f.global}, {"local", f.local}};
}

inline PulseSchedule schedule_from_json(const json& doc, int n_qubits) {
  using namespace detail;
  const json& st = array_field(doc, "stages", "");
  std::vector<Stage> stages;
  for (std::size_t i = 0; i < st.size(); ++i) {
    const std::string w = "/stages/" + std::to_string(i);
    Stage s;
    s.tau = number(field(st[i], "tau", w), w + "/tau");
    if (st[i].contains("pulse")) {
      const json& ps = array_field(st[i], "pulse", w);
      for (std::size_t k = 0; k < ps.size(); ++k) {
        const std::string wp = w + "/pulse/" + std::to_string(k);
        const json& label = field(ps[k], "pauli", wp);
        if (!label.is_string() || label.get<std::string>().size() != 1)
          throw ParseError(wp + "/pauli", "expected one of \"I\", \"X\", \"Y\", \"Z\"");
        const char c = label.get<std::string>()[0];
        s.pulses.push_back({integer(field(ps[k], "dot", wp), wp + "/dot"),
                            located(wp + "/pauli", [&] { return pauli_from_char(c); })});
      }
    }
    stages.push_back(std::move(s));
  }
  return located("", [&] { return PulseSchedule(n_qubits, std::move(stages)); });
}

inline json schedule_to_json(const PulseSchedule& s) {
  json stages = json::array();
  for (const Stage& st : s.stages()) {
    json pulses = json::array();
    for (const PulseOp& p : st.pulses)
      pulses.push_back({{"dot", p.dot}, {"pauli", std::string(1, pauli_char(p.pauli))}});
    stages.push_back({{"tau", st.tau}, {"pulse", pulses}});
  }
  return {{"n_qubits", s.n_qubits()}, {"stages", stages}, {"total_time", s.total_time()},
          {"net", s.net().str()}};
}

inline json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(detail::complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

// Full matrices are written up to this dimension; larger ones only by diagonal.
inline constexpr Eigen::Index kFullMatrixLimit = 64;

inline json sim_report_to_json(const SimReport& r) {
  json diag = json::array();
  for (Eigen::Index i = 0; i < r.u_exact.rows(); ++i) diag.push_back(detail::complex_json(r.u_exact(i, i)));
  json out{{"n_qubits", r.n_qubits},
           {"tau", r.tau},
           {"fidelity", r.fidelity},
           {"bound", r.bound},
           {"residues", r.residues},
           {"max_residue", r.max_residue()},
           {"leak", r.leak},
           {"u_ideal", phases_json(r.u_ideal)},
           {"u_exact_diagonal", diag},
           {"correction",
            {{"y", free_phase_to_json(r.correction.y)},
             {"post_residues", r.correction.post},
             {"fidelity", r.fidelity_corrected},
             {"bound", r.bound_corrected}}}};
  if (r.u_exact.rows() <= kFullMatrixLimit) out["u_exact"] = matrix_json(r.u_exact);
  return out;
}

inline json parity_to_json(const ParitySolution& p, const ControlAnalysis& c) {
  json out{{"feasible", p.feasible}, {"residual", p.residual}};
  if (p.feasible) out["free"] = free_phase_to_json(p.free);
  out["second_control"] = c.second_control;
  if (c.second_control) {
    out["second_control_qubit"] = c.qubit;
    out["degenerate"] = c.degenerate;
  }
  return out;
}

inline json scan_to_json(const LatticeScan& s) {
  json f = json::array();
  for (const DynamicsCandidate& c : s.frontier)
    f.push_back({{"tau", c.tau}, {"max_residual", c.max_residual}, {"residuals", c.residuals}});
  return {{"frontier", f}, {"truncated", s.truncated}, {"horizon", s.horizon}};
}

inline json decomposition_to_json(const Decomposition& d) {
  return {{"factors", gate_to_json(d.factors)["factors"]},
          {"corrections", free_phase_to_json(d.corrections)}};
}

inline json equivalence_to_json(const Equivalence& e) {
  return {{"equivalent", e.equivalent}, {"residual", e.residual}, {"shift", free_phase_to_json(e.shift)}};
}

inline json interval_solution_to_json(const IntervalSolution& s) {
  return {{"schedule", schedule_to_json(s.schedule)},
          {"offsets", s.offsets},
          {"stage_signs", s.stage_signs},
          {"total_time", s.total_time},
          {"residual", s.residual},
          {"combinations_tried", s.combinations_tried}};
}

inline json operation_to_json(const Operation& op) {
  if (auto* h = std::get_if<HadamardOp>(&op)) return {{"op", "H"}, {"dot", h->dot}};
  if (auto* d = std::get_if<DiagonalOp>(&op))
    return {{"op", "diagonal"}, {"label", d->label}, {"phases", phases_json(d->phases)}};
  if (auto* m = std::get_if<MeasureOp>(&op))
    return {{"op", "measure"}, {"dot", m->dot}, {"basis", m->basis == Basis::Z ? "Z" : "X"}};
  return {{"op", "reset"}, {"dot", std::get<ResetOp>(op).dot}};
}

inline json circuit_to_json(const Circuit& c) {
  json ops = json::array();
  for (const Operation& op : c.ops) ops.push_back(operation_to_json(op));
  return {{"n_qubits", c.n_qubits}, {"ops", ops}, {"entangling_gates", c.entangling_gates()}};
}

inline json parity_report_to_json(const ParityCheckReport& r) {
  json trials = json::array();
  for (const ParityTrial& t : r.trials)
    trials.push_back({{"outcome", t.outcome}, {"deviation", t.deviation}, {"agrees", t.agrees}});
  return {{"circuit", circuit_to_json(r.circuit)},
          {"n_targets", r.n_targets},
          {"basis", r.basis == Basis::Z ? "Z" : "X"},
          {"agreements", r.agreements},
          {"trials", trials},
          {"branches_checked", r.branches_checked},
          {"branch_agreements", r.branch_agreements},
          {"entangling_gates", r.entangling_gates},
          {"two_qubit_gates_replaced", r.two_qubit_gates_replaced}};
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "j_over_ez,infidelity,bound,max_residue,leak\n";
  for (const SweepRow& r : rows)
    out << format_double(r.ratio) << ',' << format_double(r.infidelity) << ','
        << format_double(r.bound) << ',' << format_double(r.max_residue) << ','
        << format_double(r.leak) << '\n';
  return out.str();
}

inline std::string kspace_csv(const KSpacePath& path) {
  std::ostringstream out;
  out << "time,bond_id,phase_over_pi,folded_phase_over_pi\n";
  for (std::size_t p = 0; p < path.times.size(); ++p)
    for (std::size_t w = 0; w < path.points[p].size(); ++w)
      out << format_double(path.times[p]) << ',' << w << ',' << format_double(path.points[p][w])
          << ',' << format_double(KSpacePath::fold(path.points[p][w])) << '\n';
  return out.str();
}

}  // namespace qdgates::io
