/*
 Copyright 2026 The lcsctl authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

 https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "lcsctl/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <variant>

#include "json.hpp"

namespace lcsctl {

namespace {

using nlohmann::json;

// Canonical emitter: alphabetical keys (json objects iterate sorted),
// compact separators, and %.17g floats so write-read-write is byte-stable.
void dump_canonical(const json& j, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  const std::string pad_in(2 * (indent + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += json(it.key()).dump();
        out += ": ";
        dump_canonical(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ", ";
        first = false;
        dump_canonical(v, out, indent);
      }
      out += "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::string text;
  dump_canonical(j, text, 0);
  text += "\n";
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.good()) throw IoError("cannot write " + path);
}

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json row = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
  return row;
}

Matrix parse_matrix(const json& j, int rows, int cols,
                    const std::string& what) {
  if (!j.is_array()) throw IoError(what + " must be an array of rows");
  if (static_cast<int>(j.size()) != rows) {
    throw IoError(what + " must have " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw IoError(what + " row " + std::to_string(i) + " must have " +
                    std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw IoError(what + " entries must be numbers");
      m(i, c) = row[c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const json& j, int size, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    throw IoError(what + " must be an array of " + std::to_string(size) +
                  " numbers");
  }
  Vector v(size);
  for (int i = 0; i < size; ++i) {
    if (!j[i].is_number()) throw IoError(what + " entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

int parse_int(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw IoError(std::string("missing integer field '") + key + "'");
  }
  return j[key].get<int>();
}

const char* init_name(const InitStrategy& init) {
  if (std::holds_alternative<LqrInit>(init)) return "lqr";
  if (std::holds_alternative<ZeroInit>(init)) return "zero";
  return "given";
}

json options_json(const SynthesisOptions& opts) {
  json o;
  o["representation"] = to_string(opts.representation);
  o["omega"] = opts.omega;
  o["theta_k"] = opts.theta_k;
  o["theta_l"] = opts.theta_l;
  o["eps_pos"] = opts.eps_pos;
  o["eps_dec"] = opts.eps_dec;
  o["max_alternations"] = opts.max_alternations;
  o["cert_scale_cap"] = opts.cert_scale_cap;
  o["init"] = init_name(opts.init);
  if (opts.sparsity_mask) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < opts.sparsity_mask->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < opts.sparsity_mask->cols(); ++j) {
        row.push_back((*opts.sparsity_mask)(i, j) ? 1 : 0);
      }
      rows.push_back(row);
    }
    o["sparsity_mask"] = rows;
  }
  return o;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

LcsModel read_model(const std::string& path, std::string* warning) {
  const json j = parse_file(path);
  const int n = parse_int(j, "n");
  const int k = parse_int(j, "k");
  const int m = parse_int(j, "m");
  if (n <= 0 || k < 0 || m < 0) throw IoError(path + ": invalid dimensions");

  LcsModel model;
  if (!j.contains("A")) throw IoError(path + ": missing field 'A'");
  model.A = parse_matrix(j["A"], n, n, "A");
  if (!j.contains("B")) throw IoError(path + ": missing field 'B'");
  model.B = parse_matrix(j["B"], n, k, "B");
  if (!j.contains("D")) throw IoError(path + ": missing field 'D'");
  model.D = parse_matrix(j["D"], n, m, "D");
  if (!j.contains("E")) throw IoError(path + ": missing field 'E'");
  model.E = parse_matrix(j["E"], m, n, "E");
  if (!j.contains("F")) throw IoError(path + ": missing field 'F'");
  model.F = parse_matrix(j["F"], m, m, "F");
  if (!j.contains("c")) throw IoError(path + ": missing field 'c'");
  model.c = parse_vector(j["c"], m, "c");
  if (j.contains("names")) {
    if (!j["names"].is_array()) throw IoError(path + ": names must be array");
    for (const auto& s : j["names"]) {
      if (!s.is_string()) throw IoError(path + ": names must be strings");
      model.names.push_back(s.get<std::string>());
    }
  }
  model.validate(/*require_c_nonneg=*/false, warning);
  return model;
}

void write_model(const std::string& path, const LcsModel& model) {
  json j;
  j["A"] = matrix_json(model.A);
  j["B"] = matrix_json(model.B);
  j["D"] = matrix_json(model.D);
  j["E"] = matrix_json(model.E);
  j["F"] = matrix_json(model.F);
  j["c"] = vector_json(model.c);
  j["k"] = model.k();
  j["m"] = model.m();
  j["n"] = model.n();
  if (!model.names.empty()) j["names"] = model.names;
  write_json_file(path, j);
}

Controller read_controller(const std::string& path) {
  const json j = parse_file(path);
  if (!j.contains("K") || !j["K"].is_array() || j["K"].empty()) {
    throw IoError(path + ": missing field 'K'");
  }
  const int k = static_cast<int>(j["K"].size());
  const int n = static_cast<int>(j["K"][0].size());
  Controller ctrl;
  ctrl.K = parse_matrix(j["K"], k, n, "K");
  if (!j.contains("L") || !j["L"].is_array()) {
    throw IoError(path + ": missing field 'L'");
  }
  const int m = j["L"].empty() ? 0 : static_cast<int>(j["L"][0].size());
  ctrl.L = parse_matrix(j["L"], k, m, "L");
  if (j.contains("mask")) {
    const Matrix raw = parse_matrix(j["mask"], k, n, "mask");
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(k, n);
    for (int i = 0; i < k; ++i) {
      for (int c = 0; c < n; ++c) mask(i, c) = raw(i, c) != 0.0;
    }
    ctrl.mask = mask;
  }
  return ctrl;
}

bool read_certificate(const std::string& path, PwqCertificate* cert) {
  require(cert != nullptr, "certificate sink required");
  const json j = parse_file(path);
  if (!j.contains("certificate")) return false;
  const json& c = j["certificate"];
  if (!c.contains("P") || !c.contains("Q") || !c.contains("R")) {
    throw IoError(path + ": certificate section must hold P, Q, R");
  }
  const int n = static_cast<int>(c["P"].size());
  const int m = static_cast<int>(c["R"].size());
  cert->P = parse_matrix(c["P"], n, n, "P");
  cert->Q = parse_matrix(c["Q"], n, m, "Q");
  cert->R = parse_matrix(c["R"], m, m, "R");
  return true;
}

namespace {

json controller_json(const Controller& ctrl) {
  json j;
  j["K"] = matrix_json(ctrl.K);
  j["L"] = matrix_json(ctrl.L);
  if (ctrl.mask) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < ctrl.mask->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < ctrl.mask->cols(); ++c) {
        row.push_back((*ctrl.mask)(i, c) ? 1 : 0);
      }
      rows.push_back(row);
    }
    j["mask"] = rows;
  }
  return j;
}

}  // namespace

void write_controller(const std::string& path, const Controller& ctrl) {
  write_json_file(path, controller_json(ctrl));
}

void write_synthesis_result(const std::string& path,
                            const SynthesisResult& result,
                            const SynthesisOptions& opts) {
  json j = controller_json(result.controller);
  json cert;
  cert["P"] = matrix_json(result.certificate.P);
  cert["Q"] = matrix_json(result.certificate.Q);
  cert["R"] = matrix_json(result.certificate.R);
  cert["margin_pos"] = result.margin_pos;
  cert["margin_dec"] = result.margin_dec;
  cert["status"] = to_string(result.status);
  cert["iterations"] = result.iterations;
  cert["wall_time"] = result.wall_time;
  if (!result.message.empty()) cert["message"] = result.message;
  json mults;
  for (const auto& [name, value] : result.multipliers) mults[name] = value;
  cert["multipliers"] = mults;
  json bounds;
  bounds["b"] = result.bounds.b;
  bounds["d"] = result.bounds.d;
  bounds["gamma"] = result.bounds.gamma;
  bounds["kappa"] = result.bounds.kappa;
  bounds["sigma"] = result.bounds.sigma;
  cert["bounds"] = bounds;
  cert["options"] = options_json(opts);
  j["certificate"] = cert;
  write_json_file(path, j);
}

void write_verification_report(const std::string& path,
                               const VerificationReport& report, int samples,
                               double omega, std::uint64_t seed) {
  json j;
  j["samples"] = report.samples;
  j["violations_pos"] = report.violations_pos;
  j["violations_dec"] = report.violations_dec;
  j["worst_pos_margin"] = report.worst_pos_margin;
  j["worst_dec_margin"] = report.worst_dec_margin;
  json pts = json::array();
  for (const auto& wp : report.witness_points) {
    json p;
    p["x"] = vector_json(wp.x);
    p["v"] = wp.v;
    p["vdot"] = wp.vdot;
    p["violates_pos"] = wp.violates_pos;
    p["violates_dec"] = wp.violates_dec;
    pts.push_back(p);
  }
  j["witness_points"] = pts;
  json cfg;
  cfg["samples"] = samples;
  cfg["omega"] = omega;
  cfg["seed"] = seed;
  j["config"] = cfg;
  write_json_file(path, j);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  require(!traj.states.empty(), "trajectory is empty");
  const int n = static_cast<int>(traj.states.front().size());
  const int m = static_cast<int>(traj.forces.front().size());
  const int k = static_cast<int>(traj.inputs.front().size());

  std::ostringstream os;
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= m; ++i) os << ",lam" << i;
  for (int i = 1; i <= k; ++i) os << ",u" << i;
  os << ",comp_residual\n";
  for (std::size_t row = 0; row < traj.states.size(); ++row) {
    os << format_double(traj.times[row]);
    for (int i = 0; i < n; ++i) os << "," << format_double(traj.states[row](i));
    for (int i = 0; i < m; ++i) os << "," << format_double(traj.forces[row](i));
    for (int i = 0; i < k; ++i) os << "," << format_double(traj.inputs[row](i));
    os << "," << format_double(traj.comp_residuals[row]) << "\n";
  }
  std::ofstream out(path, std::ios::binary);
  out << os.str();
  if (!out.good()) throw IoError("cannot write " + path);
}

void write_bench_report(const std::string& path, const BenchmarkSpec& spec,
                        const ComparisonTable& table,
                        const std::vector<std::string>& notes) {
  json j;
  j["benchmark"] = table.benchmark;
  json cfg;
  cfg["label"] = spec.label;
  cfg["lcs_plant"] = spec.lcs_plant;
  cfg["seed"] = table.seed;
  cfg["step"] = spec.step;
  cfg["success_eps"] = spec.success_eps;
  cfg["t_final"] = spec.t_final;
  cfg["trials"] = spec.trials;
  cfg["synthesis"] = options_json(spec.synth);
  if (!notes.empty()) cfg["notes"] = notes;
  j["config"] = cfg;

  json ics = json::array();
  for (const auto& ic : table.initial_conditions) ics.push_back(vector_json(ic));
  j["initial_conditions"] = ics;

  json reports = json::array();
  for (const auto& r : table.reports) {
    json rep;
    rep["controller_name"] = r.controller_name;
    rep["seed"] = r.seed;
    rep["successes"] = r.successes;
    rep["success_rate"] = r.success_rate;
    rep["trials"] = r.trials;
    json tn = json::array();
    for (double v : r.terminal_norms) tn.push_back(v);
    rep["terminal_norms"] = tn;
    json ts = json::array();
    for (bool b : r.trial_success) ts.push_back(b ? 1 : 0);
    rep["trial_success"] = ts;
    json td = json::array();
    for (bool b : r.trial_diverged) td.push_back(b ? 1 : 0);
    rep["trial_diverged"] = td;
    reports.push_back(rep);
  }
  j["reports"] = reports;
  write_json_file(path, j);
}

void write_comparison_csv(const std::string& path,
                          const ComparisonTable& table) {
  std::ostringstream os;
  os << "trial,ic,controller,terminal_norm,success\n";
  const int trials = table.initial_conditions.empty()
                         ? 0
                         : static_cast<int>(table.initial_conditions.size());
  for (int t = 0; t < trials; ++t) {
    std::string ic;
    const Vector& x0 = table.initial_conditions[t];
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      if (i > 0) ic += ";";
      ic += format_double(x0(i));
    }
    for (const auto& r : table.reports) {
      os << t << "," << ic << "," << r.controller_name << ","
         << format_double(r.terminal_norms[t]) << ","
         << (r.trial_success[t] ? 1 : 0) << "\n";
    }
  }
  std::ofstream out(path, std::ios::binary);
  out << os.str();
  if (!out.good()) throw IoError("cannot write " + path);
}

void write_config_echo(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& entries) {
  json j;
  for (const auto& [key, value] : entries) j[key] = value;
  write_json_file(path, j);
}

}  // namespace lcsctl
