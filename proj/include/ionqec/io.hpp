#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ionqec/bench.hpp"
#include "ionqec/common.hpp"
#include "ionqec/coupling.hpp"
#include "ionqec/crystal.hpp"
#include "ionqec/search.hpp"
#include "ionqec/targets.hpp"

namespace ionqec::io {

using nlohmann::json;

// CSV numbers carry 9 significant digits; JSON doubles round-trip exactly.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline CrystalConfig crystal_config_from_json(const json& j) {
  CrystalConfig cfg;
  if (j.contains("n_ions")) cfg.n_ions = j.at("n_ions").get<int>();
  if (j.contains("beta")) cfg.planar_stiffness = j.at("beta").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  cfg.validate();
  return cfg;
}

inline json mode_basis_to_json(const ModeBasis& mb) {
  json j;
  j["frequencies"] = json::array();
  for (int m = 0; m < mb.frequencies.size(); ++m) j["frequencies"].push_back(mb.frequencies[m]);
  j["eigenvectors"] = json::array();
  for (int m = 0; m < mb.eigenvectors.rows(); ++m) {
    json row = json::array();
    for (int i = 0; i < mb.eigenvectors.cols(); ++i) row.push_back(mb.eigenvectors(m, i));
    j["eigenvectors"].push_back(std::move(row));
  }
  j["degenerate_groups"] = mb.degenerate_groups;
  return j;
}

inline json solution_to_json(const std::string& target_name, const FoundSolution& fs) {
  json j;
  j["target"] = target_name;
  j["P"] = fs.solution.areas;
  j["R"] = fs.solution.ratio;
  j["n"] = fs.assignment.n;
  j["residual"] = fs.residual;
  return j;
}

struct SolutionFile {
  std::string target;
  PulseSolution solution;
  std::vector<int> n;
  double residual = 0.0;
};

inline SolutionFile solution_from_json(const json& j) {
  SolutionFile sf;
  sf.target = j.at("target").get<std::string>();
  const auto p = j.at("P").get<std::vector<double>>();
  if (p.size() != 4) throw ConfigError("solution P must have 4 entries");
  for (int g = 0; g < 4; ++g) sf.solution.areas[g] = p[g];
  sf.solution.ratio = j.at("R").get<double>();
  sf.solution.label = sf.target;
  if (j.contains("n")) sf.n = j.at("n").get<std::vector<int>>();
  if (j.contains("residual")) sf.residual = j.at("residual").get<double>();
  return sf;
}

inline std::string class_label(int state) {
  std::string s = hub_bit(state) ? "|1>|" : "|0>|";
  for (int q = 1; q < kNumQubits; ++q) s += qubit_bit(state, q) ? '1' : '0';
  s += '>';
  return s;
}

// 16-row class table for a phase vector: representative, multiplicity,
// phi/pi, phi/pi mod 2.
inline std::string phases_csv(const PhaseVector& phi) {
  std::ostringstream os;
  os << "representative,multiplicity,phase_over_pi,phase_over_pi_mod2\n";
  for (const auto& c : cyclic_classes()) {
    const double p = phi[c.representative] / kPi;
    double m = std::fmod(p, 2.0);
    if (m < 0) m += 2.0;
    os << class_label(c.representative) << ',' << c.multiplicity << ',' << csv_num(p) << ','
       << csv_num(m) << '\n';
  }
  return os.str();
}

inline std::string curve_csv(const std::vector<std::pair<double, Curve>>& curves,
                             CodeKind code) {
  std::ostringstream os;
  os << "t,mean_fidelity,std_err,sigma,code\n";
  for (const auto& [sigma, curve] : curves)
    for (const auto& pt : curve)
      os << csv_num(pt.t) << ',' << csv_num(pt.mean) << ',' << csv_num(pt.std_err) << ','
         << csv_num(sigma) << ',' << code_name(code) << '\n';
  return os.str();
}

inline std::string sweep_csv(const SweepRecord& rec) {
  std::ostringstream os;
  os << "sigma,tau,tau_1q,ratio\n";
  for (size_t i = 0; i < rec.sigmas.size(); ++i)
    os << csv_num(rec.sigmas[i]) << ',' << csv_num(rec.taus[i].tau) << ','
       << csv_num(rec.tau_1q.tau) << ',' << csv_num(rec.ratios[i]) << '\n';
  return os.str();
}

inline json fit_to_json(const SweepRecord& rec) {
  json j;
  j["tau0"] = rec.fit.tau0;
  j["alpha"] = rec.fit.alpha;
  j["sigma_th"] = rec.fit.sigma_th;
  j["rms"] = rec.fit.rms;
  j["sigma_th_raw"] = rec.sigma_th_raw;
  return j;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace ionqec::io
