// Command-line front end: mode solving, phase tables, pulse search, solution
// verification, error-injection demos, fidelity curves and noise sweeps.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ionqec/ionqec.hpp"

namespace {

constexpr const char* kVersion = "ionqec 0.1.0";

using namespace ionqec;
using nlohmann::json;

struct Manifest {
  std::string subcommand;
  json parameters = json::object();
  uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void write(const std::string& primary_out) const {
    if (primary_out.empty() || primary_out == "-") return;
    json j;
    j["subcommand"] = subcommand;
    j["parameters"] = parameters;
    j["seed"] = seed;
    j["tool_version"] = kVersion;
    j["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    j["outputs"] = outputs;
    io::write_file(primary_out + ".manifest.json", j.dump(2) + "\n");
  }
};

void emit(const std::string& out, const std::string& content, Manifest& man) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    io::write_file(out, content);
    man.outputs.push_back(out);
    man.write(out);
  }
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("IONQEC_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;   // library default: hardware concurrency
}

PhaseModel default_model() {
  CrystalConfig cfg;
  return PhaseModel(transverse_modes(stiffness_matrix(equilibrium_positions(cfg))));
}

TargetUnitary load_target(const std::string& name, const std::string& target_file) {
  if (!target_file.empty()) {
    const auto j = json::parse(io::read_file(target_file));
    const auto v = j.at("phases").get<std::vector<double>>();
    if (v.size() != kDim) throw ConfigError("target file must hold 64 phases");
    std::array<double, kDim> p{};
    std::copy(v.begin(), v.end(), p.begin());
    return target_from_phases(p, j.value("name", "custom"));
  }
  return named_target(name);
}

struct ErrorSpec {
  Pauli pauli;
  int qubit;
};

ErrorSpec parse_error(const std::string& s) {
  if (s.size() < 3 || s[1] != '@') throw CLI::ValidationError("--error", "expected P@i");
  Pauli p;
  switch (s[0]) {
    case 'X': p = Pauli::X; break;
    case 'Y': p = Pauli::Y; break;
    case 'Z': p = Pauli::Z; break;
    case 'I': p = Pauli::I; break;
    default: throw CLI::ValidationError("--error", "Pauli must be one of I X Y Z");
  }
  const int q = std::atoi(s.c_str() + 2);
  if (q < 0 || q >= kNumQubits)
    throw CLI::ValidationError("--error", "qubit index must be 0..5");
  return {p, q};
}

CodeKind parse_code(const std::string& s) {
  if (s == "5rc") return CodeKind::FiveRC;
  if (s == "5qc") return CodeKind::FiveQC;
  throw CLI::ValidationError("--code", "must be 5rc or 5qc");
}

int cmd_modes(const std::string& config_file, const std::string& out, uint64_t seed) {
  Manifest man{"modes"};
  CrystalConfig cfg;
  if (!config_file.empty())
    cfg = io::crystal_config_from_json(json::parse(io::read_file(config_file)));
  if (seed) cfg.seed = seed;
  man.seed = cfg.seed;
  man.parameters = {{"n_ions", cfg.n_ions}, {"beta", cfg.planar_stiffness}};
  const auto modes = transverse_modes(stiffness_matrix(equilibrium_positions(cfg)));
  emit(out, io::mode_basis_to_json(modes).dump(2) + "\n", man);
  return 0;
}

int cmd_phases(const std::string& solution_file, std::vector<double> areas, double ratio,
               const std::string& out) {
  Manifest man{"phases"};
  PulseSolution sol;
  if (!solution_file.empty()) {
    sol = io::solution_from_json(json::parse(io::read_file(solution_file))).solution;
  } else {
    if (areas.size() != 4)
      throw CLI::ValidationError("--areas", "need 4 pulse areas");
    for (int g = 0; g < 4; ++g) sol.areas[g] = areas[g];
    sol.ratio = ratio;
  }
  man.parameters = {{"P", sol.areas}, {"R", sol.ratio}};
  const auto model = default_model();
  const auto phi = model.phases(sol.areas, sol.ratio);
  emit(out, io::phases_csv(phi), man);
  return 0;
}

int cmd_search(const std::string& target_name, const std::string& target_file, int bound,
               double tol, double budget_secs, uint64_t seed, int threads,
               const std::string& out, bool use_ga, int population, int generations) {
  Manifest man{"search"};
  man.seed = seed;
  const auto model = default_model();
  const auto target = load_target(target_name, target_file);
  SearchOptions opt;
  opt.tolerance = tol;
  opt.max_seconds = budget_secs;
  opt.threads = resolve_threads(threads);
  opt.seed = seed;
  const SearchReport rep = use_ga
                               ? evolutionary_search(target, model, population, generations,
                                                     seed, opt)
                               : integer_search(target, model, bound, opt);
  man.parameters = {{"target", target.name},      {"bound", bound},
                    {"tolerance", tol},           {"budget_secs", budget_secs},
                    {"algorithm", use_ga ? "evolutionary" : "integer"},
                    {"nodes_explored", rep.nodes_explored},
                    {"nodes_pruned", rep.nodes_pruned},
                    {"wall_time", rep.wall_time},  {"exhausted", rep.exhausted},
                    {"solutions_found", rep.solutions.size()}};
  if (rep.solutions.empty()) {
    std::fprintf(stderr, "no solutions found%s\n",
                 rep.exhausted ? " (budget exhausted)" : "");
    man.write(out);
    return 1;
  }
  emit(out, io::solution_to_json(target.name, rep.solutions.front()).dump(2) + "\n", man);
  std::fprintf(stderr, "%zu solution(s), best residual %.3e, %llu nodes, %.1fs\n",
               rep.solutions.size(), rep.solutions.front().residual,
               static_cast<unsigned long long>(rep.nodes_explored), rep.wall_time);
  return 0;
}

int cmd_verify(const std::string& solution_file, double tol) {
  const auto sf = io::solution_from_json(json::parse(io::read_file(solution_file)));
  const auto model = default_model();
  const auto target = named_target(sf.target);
  const double dev = verify_solution(sf.solution, target, model);
  std::printf("target=%s max_deviation=%.9e (%.6f pi), tolerance=%.3e\n", sf.target.c_str(),
              dev, dev / kPi, tol);
  return dev <= tol ? 0 : 1;
}

int cmd_inject(const std::string& code, const std::vector<std::string>& error_specs) {
  const auto model = default_model();
  const CodeKind kind = parse_code(code);
  const Protocol protocol = make_protocol(model, kind);
  const PureTarget psi{Complex(0.6, 0.0), Complex(0.8 * std::cos(0.99), 0.8 * std::sin(0.99))};

  auto run_with = [&](const std::vector<ErrorSpec>& errs) {
    auto [st, frame] = protocol.encode(psi, NoiseConfig{}, ProtocolDraws{});
    for (const auto& e : errs) apply_pauli(st, e.qubit, e.pauli);
    return hub_fidelity(protocol.readout(std::move(st), NoiseConfig{}, ProtocolDraws{}, frame),
                        psi);
  };

  if (error_specs.empty()) {
    // full single-error demo table
    for (int q = 0; q < kNumQubits; ++q)
      for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z})
        std::printf("%s@%d fidelity=%.12f\n", pauli_name(p), q, run_with({{p, q}}));
    return 0;
  }
  std::vector<ErrorSpec> errs;
  for (const auto& s : error_specs) errs.push_back(parse_error(s));
  for (const auto& e : errs)
    std::printf("%s@%d fidelity=%.12f\n", pauli_name(e.pauli), e.qubit,
                run_with({e}));
  if (errs.size() > 1) {
    std::string label;
    for (const auto& e : errs)
      label += std::string(pauli_name(e.pauli)) + "@" + std::to_string(e.qubit) + " ";
    std::printf("combined [ %s] fidelity=%.12f\n", label.c_str(), run_with(errs));
  }
  return 0;
}

int cmd_simulate(const std::string& code, double sigma, int samples, double t,
                 double gate_time, uint64_t seed, int threads, const std::string& out) {
  Manifest man{"simulate"};
  man.seed = seed;
  const auto model = default_model();
  const CodeKind kind = parse_code(code);
  const Protocol protocol = make_protocol(model, kind);
  SweepConfig cfg;
  cfg.code = kind;
  cfg.samples = samples;
  cfg.time_grid = {t > 0 ? t : 1e-12};
  cfg.seed = seed;
  cfg.threads = resolve_threads(threads);
  cfg.gate_time = gate_time;
  const auto curve = fidelity_curve(protocol, cfg, sigma, 0);
  man.parameters = {{"code", code}, {"sigma", sigma}, {"samples", samples}, {"t", t},
                    {"gate_time", gate_time}};
  std::ostringstream os;
  os << "t,mean_fidelity,std_err,sigma,code\n"
     << io::csv_num(t) << ',' << io::csv_num(curve[0].mean) << ','
     << io::csv_num(curve[0].std_err) << ',' << io::csv_num(sigma) << ','
     << code_name(kind) << '\n';
  emit(out, os.str(), man);
  return 0;
}

int cmd_sweep(const std::string& code, std::vector<double> sigmas, int samples,
              double tmax, uint64_t seed, int threads, const std::string& out_prefix) {
  Manifest man{"sweep"};
  man.seed = seed;
  const auto model = default_model();
  const CodeKind kind = parse_code(code);
  const Protocol protocol = make_protocol(model, kind);
  SweepConfig cfg;
  cfg.code = kind;
  if (!sigmas.empty()) cfg.sigmas = sigmas;
  else if (kind == CodeKind::FiveQC) cfg.sigmas = {0.0, 0.001, 0.002, 0.003};
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.threads = resolve_threads(threads);
  if (tmax > 0) {
    std::vector<double> grid;
    for (double t : default_time_grid())
      if (t <= tmax * (1 + 1e-12)) grid.push_back(t);
    cfg.time_grid = grid;
  }
  const auto rec = sweep_and_fit(protocol, cfg);
  man.parameters = {{"code", code},       {"sigmas", cfg.sigmas},
                    {"samples", samples}, {"gate_time", cfg.gate_time},
                    {"threads_requested", threads}};

  std::vector<std::pair<double, Curve>> curves;
  for (size_t i = 0; i < rec.sigmas.size(); ++i)
    curves.emplace_back(rec.sigmas[i], rec.curves[i]);

  const std::string prefix = out_prefix.empty() ? std::string("sweep") : out_prefix;
  io::write_file(prefix + "_curves.csv", io::curve_csv(curves, kind));
  io::write_file(prefix + "_sweep.csv", io::sweep_csv(rec));
  io::write_file(prefix + "_fit.json", io::fit_to_json(rec).dump(2) + "\n");
  man.outputs = {prefix + "_curves.csv", prefix + "_sweep.csv", prefix + "_fit.json"};
  man.write(prefix);
  std::printf("tau0=%.6g alpha=%.6g sigma_th=%.6g rms=%.3g (raw sigma_th=%.6g)\n",
              rec.fit.tau0, rec.fit.alpha, rec.fit.sigma_th, rec.fit.rms, rec.sigma_th_raw);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global-pulse synthesis and QEC simulation for a six-ion planar crystal"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_file, out, solution_file, target_name = "spokes", target_file, code = "5rc";
  std::vector<double> areas, sigmas;
  std::vector<std::string> error_specs;
  double ratio = -1.4, tol = 2e-2 * ionqec::kPi, budget_secs = 0.0, sigma = 0.0, t = 0.0,
         tmax = 0.0, gate_time = 5e-4;
  int bound = 3, threads = 0, samples = 500, population = 64, generations = 200;
  uint64_t seed = 0;
  bool use_ga = false;

  auto* modes = app.add_subcommand("modes", "crystal equilibrium and transverse modes");
  modes->add_option("--config", config_file, "crystal config JSON");
  modes->add_option("--out", out, "output path (default stdout)");
  modes->add_option("--seed", seed, "equilibrium restart seed");

  auto* phases = app.add_subcommand("phases", "16-class phase table for a pulse sequence");
  phases->add_option("--solution", solution_file, "solution JSON");
  phases->add_option("--areas", areas, "pulse areas P1..P4")->expected(4);
  phases->add_option("--ratio", ratio, "force ratio R");
  phases->add_option("--out", out, "output path (default stdout)");

  auto* search = app.add_subcommand("search", "find pulse sequences for a target unitary");
  search->add_option("--target", target_name, "spokes | ring");
  search->add_option("--target-file", target_file, "custom 64-phase target JSON");
  search->add_option("--bound", bound, "max |n| per class")->check(CLI::Range(0, 10));
  search->add_option("--tol", tol, "acceptance residual")->capture_default_str();
  search->add_option("--budget-secs", budget_secs, "wall-time budget (0 = none)");
  search->add_option("--seed", seed, "search seed");
  search->add_option("--threads", threads, "worker threads (0 = auto)");
  search->add_option("--out", out, "solution JSON path");
  search->add_flag("--evolutionary", use_ga, "use the evolutionary search instead");
  search->add_option("--population", population, "GA population");
  search->add_option("--generations", generations, "GA generations");

  auto* verify = app.add_subcommand("verify", "check a solution against its target");
  verify->add_option("--solution", solution_file, "solution JSON")->required();
  verify->add_option("--tol", tol, "max allowed deviation (radians)")->capture_default_str();

  auto* inject = app.add_subcommand("inject", "noiseless error-injection demo");
  inject->add_option("--code", code, "5rc | 5qc");
  inject->add_option("--error", error_specs, "Pauli@qubit, repeatable (e.g. Z@3)");

  auto* simulate = app.add_subcommand("simulate", "mean fidelity at one (sigma, t)");
  simulate->add_option("--code", code, "5rc | 5qc");
  simulate->add_option("--sigma", sigma, "pulse noise s.d.");
  simulate->add_option("--samples", samples, "Monte-Carlo samples");
  simulate->add_option("--t", t, "storage time");
  simulate->add_option("--gate-time", gate_time, "dephasing/depolarising window per unitary");
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--threads", threads, "worker threads (0 = auto)");
  simulate->add_option("--out", out, "output CSV (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "fidelity curves, tau extraction, scaling fit");
  sweep->add_option("--code", code, "5rc | 5qc");
  sweep->add_option("--sigmas", sigmas, "sigma list (default per code)");
  sweep->add_option("--samples", samples, "samples per (sigma, t)");
  sweep->add_option("--tmax", tmax, "truncate the time grid at tmax");
  sweep->add_option("--seed", seed, "master seed");
  sweep->add_option("--threads", threads, "worker threads (0 = auto)");
  sweep->add_option("--out", out, "output prefix (default 'sweep')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;   // --help / --version
    std::cerr << app.help() << std::flush;
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (modes->parsed()) return cmd_modes(config_file, out, seed);
    if (phases->parsed()) return cmd_phases(solution_file, areas, ratio, out);
    if (search->parsed())
      return cmd_search(target_name, target_file, bound, tol, budget_secs, seed, threads,
                        out, use_ga, population, generations);
    if (verify->parsed()) return cmd_verify(solution_file, tol);
    if (inject->parsed()) return cmd_inject(code, error_specs);
    if (simulate->parsed())
      return cmd_simulate(code, sigma, samples, t, gate_time, seed, threads, out);
    if (sweep->parsed()) return cmd_sweep(code, sigmas, samples, tmax, seed, threads, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
