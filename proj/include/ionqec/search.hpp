#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <thread>
#include <vector>

#include "ionqec/common.hpp"
#include "ionqec/coupling.hpp"
#include "ionqec/nelder_mead.hpp"
#include "ionqec/targets.hpp"

namespace ionqec {

inline constexpr double kAreaMax = 25.0;   // covers the published 19.65 with headroom
inline constexpr double kRatioMin = -2.0;
inline constexpr double kRatioMax = -0.5;

struct IntegerAssignment {
  std::vector<int> n;   // one entry per cyclic class, reference class fixed to 0
  int bound = 10;
};

struct FoundSolution {
  PulseSolution solution;
  double residual = 0.0;
  IntegerAssignment assignment;
};

struct SearchReport {
  std::vector<FoundSolution> solutions;
  uint64_t nodes_explored = 0;
  uint64_t nodes_pruned = 0;   // counted as whole cut-off subtrees
  double wall_time = 0.0;
  bool exhausted = false;      // budget ran out before the tree was covered
};

struct SearchOptions {
  double prune_threshold = 1e-6;
  double tolerance = 1e-8;
  uint64_t max_nodes = 0;      // 0 = unlimited
  double max_seconds = 0.0;    // 0 = unlimited
  int threads = 0;             // 0 = hardware concurrency
  uint64_t seed = 0;
  int inner_restarts = 3;      // per-node Nelder-Mead budget
  int inner_evals = 500;
};

// Phases of the 16 class representatives for a pulse sequence.
inline std::vector<double> class_phases(const PhaseModel& model,
                                        const std::array<double, 4>& areas, double ratio) {
  const auto& classes = cyclic_classes();
  std::vector<double> out(classes.size());
  for (size_t k = 0; k < classes.size(); ++k)
    out[k] = model.phase(classes[k].representative, areas, ratio);
  return out;
}

inline std::vector<double> class_targets(const TargetUnitary& target) {
  const auto& classes = cyclic_classes();
  std::vector<double> out(classes.size());
  for (size_t k = 0; k < classes.size(); ++k)
    out[k] = target[classes[k].representative];
  return out;
}

// Telescoping cost over consecutive classes: zero iff all total phases match
// the target up to one global phase. n is class-indexed with n[0] = 0.
inline double cost(const std::array<double, 4>& areas, double ratio,
                   const std::vector<int>& n, const TargetUnitary& target,
                   const PhaseModel& model) {
  const auto phi = class_phases(model, areas, ratio);
  const auto tgt = class_targets(target);
  double c = 0.0;
  double prev = phi[0] + kTwoPi * n[0] - tgt[0];
  for (size_t k = 1; k < phi.size(); ++k) {
    const double cur = phi[k] + kTwoPi * n[k] - tgt[k];
    c += (cur - prev) * (cur - prev);
    prev = cur;
  }
  return c;
}

// Max deviation of phi - phi' from a constant, measured mod 2pi with the
// reference class fixing the constant.
inline double verify_solution(const PulseSolution& solution, const TargetUnitary& target,
                              const PhaseModel& model) {
  const auto phi = model.phases(solution.areas, solution.ratio);
  const double ref = phi[0] - target[0];
  double worst = 0.0;
  for (int s = 0; s < kDim; ++s)
    worst = std::max(worst, std::abs(wrap_angle(phi[s] - target[s] - ref)));
  return worst;
}

// Integer string implied by a near-solution: the per-class 2pi wrap counts
// relative to the reference class.
inline IntegerAssignment recover_assignment(const PulseSolution& solution,
                                            const TargetUnitary& target,
                                            const PhaseModel& model, int bound = 10) {
  const auto phi = class_phases(model, solution.areas, solution.ratio);
  const auto tgt = class_targets(target);
  const double ref = phi[0] - tgt[0];
  IntegerAssignment ia;
  ia.bound = bound;
  ia.n.resize(phi.size(), 0);
  for (size_t k = 1; k < phi.size(); ++k)
    ia.n[k] = static_cast<int>(std::lround((ref - (phi[k] - tgt[k])) / kTwoPi));
  return ia;
}

// Local polish of a near-solution (e.g. the paper's 4-significant-figure
// prints) down to machine-precision residual, keeping its integer string.
inline PulseSolution refine_solution(const PulseSolution& solution,
                                     const TargetUnitary& target, const PhaseModel& model,
                                     double tolerance = 1e-12) {
  const auto ia = recover_assignment(solution, target, model);
  auto f = [&](const std::vector<double>& x) {
    return cost({x[0], x[1], x[2], x[3]}, x[4], ia.n, target, model);
  };
  NelderMeadOptions opt;
  opt.restarts = 6;
  opt.max_evals = 20000;
  opt.spread_tol = 1e-18;
  opt.initial_step = 0.05;
  opt.jitter = 0.002;
  const auto res = nelder_mead(
      f, {solution.areas[0], solution.areas[1], solution.areas[2], solution.areas[3],
          solution.ratio},
      {0.0, 0.0, 0.0, 0.0, kRatioMin}, {kAreaMax, kAreaMax, kAreaMax, kAreaMax, kRatioMax},
      opt);
  if (res.value > tolerance)
    throw OptimizationError("refine_solution did not reach the requested residual");
  PulseSolution out = solution;
  out.areas = {res.x[0], res.x[1], res.x[2], res.x[3]};
  out.ratio = res.x[4];
  return out;
}

namespace detail {

// Generic DFS branch-and-bound core. class_phase_fn evaluates the class
// phases for (P, R); targets are per-class; the inner Nelder-Mead minimises
// the first d telescoping terms at prefix depth d.
struct SearchProblem {
  std::function<std::vector<double>(const std::array<double, 4>&, double)> class_phase_fn;
  std::vector<double> targets;
  int n_classes = 16;
};

struct DfsContext {
  const SearchProblem* prob;
  const SearchOptions* opt;
  int bound;
  std::vector<FoundSolution> solutions;
  uint64_t explored = 0;
  uint64_t pruned = 0;
  std::atomic<uint64_t>* global_nodes;
  std::chrono::steady_clock::time_point deadline;
  bool use_deadline = false;
  bool stopped = false;
};

// nodes in a full subtree hanging below depth d (widths^1 + ... at depths
// d+1..n_classes-1)
inline uint64_t subtree_below(int depth, int n_free, uint64_t width) {
  uint64_t total = 0, layer = 1;
  for (int e = depth + 1; e <= n_free; ++e) {
    layer *= width;
    total += layer;
  }
  return total;
}

inline double partial_cost(const SearchProblem& prob, const std::array<double, 4>& areas,
                           double ratio, const std::vector<int>& n, int depth) {
  const auto phi = prob.class_phase_fn(areas, ratio);
  double c = 0.0;
  double prev = phi[0] - prob.targets[0];
  for (int k = 1; k <= depth; ++k) {
    const double cur = phi[k] + kTwoPi * n[k] - prob.targets[k];
    c += (cur - prev) * (cur - prev);
    prev = cur;
  }
  return c;
}

struct NodeMin {
  std::array<double, 4> areas{};
  double ratio = -1.0;
  double value = 0.0;
};

inline NodeMin minimize_prefix(const SearchProblem& prob, const std::vector<int>& n,
                               int depth, const NodeMin& warm, const SearchOptions& opt,
                               uint64_t node_key) {
  const std::vector<double> lo = {0.0, 0.0, 0.0, 0.0, kRatioMin};
  const std::vector<double> hi = {kAreaMax, kAreaMax, kAreaMax, kAreaMax, kRatioMax};
  auto f = [&](const std::vector<double>& x) {
    return partial_cost(prob, {x[0], x[1], x[2], x[3]}, x[4], n, depth);
  };
  NelderMeadOptions nm;
  nm.restarts = opt.inner_restarts;
  nm.max_evals = opt.inner_evals;
  nm.spread_tol = 1e-16;
  nm.seed = mix64(node_key);

  // a false prune loses a whole subtree, so start from a small portfolio:
  // the parent's minimiser plus fixed probes spread over the R window
  NodeMin out;
  out.value = std::numeric_limits<double>::infinity();
  const std::array<std::array<double, 5>, 4> probes = {{
      {warm.areas[0], warm.areas[1], warm.areas[2], warm.areas[3], warm.ratio},
      {2.0, 2.0, 2.0, 2.0, -1.4},
      {1.0, 1.0, 1.0, 1.0, -0.7},
      {6.0, 6.0, 6.0, 6.0, -1.0},
  }};
  for (const auto& p : probes) {
    const auto res = nelder_mead(f, {p[0], p[1], p[2], p[3], p[4]}, lo, hi, nm);
    if (res.value < out.value) {
      out.areas = {res.x[0], res.x[1], res.x[2], res.x[3]};
      out.ratio = res.x[4];
      out.value = res.value;
    }
    if (out.value < 1e-14) break;   // already certainly below any sane threshold
  }
  return out;
}

inline void dfs(DfsContext& ctx, std::vector<int>& n, int depth, const NodeMin& parent,
                uint64_t key) {
  const int n_free = ctx.prob->n_classes - 1;
  const uint64_t width = 2 * static_cast<uint64_t>(ctx.bound) + 1;
  if (ctx.stopped) return;
  if (ctx.use_deadline && std::chrono::steady_clock::now() > ctx.deadline) {
    ctx.stopped = true;
    return;
  }
  if (ctx.opt->max_nodes &&
      ctx.global_nodes->load(std::memory_order_relaxed) >= ctx.opt->max_nodes) {
    ctx.stopped = true;
    return;
  }

  ++ctx.explored;
  ctx.global_nodes->fetch_add(1, std::memory_order_relaxed);

  const NodeMin here = minimize_prefix(*ctx.prob, n, depth, parent, *ctx.opt, key);
  if (depth == n_free) {
    if (here.value < ctx.opt->tolerance) {
      FoundSolution fs;
      fs.solution.areas = here.areas;
      fs.solution.ratio = here.ratio;
      fs.residual = here.value;
      fs.assignment.n = n;
      fs.assignment.bound = ctx.bound;
      ctx.solutions.push_back(std::move(fs));
    }
    return;
  }
  if (here.value > ctx.opt->prune_threshold) {
    ctx.pruned += subtree_below(depth, n_free, width);
    return;
  }
  for (int v = -ctx.bound; v <= ctx.bound; ++v) {
    n[depth + 1] = v;
    dfs(ctx, n, depth + 1, here, mix64(key) + static_cast<uint64_t>(v + ctx.bound));
    if (ctx.stopped) {
      // remaining siblings are uncovered, not pruned; report exhausted
      n[depth + 1] = 0;
      return;
    }
  }
  n[depth + 1] = 0;
}

inline SearchReport integer_search_core(const SearchProblem& prob, int bound,
                                        const SearchOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_free = prob.n_classes - 1;
  const uint64_t width = 2 * static_cast<uint64_t>(bound) + 1;

  std::atomic<uint64_t> global_nodes{0};
  const auto deadline =
      t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
               std::chrono::duration<double>(opt.max_seconds));

  // root prefix (depth 0: only the reference class) is trivially zero-cost;
  // top-level branches n[1] = -bound..bound are distributed over workers
  std::vector<DfsContext> ctxs(width);
  std::atomic<int> next_branch{0};
  int n_threads = opt.threads > 0 ? opt.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(width)));

  auto worker = [&] {
    for (;;) {
      const int b = next_branch.fetch_add(1);
      if (b >= static_cast<int>(width)) return;
      auto& ctx = ctxs[b];
      ctx.prob = &prob;
      ctx.opt = &opt;
      ctx.bound = bound;
      ctx.global_nodes = &global_nodes;
      ctx.use_deadline = opt.max_seconds > 0;
      ctx.deadline = deadline;
      std::vector<int> n(prob.n_classes, 0);
      n[1] = b - bound;
      NodeMin warm;
      warm.areas = {1.0, 1.0, 1.0, 1.0};
      warm.ratio = -1.0;
      dfs(ctx, n, 1, warm, mix64(opt.seed) + static_cast<uint64_t>(b));
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SearchReport rep;
  for (const auto& ctx : ctxs) {
    rep.nodes_explored += ctx.explored;
    rep.nodes_pruned += ctx.pruned;
    rep.exhausted = rep.exhausted || ctx.stopped;
    for (const auto& s : ctx.solutions) rep.solutions.push_back(s);
  }
  std::stable_sort(rep.solutions.begin(), rep.solutions.end(),
                   [](const FoundSolution& a, const FoundSolution& b) {
                     const double pa = a.solution.areas[0] + a.solution.areas[1] +
                                       a.solution.areas[2] + a.solution.areas[3];
                     const double pb = b.solution.areas[0] + b.solution.areas[1] +
                                       b.solution.areas[2] + b.solution.areas[3];
                     if (std::abs(pa - pb) > 1e-9) return pa < pb;
                     return std::abs(a.solution.ratio + 1.0) < std::abs(b.solution.ratio + 1.0);
                   });
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

inline SearchProblem make_problem(const TargetUnitary& target, const PhaseModel& model) {
  SearchProblem prob;
  prob.targets = class_targets(target);
  prob.n_classes = static_cast<int>(prob.targets.size());
  prob.class_phase_fn = [&model](const std::array<double, 4>& areas, double ratio) {
    return class_phases(model, areas, ratio);
  };
  return prob;
}

}  // namespace detail

// Pruned exhaustive search over integer strings, nested Nelder-Mead inside.
// The 16-class reduction (phases are constant on cyclic orbits) shrinks the
// paper's O(2^N) string space before bounding.
inline SearchReport integer_search(const TargetUnitary& target, const PhaseModel& model,
                                   int bound, const SearchOptions& opt = {}) {
  if (bound < 0 || bound > 10) throw ConfigError("integer bound must be in [0, 10]");
  const auto prob = detail::make_problem(target, model);
  return detail::integer_search_core(prob, bound, opt);
}

// Memetic alternative: tournament selection + Gaussian mutation on (P, R),
// +-1 integer mutation on n, elitism of 2, short local polish as fitness.
inline SearchReport evolutionary_search(const TargetUnitary& target, const PhaseModel& model,
                                        int population, int generations, uint64_t seed,
                                        const SearchOptions& opt = {}) {
  if (population < 8) throw ConfigError("population must be >= 8");
  const auto t0 = std::chrono::steady_clock::now();
  const auto prob = detail::make_problem(target, model);
  const int n_free = prob.n_classes - 1;
  const int bound = 10;

  SearchReport rep;
  if (generations <= 0) {
    rep.wall_time = 0.0;
    return rep;
  }

  Rng rng(seed, 0xea /* evolutionary stream */);
  struct Genome {
    std::array<double, 4> areas;
    double ratio;
    std::vector<int> n;
    double fitness = std::numeric_limits<double>::infinity();
  };

  // Lamarckian repair: re-derive the wrap counts from the genome's current
  // continuous point, so the integer string tracks the phases it produces.
  auto repair = [&](Genome& g) {
    const auto phi = prob.class_phase_fn(g.areas, g.ratio);
    const double ref = phi[0] - prob.targets[0];
    for (int k = 1; k < prob.n_classes; ++k) {
      const int w = static_cast<int>(std::lround((ref - (phi[k] - prob.targets[k])) / kTwoPi));
      g.n[k] = std::clamp(w, -bound, bound);
    }
  };

  auto polish = [&](Genome& g, int restarts, int evals) {
    detail::NodeMin warm;
    warm.areas = g.areas;
    warm.ratio = g.ratio;
    SearchOptions inner = opt;
    inner.inner_restarts = restarts;
    inner.inner_evals = evals;
    const auto m = detail::minimize_prefix(prob, g.n, n_free, warm, inner, rng.next_u64());
    g.areas = m.areas;
    g.ratio = m.ratio;
    g.fitness = m.value;
  };

  std::vector<Genome> pop(population);
  for (auto& g : pop) {
    for (auto& p : g.areas) p = rng.uniform(0.0, 8.0);
    g.ratio = rng.uniform(kRatioMin, kRatioMax);
    g.n.assign(prob.n_classes, 0);
    repair(g);
    polish(g, 0, 300);
  }

  std::map<std::vector<int>, FoundSolution> accepted;
  auto maybe_accept = [&](Genome g) {
    if (g.fitness > 1e-3) return;
    polish(g, 4, 4000);
    if (g.fitness < opt.tolerance) {
      FoundSolution fs;
      fs.solution.areas = g.areas;
      fs.solution.ratio = g.ratio;
      fs.residual = g.fitness;
      fs.assignment.n = g.n;
      fs.assignment.bound = bound;
      auto it = accepted.find(g.n);
      if (it == accepted.end() || fs.residual < it->second.residual)
        accepted[g.n] = fs;
    }
  };

  for (int gen = 0; gen < generations; ++gen) {
    std::sort(pop.begin(), pop.end(),
              [](const Genome& a, const Genome& b) { return a.fitness < b.fitness; });
    maybe_accept(pop[0]);
    if (opt.max_seconds > 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
            opt.max_seconds)
      break;

    std::vector<Genome> next;
    next.push_back(pop[0]);
    if (population > 1) next.push_back(pop[1]);
    auto tournament = [&]() -> const Genome& {
      const Genome* best = &pop[rng.below(pop.size())];
      for (int i = 0; i < 2; ++i) {
        const Genome& c = pop[rng.below(pop.size())];
        if (c.fitness < best->fitness) best = &c;
      }
      return *best;
    };
    while (static_cast<int>(next.size()) < population) {
      Genome child = tournament();
      for (auto& p : child.areas)
        p = std::clamp(p + 0.4 * rng.normal(), 0.0, kAreaMax);
      child.ratio = std::clamp(child.ratio + 0.05 * rng.normal(), kRatioMin, kRatioMax);
      for (int k = 1; k < prob.n_classes; ++k)
        if (rng.uniform() < 0.15)
          child.n[k] = std::clamp(child.n[k] + (rng.uniform() < 0.5 ? 1 : -1), -bound, bound);
      if (rng.uniform() < 0.5) repair(child);
      polish(child, 0, 300);
      next.push_back(std::move(child));
    }
    pop.swap(next);
  }
  std::sort(pop.begin(), pop.end(),
            [](const Genome& a, const Genome& b) { return a.fitness < b.fitness; });
  for (int i = 0; i < std::min(population, 4); ++i) maybe_accept(pop[i]);

  for (auto& [_, fs] : accepted) rep.solutions.push_back(fs);
  std::stable_sort(rep.solutions.begin(), rep.solutions.end(),
                   [](const FoundSolution& a, const FoundSolution& b) {
                     const double pa = a.solution.areas[0] + a.solution.areas[1] +
                                       a.solution.areas[2] + a.solution.areas[3];
                     const double pb = b.solution.areas[0] + b.solution.areas[1] +
                                       b.solution.areas[2] + b.solution.areas[3];
                     if (std::abs(pa - pb) > 1e-9) return pa < pb;
                     return std::abs(a.solution.ratio + 1.0) < std::abs(b.solution.ratio + 1.0);
                   });
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace ionqec
