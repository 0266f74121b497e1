#pragma once

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "ionqec/common.hpp"
#include "ionqec/engine.hpp"
#include "ionqec/nelder_mead.hpp"
#include "ionqec/protocol.hpp"
#include "ionqec/rng.hpp"

namespace ionqec {

inline constexpr double kFidelityThreshold = 0.99;

// 25 log-spaced points per decade over [1e-4, 1].
inline std::vector<double> default_time_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 100; ++i) g.push_back(std::pow(10.0, -4.0 + i / 25.0));
  return g;
}

struct SweepConfig {
  CodeKind code = CodeKind::FiveRC;
  std::vector<double> sigmas{0.0, 0.005, 0.01, 0.015};
  int samples = 500;
  std::vector<double> time_grid = default_time_grid();
  uint64_t seed = 0;
  double gate_time = 5e-4;
  int threads = 0;   // 0 = hardware concurrency

  void validate() const {
    if (samples < 1) throw ConfigError("samples must be >= 1");
    for (size_t i = 0; i < time_grid.size(); ++i) {
      if (time_grid[i] <= 0.0) throw ConfigError("time grid must be positive");
      if (i > 0 && time_grid[i] <= time_grid[i - 1])
        throw ConfigError("time grid must be strictly increasing");
    }
  }
};

struct CurvePoint {
  double t;
  double mean;
  double std_err;
};
using Curve = std::vector<CurvePoint>;

struct TauResult {
  double tau = 0.0;
  bool censored = false;
};

struct FitResult {
  double tau0 = 0.0;
  double alpha = 0.0;
  double sigma_th = 0.0;
  double rms = 0.0;
  bool ok = false;
};

struct SweepRecord {
  std::vector<double> sigmas;
  std::vector<Curve> curves;        // one per sigma
  std::vector<TauResult> taus;      // one per sigma
  TauResult tau_1q;
  std::vector<double> ratios;       // tau / tau_1q
  FitResult fit;
  double sigma_th_raw = 0.0;        // raw interpolated ratio = 1 crossing
};

namespace detail {

// Ordered compensated sum so parallel runs reduce identically.
inline double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

template <typename Fn>
void parallel_for(int n, int threads, Fn&& body) {
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nt = std::max(1, std::min(nt, n));
  if (nt == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline CurvePoint reduce_point(double t, const std::vector<double>& vals) {
  const int n = static_cast<int>(vals.size());
  const double mean = kahan_sum(vals) / n;
  double var = 0.0;
  if (n > 1) {
    std::vector<double> sq(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) sq[i] = (vals[i] - mean) * (vals[i] - mean);
    var = kahan_sum(sq) / (n - 1);
  }
  return {t, mean, std::sqrt(var / n)};
}

}  // namespace detail

// Mean protocol fidelity over `samples` independent (psi, pulse-noise) draws
// at every grid time. Sample (sigma_index, t_index, sample_index) owns its
// own RNG substream, so the result is bit-identical for any thread count.
inline Curve fidelity_curve(const Protocol& protocol, const SweepConfig& config,
                            double sigma, int sigma_index) {
  config.validate();
  const int nt = static_cast<int>(config.time_grid.size());
  const int ns = config.samples;
  std::vector<std::vector<double>> values(nt, std::vector<double>(ns));

  detail::parallel_for(nt * ns, config.threads, [&](int flat) {
    const int ti = flat / ns;
    const int si = flat % ns;
    Rng rng(config.seed, static_cast<uint64_t>(sigma_index), static_cast<uint64_t>(ti),
            static_cast<uint64_t>(si));
    const PureTarget psi = random_pure_target(rng);
    values[ti][si] =
        protocol.run(psi, config.time_grid[ti], sigma, rng, config.gate_time);
  });

  Curve curve(nt);
  for (int ti = 0; ti < nt; ++ti)
    curve[ti] = detail::reduce_point(config.time_grid[ti], values[ti]);
  return curve;
}

// First crossing of the mean fidelity below the threshold, by linear
// interpolation between the bracketing grid points.
inline TauResult high_fidelity_time(const Curve& curve, double threshold = kFidelityThreshold) {
  if (curve.empty()) return {0.0, false};
  if (curve.front().mean < threshold) return {0.0, false};
  for (size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].mean < threshold) {
      const auto& a = curve[i - 1];
      const auto& b = curve[i];
      const double f = (a.mean - threshold) / (a.mean - b.mean);
      return {a.t + f * (b.t - a.t), false};
    }
  }
  return {curve.back().t, true};
}

// Monte-Carlo high-fidelity time of a bare qubit under the code's paired
// channel, averaged over the same Haar ensemble as the code runs.
inline TauResult baseline_tau(CodeKind kind, int samples, uint64_t seed,
                              const std::vector<double>& grid = default_time_grid(),
                              double threshold = kFidelityThreshold) {
  const NoiseChannelSpec::Kind ck = kind == CodeKind::FiveRC
                                        ? NoiseChannelSpec::Kind::Dephasing
                                        : NoiseChannelSpec::Kind::Depolarizing;
  Curve curve;
  for (size_t ti = 0; ti < grid.size(); ++ti) {
    std::vector<double> vals(samples);
    for (int si = 0; si < samples; ++si) {
      Rng rng(seed, 0xb0 /* baseline stream */, ti, static_cast<uint64_t>(si));
      const PureTarget psi = random_pure_target(rng);
      Eigen::Vector2cd v(psi.alpha, psi.beta);
      Eigen::Matrix2cd rho = v * v.adjoint();
      Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
      for (const auto& k : kraus_operators({ck, grid[ti]}))
        out += k * rho * k.adjoint();
      vals[si] = std::abs((v.adjoint() * out * v)(0, 0).real());
    }
    curve.push_back(detail::reduce_point(grid[ti], vals));
  }
  return high_fidelity_time(curve, threshold);
}

// Least-squares fit of ratio(sigma) = tau0 * (2 - exp(sigma^2 / alpha)).
inline FitResult fit_scaling(const std::vector<double>& sigmas,
                             const std::vector<double>& ratios) {
  FitResult fr;
  if (sigmas.size() < 3) return fr;
  const double smax = *std::max_element(sigmas.begin(), sigmas.end());
  const double r0 = ratios.front();

  auto residuals = [&](double tau0, double alpha) {
    double ss = 0.0;
    for (size_t i = 0; i < sigmas.size(); ++i) {
      const double x = sigmas[i] * sigmas[i] / alpha;
      if (x > 50.0) return 1e12 * x;   // finite overflow guard for tiny alpha
      const double m = tau0 * (2.0 - std::exp(x));
      ss += (m - ratios[i]) * (m - ratios[i]);
    }
    return ss;
  };
  try {
    NelderMeadOptions opt;
    opt.restarts = 6;
    opt.max_evals = 4000;
    const auto res = nelder_mead(
        [&](const std::vector<double>& x) { return residuals(x[0], x[1]); },
        {r0, smax * smax / std::log(2.0)}, {1e-6, 1e-9}, {1e4, 10.0}, opt);
    fr.tau0 = res.x[0];
    fr.alpha = res.x[1];
    fr.rms = std::sqrt(res.value / sigmas.size());
    fr.ok = res.converged;
    const double arg = 2.0 - 1.0 / fr.tau0;
    fr.sigma_th = arg > 1.0 ? std::sqrt(fr.alpha * std::log(arg))
                            : std::numeric_limits<double>::quiet_NaN();
  } catch (const NumericError&) {
    fr.ok = false;   // divergence: raw ratios stay available in the record
  }
  return fr;
}

inline SweepRecord sweep_and_fit(const Protocol& protocol, const SweepConfig& config) {
  config.validate();
  if (config.sigmas.size() < 3)
    throw ConfigError("sweep needs at least 3 sigma values to fit");
  SweepRecord rec;
  rec.sigmas = config.sigmas;
  for (size_t i = 0; i < config.sigmas.size(); ++i) {
    rec.curves.push_back(
        fidelity_curve(protocol, config, config.sigmas[i], static_cast<int>(i)));
    rec.taus.push_back(high_fidelity_time(rec.curves.back()));
  }
  rec.tau_1q = baseline_tau(protocol.kind(), config.samples, config.seed, config.time_grid);
  for (const auto& tr : rec.taus) rec.ratios.push_back(tr.tau / rec.tau_1q.tau);
  rec.fit = fit_scaling(rec.sigmas, rec.ratios);

  // raw interpolated crossing of ratio = 1, alongside the fitted threshold
  rec.sigma_th_raw = 0.0;
  for (size_t i = 1; i < rec.ratios.size(); ++i) {
    if ((rec.ratios[i - 1] - 1.0) * (rec.ratios[i] - 1.0) <= 0.0 &&
        rec.ratios[i - 1] != rec.ratios[i]) {
      const double f = (rec.ratios[i - 1] - 1.0) / (rec.ratios[i - 1] - rec.ratios[i]);
      rec.sigma_th_raw = rec.sigmas[i - 1] + f * (rec.sigmas[i] - rec.sigmas[i - 1]);
      break;
    }
  }
  return rec;
}

}  // namespace ionqec
