#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ionqec/common.hpp"
#include "ionqec/rng.hpp"

namespace ionqec {

struct NelderMeadOptions {
  double spread_tol = 1e-12;   // terminate when max-min cost over simplex drops below
  int max_evals = 20000;       // per restart
  int restarts = 8;            // additional starts from jittered best point
  double initial_step = 0.5;
  double jitter = 0.25;
  uint64_t seed = 0;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  long evals = 0;
  bool converged = false;
};

// Derivative-free simplex minimiser with the standard reflection/expansion/
// contraction/shrink coefficients (1, 2, 0.5, 0.5). Box bounds are enforced
// by projection. Deterministic for a fixed seed.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0,
                                    const std::vector<double>& lo,
                                    const std::vector<double>& hi,
                                    const NelderMeadOptions& opt = {}) {
  const int dim = static_cast<int>(x0.size());
  Rng rng(opt.seed, 0x4e4d /* nelder-mead jitter stream */);

  auto project = [&](std::vector<double>& x) {
    for (int i = 0; i < dim; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  };
  project(x0);

  NelderMeadResult best;
  long total_evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++total_evals;
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericError("non-finite cost in Nelder-Mead");
    return v;
  };

  std::vector<double> start = x0;
  for (int round = 0; round <= opt.restarts; ++round) {
    // initial simplex around the start point
    std::vector<std::vector<double>> xs(dim + 1, start);
    for (int i = 0; i < dim; ++i) {
      double step = opt.initial_step * std::max(1.0, std::abs(start[i]));
      if (start[i] + step > hi[i]) step = -step;
      xs[i + 1][i] += step;
      project(xs[i + 1]);
    }
    std::vector<double> fs(dim + 1);
    for (int i = 0; i <= dim; ++i) fs[i] = eval(xs[i]);

    long evals = dim + 1;
    while (evals < opt.max_evals) {
      // order
      std::vector<int> ord(dim + 1);
      for (int i = 0; i <= dim; ++i) ord[i] = i;
      std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
      {
        std::vector<std::vector<double>> x2(dim + 1);
        std::vector<double> f2(dim + 1);
        for (int i = 0; i <= dim; ++i) {
          x2[i] = xs[ord[i]];
          f2[i] = fs[ord[i]];
        }
        xs.swap(x2);
        fs.swap(f2);
      }
      if (fs[dim] - fs[0] < opt.spread_tol) break;

      std::vector<double> centroid(dim, 0.0);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) centroid[j] += xs[i][j];
      }
      for (double& c : centroid) c /= dim;

      auto along = [&](double coef) {
        std::vector<double> x(dim);
        for (int j = 0; j < dim; ++j) x[j] = centroid[j] + coef * (centroid[j] - xs[dim][j]);
        project(x);
        return x;
      };

      const auto xr = along(1.0);
      const double fr = eval(xr);
      ++evals;
      if (fr < fs[0]) {
        const auto xe = along(2.0);
        const double fe = eval(xe);
        ++evals;
        if (fe < fr) {
          xs[dim] = xe;
          fs[dim] = fe;
        } else {
          xs[dim] = xr;
          fs[dim] = fr;
        }
      } else if (fr < fs[dim - 1]) {
        xs[dim] = xr;
        fs[dim] = fr;
      } else {
        const bool outside = fr < fs[dim];
        const auto xc = along(outside ? 0.5 : -0.5);
        const double fc = eval(xc);
        ++evals;
        if (fc < (outside ? fr : fs[dim])) {
          xs[dim] = xc;
          fs[dim] = fc;
        } else {
          for (int i = 1; i <= dim; ++i) {
            for (int j = 0; j < dim; ++j) xs[i][j] = xs[0][j] + 0.5 * (xs[i][j] - xs[0][j]);
            project(xs[i]);
            fs[i] = eval(xs[i]);
            ++evals;
          }
        }
      }
    }

    const int arg = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
    if (fs[arg] < best.value) {
      best.value = fs[arg];
      best.x = xs[arg];
      best.converged = true;
    }
    // jittered restart from the best point found so far
    start = best.x;
    for (int i = 0; i < dim; ++i)
      start[i] += opt.jitter * (hi[i] - lo[i]) * rng.normal() * 0.1;
    project(start);
  }
  best.evals = total_evals;
  return best;
}

}  // namespace ionqec
