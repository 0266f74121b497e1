#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ionqec/common.hpp"
#include "ionqec/rng.hpp"

namespace ionqec {

// Planar Coulomb crystal in dimensionless units: axial trap frequency, ion
// mass and Coulomb constant are all 1. planar_stiffness is the ratio of
// in-plane to axial confinement; the transverse mode *vectors* of the 1+5
// crystal do not depend on it, only the frequencies do. The default is well
// inside the transverse-stability window beta < 0.396 of the 1+5 layout.
struct CrystalConfig {
  int n_ions = 6;
  double planar_stiffness = 0.2;
  uint64_t seed = 0;
  std::optional<std::vector<Eigen::Vector2d>> seed_layout;

  void validate() const {
    if (n_ions < 1) throw ConfigError("n_ions must be >= 1");
    if (!(planar_stiffness > 0.0)) throw ConfigError("beta must be > 0");
  }
};

struct Geometry {
  std::vector<Eigen::Vector2d> positions;
  Eigen::MatrixXd pair_distances;

  int n() const { return static_cast<int>(positions.size()); }
};

struct ModeBasis {
  Eigen::VectorXd frequencies;              // decreasing
  Eigen::MatrixXd eigenvectors;             // rows are mode vectors <a_m|
  std::vector<std::vector<int>> degenerate_groups;
};

namespace detail {

inline double crystal_energy(const Eigen::VectorXd& x, double beta, int n) {
  double u = 0.0;
  for (int i = 0; i < n; ++i)
    u += 0.5 * beta * (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1]);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      u += 1.0 / std::sqrt(dx * dx + dy * dy);
    }
  return u;
}

inline Eigen::VectorXd crystal_gradient(const Eigen::VectorXd& x, double beta, int n) {
  Eigen::VectorXd g = beta * x;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      const double d2 = dx * dx + dy * dy;
      const double inv3 = 1.0 / (d2 * std::sqrt(d2));
      g[2 * i] -= dx * inv3;
      g[2 * i + 1] -= dy * inv3;
      g[2 * j] += dx * inv3;
      g[2 * j + 1] += dy * inv3;
    }
  return g;
}

inline Eigen::MatrixXd crystal_hessian(const Eigen::VectorXd& x, double beta, int n) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) h(i, i) = beta;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      const double d2 = dx * dx + dy * dy;
      const double inv3 = 1.0 / (d2 * std::sqrt(d2));
      const double inv5 = inv3 / d2;
      // d^2(1/d)/dr_i dr_i = -I/d^3 + 3 rr^T/d^5, cross block is the negative
      Eigen::Matrix2d blk;
      blk << -inv3 + 3.0 * dx * dx * inv5, 3.0 * dx * dy * inv5,
             3.0 * dx * dy * inv5, -inv3 + 3.0 * dy * dy * inv5;
      h.block<2, 2>(2 * i, 2 * i) += blk;
      h.block<2, 2>(2 * j, 2 * j) += blk;
      h.block<2, 2>(2 * i, 2 * j) -= blk;
      h.block<2, 2>(2 * j, 2 * i) -= blk;
    }
  return h;
}

// Seed layout: points of a triangular lattice sorted by radius, scaled to the
// crystal's natural length beta^(-1/3), with a small random perturbation.
inline Eigen::VectorXd hex_seed(int n, double beta, Rng& rng) {
  std::vector<Eigen::Vector2d> pts;
  const double a = 1.2 * std::pow(1.0 / beta, 1.0 / 3.0);
  for (int p = -4; p <= 4; ++p)
    for (int q = -4; q <= 4; ++q)
      pts.emplace_back(a * (p + 0.5 * q), a * (0.8660254037844386 * q));
  std::sort(pts.begin(), pts.end(), [](const auto& u, const auto& v) {
    return u.squaredNorm() < v.squaredNorm();
  });
  Eigen::VectorXd x(2 * n);
  for (int i = 0; i < n; ++i) {
    x[2 * i] = pts[i].x() + 0.05 * a * rng.normal();
    x[2 * i + 1] = pts[i].y() + 0.05 * a * rng.normal();
  }
  return x;
}

// Gradient descent with adaptive step, then Newton polish with Levenberg
// damping. Returns true when gradient max-norm < 1e-9 at a (local) minimum.
inline bool relax(Eigen::VectorXd& x, double beta, int n) {
  double step = 0.05;
  double e = crystal_energy(x, beta, n);
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXd g = crystal_gradient(x, beta, n);
    if (g.lpNorm<Eigen::Infinity>() < 1e-6) break;
    Eigen::VectorXd xn = x - step * g;
    const double en = crystal_energy(xn, beta, n);
    if (en < e) {
      x = xn;
      e = en;
      step = std::min(step * 1.2, 0.5);
    } else {
      step *= 0.5;
      if (step < 1e-14) break;
    }
  }
  double mu = 1e-8;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd g = crystal_gradient(x, beta, n);
    if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
    Eigen::MatrixXd h = crystal_hessian(x, beta, n);
    h.diagonal().array() += mu;
    const Eigen::VectorXd dx = h.ldlt().solve(g);
    const Eigen::VectorXd xn = x - dx;
    if (crystal_energy(xn, beta, n) <= e + 1e-15) {
      x = xn;
      e = crystal_energy(x, beta, n);
      mu = std::max(mu * 0.3, 1e-12);
    } else {
      mu *= 10.0;
      if (mu > 1e6) break;
    }
  }
  return crystal_gradient(x, beta, n).lpNorm<Eigen::Infinity>() < 1e-9;
}

// Canonical labelling: centroid at the origin; ion 0 is the one nearest the
// centre; the rest follow counterclockwise by angle. For the 1+5 crystal the
// frame is also rotated so ring ion 1 sits on the +x axis, which makes the
// mode vectors reproducible run to run.
inline std::vector<Eigen::Vector2d> canonicalize(std::vector<Eigen::Vector2d> pos) {
  const int n = static_cast<int>(pos.size());
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pos) c += p;
  c /= n;
  for (auto& p : pos) p -= c;
  if (n == 1) return pos;

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return pos[a].squaredNorm() < pos[b].squaredNorm();
  });
  const int hub = idx[0];
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (i != hub) rest.push_back(i);

  const bool hub_centred = pos[hub].norm() < 1e-4 * pos[rest[0]].norm();
  if (hub_centred) {
    const double a0 = std::atan2(pos[rest[0]].y(), pos[rest[0]].x());
    const double cs = std::cos(-a0), sn = std::sin(-a0);
    for (auto& p : pos) p = Eigen::Vector2d(cs * p.x() - sn * p.y(), sn * p.x() + cs * p.y());
  }
  std::sort(rest.begin(), rest.end(), [&](int a, int b) {
    return std::atan2(pos[a].y(), pos[a].x()) - 1e-12 <
           std::atan2(pos[b].y(), pos[b].x());
  });
  std::vector<Eigen::Vector2d> out;
  out.push_back(pos[hub]);
  for (int r : rest) out.push_back(pos[r]);
  return out;
}

}  // namespace detail

inline Geometry equilibrium_positions(const CrystalConfig& config) {
  config.validate();
  const int n = config.n_ions;
  const double beta = config.planar_stiffness;

  Geometry geo;
  if (n == 1) {
    geo.positions = {Eigen::Vector2d::Zero()};
    geo.pair_distances = Eigen::MatrixXd::Zero(1, 1);
    return geo;
  }

  Rng rng(config.seed, 0xc7 /* equilibrium stream */);
  Eigen::VectorXd best;
  double best_e = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 32; ++attempt) {
    Eigen::VectorXd x;
    if (config.seed_layout && attempt == 0) {
      x.resize(2 * n);
      for (int i = 0; i < n; ++i) {
        x[2 * i] = (*config.seed_layout)[i].x();
        x[2 * i + 1] = (*config.seed_layout)[i].y();
      }
    } else {
      x = detail::hex_seed(n, beta, rng);
    }
    if (!detail::relax(x, beta, n)) continue;
    // a true minimum of the planar potential, not a saddle
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::crystal_hessian(x, beta, n));
    if (es.eigenvalues().minCoeff() < -1e-8) continue;
    const double e = detail::crystal_energy(x, beta, n);
    if (e < best_e - 1e-12) {
      best_e = e;
      best = x;
    }
  }
  if (best.size() == 0)
    throw OptimizationError("equilibrium search did not converge in 32 restarts");

  std::vector<Eigen::Vector2d> pos(n);
  for (int i = 0; i < n; ++i) pos[i] = Eigen::Vector2d(best[2 * i], best[2 * i + 1]);
  geo.positions = detail::canonicalize(std::move(pos));
  geo.pair_distances = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        geo.pair_distances(i, j) = (geo.positions[i] - geo.positions[j]).norm();
  return geo;
}

// Axial stiffness matrix K^zz: K_ij = 1/d_ij^3, K_ii = 1 - sum_j 1/d_ij^3.
// Every row sums to 1, which pins the centre-of-mass mode at omega = 1.
inline Eigen::MatrixXd stiffness_matrix(const Geometry& geometry) {
  const int n = geometry.n();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = geometry.pair_distances(i, j);
      if (d < 1e-9) throw GeometryError("coincident ions in geometry");
      k(i, j) = 1.0 / (d * d * d);
    }
  for (int i = 0; i < n; ++i) k(i, i) = 1.0 - k.row(i).sum();
  return k;
}

inline ModeBasis transverse_modes(const Eigen::MatrixXd& k) {
  const int n = static_cast<int>(k.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (k + k.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw UnstableCrystalError(
        "non-positive stiffness eigenvalue: planar crystal is transverse-unstable "
        "(reduce beta)");

  ModeBasis mb;
  mb.frequencies.resize(n);
  mb.eigenvectors.resize(n, n);
  for (int m = 0; m < n; ++m) {
    mb.frequencies[m] = std::sqrt(es.eigenvalues()[n - 1 - m]);
    mb.eigenvectors.row(m) = es.eigenvectors().col(n - 1 - m).transpose();
  }
  for (int m = 0; m < n; ++m) {
    if (m == 0 || mb.frequencies[m - 1] - mb.frequencies[m] > 1e-8)
      mb.degenerate_groups.push_back({m});
    else
      mb.degenerate_groups.back().push_back(m);
  }
  return mb;
}

}  // namespace ionqec
