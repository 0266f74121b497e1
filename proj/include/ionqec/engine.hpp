#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "ionqec/common.hpp"
#include "ionqec/coupling.hpp"
#include "ionqec/rng.hpp"

namespace ionqec {

using Complex = std::complex<double>;

// Single-qubit pure state alpha|down> + beta|up>.
struct PureTarget {
  Complex alpha{1.0, 0.0};
  Complex beta{0.0, 0.0};

  void validate() const {
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-12)
      throw ConfigError("pure target must be normalised");
  }
};

struct NoiseChannelSpec {
  enum class Kind { Dephasing, Depolarizing };
  Kind kind = Kind::Dephasing;
  double t = 0.0;   // in units of the single-qubit coherence time

  void validate() const {
    if (t < 0.0) throw ConfigError("channel time must be >= 0");
  }
};

// 64x64 density matrix of the 6-qubit register. Qubit 0 = hub, 1-5 = ring
// clockwise (common.hpp fixes the bit layout).
struct RegisterState {
  Eigen::Matrix<Complex, kDim, kDim> rho;

  static RegisterState zero() {
    RegisterState st;
    st.rho.setZero();
    return st;
  }
  double trace() const { return rho.trace().real(); }
};

inline RegisterState prepare_initial(const PureTarget& psi) {
  psi.validate();
  Eigen::Vector<Complex, kDim> v;
  const double w = 1.0 / std::sqrt(32.0);
  for (int s = 0; s < kDim; ++s)
    v[s] = (hub_bit(s) ? psi.beta : psi.alpha) * w;
  RegisterState st;
  st.rho.noalias() = v * v.adjoint();
  return st;
}

// rho -> D rho D^dagger with D = diag(exp(i phi_s)); diagonal untouched.
inline void apply_diagonal(RegisterState& state, const PhaseVector& phi) {
  std::array<Complex, kDim> d;
  for (int s = 0; s < kDim; ++s) d[s] = std::exp(Complex(0.0, phi[s]));
  for (int j = 0; j < kDim; ++j)
    for (int i = 0; i < kDim; ++i)
      state.rho(i, j) *= d[i] * std::conj(d[j]);
}

inline void apply_pauli(RegisterState& state, int qubit, Pauli p) {
  if (p == Pauli::I) return;
  const int m = qubit_mask(qubit);
  auto& rho = state.rho;
  if (p == Pauli::Z) {
    for (int j = 0; j < kDim; ++j)
      for (int i = 0; i < kDim; ++i)
        if (((i ^ j) & m) != 0) rho(i, j) = -rho(i, j);
    return;
  }
  // X and Y permute the qubit's bit; Y adds signs that cancel unless the
  // two sides flip differently, which a conjugation never does for Y*rho*Y
  // except through the relative factor below.
  Eigen::Matrix<Complex, kDim, kDim> out;
  for (int j = 0; j < kDim; ++j)
    for (int i = 0; i < kDim; ++i) {
      Complex v = rho(i, j);
      if (p == Pauli::Y) {
        // Y = [[0,-i],[i,0]]: element (a, a^1) carries i^(+-1) on each side
        const double si = qubit_bit(i, qubit) ? 1.0 : -1.0;   // row factor i*si
        const double sj = qubit_bit(j, qubit) ? 1.0 : -1.0;
        v *= si * sj;   // (i si)(i sj)^* = si sj
      }
      out(i ^ m, j ^ m) = v;
    }
  rho = out;
}

namespace detail {

inline void dephase(RegisterState& state, int qubit, double t) {
  const double w = std::exp(-t);
  const int m = qubit_mask(qubit);
  for (int j = 0; j < kDim; ++j)
    for (int i = 0; i < kDim; ++i)
      if (((i ^ j) & m) != 0) state.rho(i, j) *= w;
}

inline void depolarize(RegisterState& state, int qubit, double t) {
  const double w = std::exp(-t);
  const int m = qubit_mask(qubit);
  auto& rho = state.rho;
  for (int j = 0; j < kDim; ++j)
    for (int i = 0; i < kDim; ++i) {
      if (((i ^ j) & m) != 0) {
        rho(i, j) *= w;                      // coherence damps by e^-t
      } else if ((i & m) == 0) {             // handle each same-bit pair once
        const Complex a = rho(i, j);
        const Complex b = rho(i | m, j | m);
        rho(i, j) = 0.5 * ((1.0 + w) * a + (1.0 - w) * b);
        rho(i | m, j | m) = 0.5 * ((1.0 - w) * a + (1.0 + w) * b);
      }
    }
}

}  // namespace detail

// Closed-form Kraus application of the dephasing / depolarising map on one
// qubit. Composition satisfies gamma_t . gamma_s = gamma_{t+s}.
inline void apply_noise(RegisterState& state, int qubit, const NoiseChannelSpec& spec) {
  spec.validate();
  if (spec.t == 0.0) return;
  if (spec.kind == NoiseChannelSpec::Kind::Dephasing)
    detail::dephase(state, qubit, spec.t);
  else
    detail::depolarize(state, qubit, spec.t);
}

// Kraus operators of the single-qubit channels, for property checks.
inline std::vector<Eigen::Matrix2cd> kraus_operators(const NoiseChannelSpec& spec) {
  spec.validate();
  const double w = std::exp(-spec.t);
  std::vector<Eigen::Matrix2cd> ks;
  Eigen::Matrix2cd I2 = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd X{{0, 1}, {1, 0}};
  Eigen::Matrix2cd Y{{0, Complex(0, -1)}, {Complex(0, 1), 0}};
  Eigen::Matrix2cd Z{{1, 0}, {0, -1}};
  if (spec.kind == NoiseChannelSpec::Kind::Dephasing) {
    ks.push_back(std::sqrt((1.0 + w) / 2.0) * I2);
    ks.push_back(std::sqrt((1.0 - w) / 2.0) * Z);
  } else {
    ks.push_back(std::sqrt((1.0 + 3.0 * w) / 4.0) * I2);
    for (const auto& P : {X, Y, Z}) ks.push_back(std::sqrt((1.0 - w) / 4.0) * P);
  }
  return ks;
}

struct MeasureBranch {
  int outcome;          // +1 or -1
  double probability;
  RegisterState state;  // normalised post-measurement state
};

// Projective X-basis measurement of one qubit; zero-probability branches are
// dropped.
inline std::vector<MeasureBranch> measure_x(const RegisterState& state, int qubit) {
  const int m = qubit_mask(qubit);
  const auto& rho = state.rho;
  std::vector<MeasureBranch> out;
  for (int sign = +1; sign >= -1; sign -= 2) {
    RegisterState br = RegisterState::zero();
    for (int j = 0; j < kDim; ++j)
      for (int i = 0; i < kDim; ++i) {
        const Complex v = rho(i, j) + rho(i ^ m, j ^ m) +
                          static_cast<double>(sign) * (rho(i ^ m, j) + rho(i, j ^ m));
        br.rho(i, j) = 0.25 * v;
      }
    const double p = br.trace();
    if (p > 1e-14) {
      br.rho /= p;
      out.push_back({sign, p, std::move(br)});
    }
  }
  return out;
}

// Trace out a qubit and re-tensor it in the given pure state.
inline void reset_qubit(RegisterState& state, int qubit,
                        const Eigen::Vector2cd& pure) {
  const int m = qubit_mask(qubit);
  Eigen::Matrix<Complex, kDim, kDim> out;
  for (int j = 0; j < kDim; ++j) {
    const int j0 = j & ~m;
    for (int i = 0; i < kDim; ++i) {
      const int i0 = i & ~m;
      const Complex reduced = state.rho(i0, j0) + state.rho(i0 | m, j0 | m);
      out(i, j) = reduced * pure[qubit_bit(i, qubit)] * std::conj(pure[qubit_bit(j, qubit)]);
    }
  }
  state.rho = out;
}

inline Eigen::Matrix2cd reduce_to_hub(const RegisterState& state) {
  Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
  for (int r = 0; r < 32; ++r) {
    h(0, 0) += state.rho(r, r);
    h(0, 1) += state.rho(r, 32 + r);
    h(1, 0) += state.rho(32 + r, r);
    h(1, 1) += state.rho(32 + r, 32 + r);
  }
  return h;
}

inline double hub_fidelity(const Eigen::Matrix2cd& hub, const PureTarget& psi) {
  psi.validate();
  Eigen::Vector2cd v(psi.alpha, psi.beta);
  return std::abs((v.adjoint() * hub * v)(0, 0));
}

inline double hub_fidelity(const RegisterState& state, const PureTarget& psi) {
  return hub_fidelity(reduce_to_hub(state), psi);
}

// Haar-uniform single-qubit pure state.
inline PureTarget random_pure_target(Rng& rng) {
  const Complex a(rng.normal(), rng.normal());
  const Complex b(rng.normal(), rng.normal());
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  return {a / n, b / n};
}

}  // namespace ionqec
