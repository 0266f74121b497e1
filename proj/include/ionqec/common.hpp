#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ionqec {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Register layout: 6 qubits, 64 basis states. Qubit 0 is the hub, qubits 1-5
// are the ring ions clockwise. Basis index s = hub<<5 | b1b2b3b4b5, so the
// hub occupies the most significant bit and ring qubit 5 the least.
inline constexpr int kNumQubits = 6;
inline constexpr int kDim = 64;
inline constexpr int kRingSize = 5;

inline constexpr int qubit_bit(int state, int qubit) {
  return (state >> (kNumQubits - 1 - qubit)) & 1;
}
inline constexpr int qubit_mask(int qubit) {
  return 1 << (kNumQubits - 1 - qubit);
}
inline constexpr int ring_bits(int state) { return state & 31; }
inline constexpr int hub_bit(int state) { return (state >> 5) & 1; }

// Rotate the five ring labels by one step (b1..b5 -> b2..b5 b1).
inline constexpr int rotate_ring(int ring) {
  return ((ring << 1) | (ring >> 4)) & 31;
}

inline int popcount5(int ring) { return __builtin_popcount(ring & 31); }

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

enum class Pauli : int { I = 0, X = 1, Y = 2, Z = 3 };

inline const char* pauli_name(Pauli p) {
  switch (p) {
    case Pauli::I: return "I";
    case Pauli::X: return "X";
    case Pauli::Y: return "Y";
    case Pauli::Z: return "Z";
  }
  return "?";
}

// Product of two Paulis with the phase discarded.
inline Pauli pauli_mul(Pauli a, Pauli b) {
  if (a == Pauli::I) return b;
  if (b == Pauli::I) return a;
  if (a == b) return Pauli::I;
  return static_cast<Pauli>(6 - static_cast<int>(a) - static_cast<int>(b));
}

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OptimizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnstableCrystalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ionqec
