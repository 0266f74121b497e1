#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ionqec/common.hpp"
#include "ionqec/crystal.hpp"

namespace ionqec {

// Spin-dependent optical dipole force: F_down is normalised to 1, the
// up/down force ratio R is the search parameter. R in [-2, -0.5] is the
// physically proposed window; anything else computes but is flagged.
struct ForceModel {
  double ratio = -1.4;
  static constexpr double f_down = 1.0;

  bool in_physical_range() const { return ratio >= -2.0 && ratio <= -0.5; }
};

// Pulse areas on the four distinct mode frequencies plus the force ratio.
struct PulseSolution {
  std::array<double, 4> areas{};
  double ratio = -1.4;
  std::string label;

  void validate() const {
    for (double p : areas)
      if (!(p >= 0.0) || !std::isfinite(p))
        throw ConfigError("pulse areas must be finite and >= 0");
    if (!std::isfinite(ratio)) throw ConfigError("force ratio must be finite");
  }
};

struct PhaseVector {
  std::array<double, kDim> phases{};

  double& operator[](int s) { return phases[s]; }
  double operator[](int s) const { return phases[s]; }
};

// Forces on the six ions for one basis state: R where the ion is spin-up,
// 1 where it is spin-down (Table II's 0/1 = down/up convention).
inline std::array<double, kNumQubits> force_matrix(int state, const ForceModel& model) {
  std::array<double, kNumQubits> f{};
  for (int q = 0; q < kNumQubits; ++q)
    f[q] = qubit_bit(state, q) ? model.ratio : ForceModel::f_down;
  return f;
}

// Spin-mode coupling combined in quadrature over each degenerate group.
// m(g, s) is the generalised force magnitude; phase per pulse area is
// c * m^2 with c fixed so a P1 = 1 centre-of-mass pulse gives pi on the
// all-down state.
struct CouplingMatrix {
  Eigen::Matrix<double, 4, kDim> m;
  double norm_c = 0.0;
  double ratio = 0.0;
};

// Precomputed mode sums that make phases linear-in-P and quadratic-in-R:
// M_ms = down_sum(m, s) + R * up_sum(m, s). This is what the pulse search
// evaluates millions of times.
class PhaseModel {
 public:
  explicit PhaseModel(const ModeBasis& modes) {
    if (modes.eigenvectors.rows() != kNumQubits)
      throw StructuralError("PhaseModel requires the 6-ion mode basis");
    if (modes.degenerate_groups.size() != 4)
      throw StructuralError("expected 4 degenerate frequency groups (1,2,2,1)");
    groups_ = modes.degenerate_groups;
    for (int m = 0; m < kNumQubits; ++m) {
      for (int s = 0; s < kDim; ++s) {
        double down = 0.0, up = 0.0;
        for (int q = 0; q < kNumQubits; ++q) {
          const double a = modes.eigenvectors(m, q);
          (qubit_bit(s, q) ? up : down) += a;
        }
        down_(m, s) = down;
        up_(m, s) = up;
      }
    }
    group_of_mode_.fill(0);
    for (int g = 0; g < 4; ++g)
      for (int m : groups_[g]) group_of_mode_[m] = g;
    // normalisation from the all-down COM coupling (state 0, group 0)
    double m2 = 0.0;
    for (int m : groups_[0]) m2 += down_(m, 0) * down_(m, 0);
    norm_c_ = kPi / m2;
  }

  // squared group couplings (M_gs)^2 for one state
  std::array<double, 4> group_coupling_sq(int s, double ratio) const {
    std::array<double, 4> m2{};
    for (int m = 0; m < kNumQubits; ++m) {
      const double v = down_(m, s) + ratio * up_(m, s);
      m2[group_of_mode_[m]] += v * v;
    }
    return m2;
  }

  double phase(int s, const std::array<double, 4>& areas, double ratio) const {
    const auto m2 = group_coupling_sq(s, ratio);
    double acc = 0.0;
    for (int g = 0; g < 4; ++g) acc += m2[g] * areas[g];
    return norm_c_ * acc;
  }

  PhaseVector phases(const std::array<double, 4>& areas, double ratio) const {
    PhaseVector out;
    for (int s = 0; s < kDim; ++s) out[s] = phase(s, areas, ratio);
    return out;
  }

  CouplingMatrix coupling(double ratio) const {
    CouplingMatrix cm;
    cm.ratio = ratio;
    cm.norm_c = norm_c_;
    for (int s = 0; s < kDim; ++s) {
      const auto m2 = group_coupling_sq(s, ratio);
      for (int g = 0; g < 4; ++g) cm.m(g, s) = std::sqrt(m2[g]);
    }
    return cm;
  }

  double normalization() const { return norm_c_; }

 private:
  Eigen::Matrix<double, kNumQubits, kDim> down_, up_;
  std::array<int, kNumQubits> group_of_mode_{};
  std::vector<std::vector<int>> groups_;
  double norm_c_ = 0.0;
};

inline CouplingMatrix coupling_matrix(const ModeBasis& modes, const ForceModel& model) {
  return PhaseModel(modes).coupling(model.ratio);
}

// Geometric phases accumulated by a pulse sequence; no mod-2pi reduction
// here, callers reduce when comparing.
inline PhaseVector phases(const CouplingMatrix& coupling, const PulseSolution& solution) {
  solution.validate();
  if (std::abs(coupling.ratio - solution.ratio) > 1e-12)
    throw ConsistencyError("coupling matrix was built with a different force ratio");
  PhaseVector out;
  for (int s = 0; s < kDim; ++s) {
    double acc = 0.0;
    for (int g = 0; g < 4; ++g)
      acc += coupling.m(g, s) * coupling.m(g, s) * solution.areas[g];
    out[s] = coupling.norm_c * acc;
  }
  return out;
}

// Orbits of the 64 basis states under cyclic rotation of the ring labels,
// in Table II row order (hub bit, then ring patterns 00000, 00001, 00011,
// 00101, 00111, 01011, 01111, 11111).
struct CyclicClass {
  int representative;
  int multiplicity;
  std::vector<int> members;
};

inline const std::vector<CyclicClass>& cyclic_classes() {
  static const std::vector<CyclicClass> table = [] {
    constexpr std::array<int, 8> ring_reps = {0, 1, 3, 5, 7, 11, 15, 31};
    std::vector<CyclicClass> out;
    for (int hub = 0; hub <= 1; ++hub) {
      for (int rep : ring_reps) {
        CyclicClass c;
        c.representative = (hub << 5) | rep;
        int r = rep;
        std::vector<int> orbit;
        do {
          orbit.push_back((hub << 5) | r);
          r = rotate_ring(r);
        } while (r != rep);
        std::sort(orbit.begin(), orbit.end());
        c.members = orbit;
        c.multiplicity = static_cast<int>(orbit.size());
        out.push_back(std::move(c));
      }
    }
    return out;
  }();
  return table;
}

// class index for every basis state
inline const std::array<int, kDim>& class_of_state() {
  static const std::array<int, kDim> map = [] {
    std::array<int, kDim> m{};
    const auto& classes = cyclic_classes();
    for (int k = 0; k < static_cast<int>(classes.size()); ++k)
      for (int s : classes[k].members) m[s] = k;
    return m;
  }();
  return map;
}

// Overlap magnitude of the evolving all-|+> register with the target state:
// |(1/64) sum_s exp(i(phi_s - phi'_s))|.
inline double intermediate_fidelity(const PhaseVector& now, const PhaseVector& target) {
  std::complex<double> acc = 0.0;
  for (int s = 0; s < kDim; ++s)
    acc += std::exp(std::complex<double>(0.0, now[s] - target[s]));
  return std::abs(acc) / kDim;
}

}  // namespace ionqec
