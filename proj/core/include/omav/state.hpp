#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "omav/params.hpp"

namespace omav {

// Generalized coordinates: q = (x, y, phi, theta_1..theta_N) and rates.
struct GenState {
  std::vector<double> q;
  std::vector<double> qd;

  GenState() = default;
  explicit GenState(int coords) : q(coords, 0.0), qd(coords, 0.0) {}

  void check(const VehicleParams& p) const {
    if (static_cast<int>(q.size()) != p.coords() ||
        static_cast<int>(qd.size()) != p.coords())
      throw std::invalid_argument("GenState dimension mismatch");
  }
};

struct EquilibriumPose {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
};

// Thrust compensator carried by the dynamic-extension controller: the two
// extended lift channels (first thrust and steerable-module thrust sum)
// are integrated twice.
struct Compensator {
  std::array<double, 2> thrust{};  // channel values (N)
  std::array<double, 2> rate{};    // channel rates (N/s)
};

// Plant state plus compensator; the closed-loop integration state.
struct ExtendedState {
  GenState plant;
  Compensator comp;

  ExtendedState() = default;
  explicit ExtendedState(int coords) : plant(coords) {}
};

// Flat layout of the Type2/N=2 extended state used by the controller and
// analysis paths: (q[5], qd[5], thrust[2], rate[2]).
inline constexpr int kExtendedDim = 14;

inline void pack_extended(const ExtendedState& s, double* x) {
  for (int i = 0; i < 5; ++i) x[i] = s.plant.q[i];
  for (int i = 0; i < 5; ++i) x[5 + i] = s.plant.qd[i];
  x[10] = s.comp.thrust[0];
  x[11] = s.comp.thrust[1];
  x[12] = s.comp.rate[0];
  x[13] = s.comp.rate[1];
}

inline ExtendedState unpack_extended(const double* x) {
  ExtendedState s(5);
  for (int i = 0; i < 5; ++i) s.plant.q[i] = x[i];
  for (int i = 0; i < 5; ++i) s.plant.qd[i] = x[5 + i];
  s.comp.thrust = {x[10], x[11]};
  s.comp.rate = {x[12], x[13]};
  return s;
}

// Physical input channels.
// Type1: values = (f_1..f_N).
// Type2: values = (f_1..f_{N-1}, lift, moment) where lift is the last-link
// thrust (servo: its propeller thrust; coupled rotor: rotor-pair sum) and
// moment is the last-joint drive (servo: commanded angular acceleration;
// coupled rotor: rotor-pair difference).
struct InputVector {
  std::vector<double> values;

  InputVector() = default;
  explicit InputVector(const VehicleParams& p)
      : values(p.input_count(), 0.0) {}

  void check(const VehicleParams& p) const {
    if (static_cast<int>(values.size()) != p.input_count())
      throw std::invalid_argument("InputVector dimension mismatch");
  }

  double thrust(int i) const { return values[i]; }
  double lift_channel() const { return values[values.size() - 2]; }
  double moment_channel() const { return values.back(); }

  // Unidirectional-rotor feasibility; not enforced on evaluation paths so
  // infeasible commands can still be simulated and flagged.
  bool satisfies_bounds(const VehicleParams& p) const {
    const int n_thrust =
        p.type == VehicleType::Type2 ? p.n_links - 1 : p.n_links;
    for (int i = 0; i < n_thrust; ++i)
      if (values[i] < 0.0) return false;
    if (p.type == VehicleType::Type2) {
      if (lift_channel() < 0.0) return false;
      if (p.option == ActuationOption::CoupledRotor &&
          std::abs(moment_channel()) > lift_channel())
        return false;
    }
    return true;
  }
};

}  // namespace omav
