#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace omav {

// Type1: every link carries one fixed propeller (thrust along the link axis).
// Type2: links 1..N-1 as in Type1; link N is the steerable module.
enum class VehicleType { Type1, Type2 };

// How the Type2 steerable link is driven. Servo: the last joint tracks a
// commanded angular acceleration and its link is treated as massless.
// CoupledRotor: a rotor pair at +/-a11 from the joint provides the link
// thrust (sum channel) and the joint moment (difference channel).
enum class ActuationOption { Servo, CoupledRotor };

struct VehicleParams {
  VehicleType type = VehicleType::Type2;
  ActuationOption option = ActuationOption::CoupledRotor;
  int n_links = 2;

  double m_b = 5.0;     // platform mass (kg)
  double m_p = 2.0;     // link mass (kg)
  double I_b = 9.5e-3;  // platform inertia (kg m^2)
  double I_p = 1.86e-3; // link inertia (kg m^2)
  double a = 0.5;       // joint distance from platform CoM (m)
  double a11 = 0.1;     // rotor-pair arm on the steerable link (m)
  double gravity = 9.81;

  std::vector<double> d;        // per-link CoM offset below the joint (m)
  std::vector<double> b_f;      // per-passive-joint viscous friction
  std::vector<double> theta_l;  // per-link frame offset (rad), default 0

  std::string preset_name;  // set when constructed from a preset

  // Shipped presets: "main-paper" (10 kg total variant) and
  // "report-nominal" (component-mass variant). Both are Type2, N=2,
  // coupled-rotor actuation.
  static VehicleParams preset(const std::string& name);

  // Fills d/b_f/theta_l with defaults where empty and checks invariants;
  // throws std::invalid_argument on violation.
  void finalize();

  int coords() const { return n_links + 3; }
  int input_count() const {
    return type == VehicleType::Type2 ? n_links + 1 : n_links;
  }
  int passive_joints() const {
    return type == VehicleType::Type2 ? n_links - 1 : n_links;
  }

  // Total vehicle mass including link masses (servo option: link N massless).
  double m_tot() const;

  // Per-link effective mass/inertia. The servo option zeroes link N.
  double link_mass(int i) const;
  double link_inertia(int i) const;
  double link_com_offset(int i) const;

  // Derived coupling constants.
  double k1(int i) const { return link_com_offset(i) * link_mass(i); }
  double k2(int i) const {
    return link_inertia(i) +
           link_com_offset(i) * link_com_offset(i) * link_mass(i);
  }
  double k3() const;
  double k4(int i) const { return a * link_com_offset(i) * link_mass(i); }

  // Joint placement angle on the platform (body frame). Joints sit at
  // distance a, evenly spread so their body-frame positions sum to zero.
  double joint_angle(int i) const;

  bool servo_last_link() const {
    return type == VehicleType::Type2 && option == ActuationOption::Servo;
  }

  // Stable 64-bit digest of all physical fields.
  std::uint64_t hash() const;
};

}  // namespace omav
