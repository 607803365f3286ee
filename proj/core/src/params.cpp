#include "omav/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omav {

VehicleParams VehicleParams::preset(const std::string& name) {
  VehicleParams p;
  p.type = VehicleType::Type2;
  p.option = ActuationOption::CoupledRotor;
  p.n_links = 2;
  p.a = 0.5;
  p.a11 = 0.1;
  p.gravity = 9.81;
  if (name == "main-paper") {
    // Total mass 10 kg; the platform/link split is not part of the preset
    // source, so a report-like link mass of 2 kg is used.
    p.m_b = 6.0;
    p.m_p = 2.0;
    p.I_b = 9.5e-3;
    p.I_p = 2.0e-3;
    p.b_f = {0.9};
  } else if (name == "report-nominal") {
    p.m_b = 5.0;
    p.m_p = 2.0;
    p.I_b = 9.5e-3;
    p.I_p = 1.86e-3;
    p.b_f = {0.9};
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  p.d = {0.5, 0.0};  // steerable link keeps its CoM on the joint
  p.preset_name = name;
  p.finalize();
  return p;
}

void VehicleParams::finalize() {
  if (n_links < 2 || n_links > 8)
    throw std::invalid_argument("n_links must be in [2, 8]");
  if (m_b <= 0.0 || m_p <= 0.0)
    throw std::invalid_argument("masses must be positive");
  if (I_b <= 0.0 || I_p <= 0.0)
    throw std::invalid_argument("inertias must be positive");
  if (a < 0.0 || a11 < 0.0)
    throw std::invalid_argument("arms a, a11 must be nonnegative");
  if (gravity <= 0.0) throw std::invalid_argument("gravity must be positive");

  if (d.empty()) {
    d.assign(n_links, 0.5);
    if (type == VehicleType::Type2) d.back() = 0.0;
  }
  if (b_f.empty()) b_f.assign(passive_joints(), 0.0);
  if (b_f.size() == 1 && passive_joints() > 1)
    b_f.assign(passive_joints(), b_f.front());
  if (theta_l.empty()) theta_l.assign(n_links, 0.0);

  if (static_cast<int>(d.size()) != n_links)
    throw std::invalid_argument("d must have one entry per link");
  if (static_cast<int>(b_f.size()) != passive_joints())
    throw std::invalid_argument("b_f must have one entry per passive joint");
  if (static_cast<int>(theta_l.size()) != n_links)
    throw std::invalid_argument("theta_l must have one entry per link");
  for (double b : b_f)
    if (b < 0.0) throw std::invalid_argument("friction must be nonnegative");
  if (type == VehicleType::Type2 && d.back() != 0.0)
    throw std::invalid_argument("Type2 requires the last link CoM on its joint");
}

double VehicleParams::m_tot() const {
  double m = m_b;
  for (int i = 0; i < n_links; ++i) m += link_mass(i);
  return m;
}

double VehicleParams::link_mass(int i) const {
  if (servo_last_link() && i == n_links - 1) return 0.0;
  return m_p;
}

double VehicleParams::link_inertia(int i) const {
  if (servo_last_link() && i == n_links - 1) return 0.0;
  return I_p;
}

double VehicleParams::link_com_offset(int i) const {
  if (servo_last_link() && i == n_links - 1) return 0.0;
  return d[i];
}

double VehicleParams::k3() const {
  double s = I_b;
  for (int i = 0; i < n_links; ++i) s += link_mass(i) * a * a;
  return s;
}

double VehicleParams::joint_angle(int i) const {
  return 2.0 * std::numbers::pi * static_cast<double>(i) /
         static_cast<double>(n_links);
}

namespace {
void fnv_mix(std::uint64_t& h, double x) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(x));
  __builtin_memcpy(&bits, &x, sizeof(bits));
  for (int k = 0; k < 8; ++k) {
    h ^= (bits >> (8 * k)) & 0xffu;
    h *= 0x100000001b3ull;
  }
}
}  // namespace

std::uint64_t VehicleParams::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  fnv_mix(h, static_cast<double>(type == VehicleType::Type2));
  fnv_mix(h, static_cast<double>(option == ActuationOption::CoupledRotor));
  fnv_mix(h, n_links);
  fnv_mix(h, m_b);
  fnv_mix(h, m_p);
  fnv_mix(h, I_b);
  fnv_mix(h, I_p);
  fnv_mix(h, a);
  fnv_mix(h, a11);
  fnv_mix(h, gravity);
  for (double x : d) fnv_mix(h, x);
  for (double x : b_f) fnv_mix(h, x);
  for (double x : theta_l) fnv_mix(h, x);
  return h;
}

}  // namespace omav
