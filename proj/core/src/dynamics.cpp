#include "omav/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "omav/dynamics_detail.hpp"

namespace omav {

MatrixD mass_matrix(const VehicleParams& p, const std::vector<double>& q) {
  if (static_cast<int>(q.size()) != p.coords())
    throw std::invalid_argument("mass_matrix: dimension mismatch");
  MatrixD M;
  detail::mass_matrix_t(p, q.data(), M);
  return M;
}

VectorD bias_forces(const VehicleParams& p, const std::vector<double>& q,
                    const std::vector<double>& qd) {
  if (static_cast<int>(q.size()) != p.coords() || qd.size() != q.size())
    throw std::invalid_argument("bias_forces: dimension mismatch");
  VectorD h;
  detail::bias_forces_t(p, q.data(), qd.data(), h);
  return h;
}

VectorD gravity_forces(const VehicleParams& p, const std::vector<double>& q) {
  if (static_cast<int>(q.size()) != p.coords())
    throw std::invalid_argument("gravity_forces: dimension mismatch");
  VectorD g;
  detail::gravity_forces_t(p, q.data(), g);
  return g;
}

VectorD generalized_forces(const VehicleParams& p, const GenState& s,
                           const InputVector& u) {
  s.check(p);
  u.check(p);
  VectorD Q;
  detail::generalized_forces_t(p, s.q.data(), s.qd.data(), u.values.data(), Q);
  return Q;
}

VectorD forward_dynamics(const VehicleParams& p, const GenState& s,
                         const InputVector& u,
                         const std::array<double, 3>& d_ext) {
  s.check(p);
  u.check(p);
  VectorD qdd;
  detail::forward_dynamics_t(p, s.q.data(), s.qd.data(), u.values.data(),
                             d_ext.data(), qdd);
  return qdd;
}

InputVector equilibrium_input(const VehicleParams& p) {
  InputVector u(p);
  // Each link lifts its own mass plus an equal share of the platform; this
  // also balances the platform moment when the link masses differ.
  for (int i = 0; i < p.n_links; ++i)
    u.values[i] =
        p.gravity * (p.m_b / p.n_links + p.link_mass(i));
  if (p.type == VehicleType::Type2) u.values.back() = 0.0;
  return u;
}

GenState equilibrium_state(const VehicleParams& p,
                           const EquilibriumPose& pose) {
  GenState s(p.coords());
  s.q[0] = pose.x;
  s.q[1] = pose.y;
  s.q[2] = pose.phi;
  for (int i = 0; i < p.n_links; ++i) s.q[3 + i] = -pose.phi - p.theta_l[i];
  return s;
}

bool is_equilibrium_state(const VehicleParams& p, const GenState& s,
                          double tol) {
  s.check(p);
  for (double v : s.qd)
    if (std::fabs(v) > tol) return false;
  for (int i = 0; i < p.n_links; ++i) {
    const double tilt = s.q[2] + s.q[3 + i] + p.theta_l[i];
    if (std::fabs(std::remainder(tilt, 2.0 * std::numbers::pi)) > tol)
      return false;
  }
  return true;
}

VectorD static_balance_residual(const VehicleParams& p,
                                const EquilibriumPose& pose) {
  const GenState s = equilibrium_state(p, pose);
  const InputVector u = equilibrium_input(p);
  const VectorD g = gravity_forces(p, s.q);
  const VectorD Q = generalized_forces(p, s, u);
  VectorD r(p.coords());
  for (int i = 0; i < r.n; ++i) r[i] = g[i] - Q[i];
  return r;
}

Energy total_energy(const VehicleParams& p, const GenState& s) {
  s.check(p);
  Energy e;
  const MatrixD M = mass_matrix(p, s.q);
  for (int i = 0; i < M.rows; ++i)
    for (int j = 0; j < M.cols; ++j)
      e.kinetic += 0.5 * s.qd[i] * M(i, j) * s.qd[j];
  // Servo option: the unit placeholder row is not physical inertia.
  if (p.servo_last_link())
    e.kinetic -= 0.5 * s.qd.back() * s.qd.back();
  double u = p.m_b * s.q[1];
  for (int i = 0; i < p.n_links; ++i) {
    const double alpha = s.q[2] + s.q[3 + i] + p.theta_l[i];
    const double joint_y =
        s.q[1] + p.a * std::sin(s.q[2] + p.joint_angle(i));
    u += p.link_mass(i) *
         (joint_y - p.link_com_offset(i) * std::cos(alpha));
  }
  e.potential = p.gravity * u;
  return e;
}

}  // namespace omav
