#include "omav/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>

#include "omav/dynamics_detail.hpp"
#include "omav/linalg.hpp"

namespace omav {

PoseRef circle_reference(double radius, double cx, double cy, double rate,
                         double t) {
  PoseRef r;
  const double c = std::cos(rate * t), s = std::sin(rate * t);
  const double w = rate, w2 = w * w, w3 = w2 * w, w4 = w3 * w;
  r.x = {cx + radius * c, -radius * w * s, -radius * w2 * c, radius * w3 * s,
         radius * w4 * c};
  r.y = {cy + radius * s, radius * w * c, -radius * w2 * s, -radius * w3 * c,
         radius * w4 * s};
  return r;
}

std::array<double, 5> sinusoidal_orientation_reference(double amp, double rate,
                                                       double t) {
  const double c = std::cos(rate * t), s = std::sin(rate * t);
  const double w = rate, w2 = w * w, w3 = w2 * w, w4 = w3 * w;
  return {amp * s, amp * w * c, -amp * w2 * s, -amp * w3 * c, amp * w4 * s};
}

PoseRef eval_reference(const ReferenceSpec& ref, double t) {
  return std::visit(
      [t](const auto& r) -> PoseRef {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, RegulatePose>) {
          PoseRef out;
          out.x[0] = r.x;
          out.y[0] = r.y;
          out.phi[0] = r.phi;
          return out;
        } else {
          PoseRef out = circle_reference(r.radius, r.cx, r.cy, r.rate, t);
          if (r.with_phi)
            out.phi =
                sinusoidal_orientation_reference(r.phi_amp, r.phi_rate, t);
          return out;
        }
      },
      ref);
}

EquilibriumPose reference_pose(const ReferenceSpec& ref, double t) {
  const PoseRef r = eval_reference(ref, t);
  return {r.x[0], r.y[0], r.phi[0]};
}

ChannelGains design_gains(const std::array<double, 4>& poles) {
  for (double pole : poles)
    if (!(pole < 0.0))
      throw std::invalid_argument("closed-loop poles must be negative");
  // Expand prod_i (s - p_i); coeffs[k] multiplies s^k.
  std::array<double, 5> coeffs{1.0, 0.0, 0.0, 0.0, 0.0};
  int deg = 0;
  for (double pole : poles) {
    ++deg;
    for (int k = deg; k >= 1; --k)
      coeffs[k] = coeffs[k - 1] - pole * coeffs[k];
    coeffs[0] *= -pole;
  }
  return {coeffs[0], coeffs[1], coeffs[2], coeffs[3]};
}

GainSet gain_set_from_poles(const std::array<double, 4>& poles) {
  const ChannelGains k = design_gains(poles);
  return {k, k, k};
}

double singularity_margin(const VehicleParams& p, const ExtendedState& s) {
  detail::require_extended(p);
  const double hover_share = p.gravity * p.m_tot() / p.n_links;
  const double thrust_margin = std::abs(s.comp.thrust[1]) / hover_share;
  // Distance of phi from the nearest odd multiple of pi/2, as a fraction of
  // the half-gap pi/2.
  const double half_pi = std::numbers::pi / 2.0;
  const double r = std::remainder(s.plant.q[2], std::numbers::pi);
  const double tilt_margin = (half_pi - std::abs(r)) / half_pi;
  return std::min(thrust_margin, tilt_margin);
}

OutputDerivatives output_derivatives(const VehicleParams& p,
                                     const ExtendedState& s) {
  detail::require_extended(p);
  s.plant.check(p);
  double x[kExtendedDim];
  pack_extended(s, x);
  double acc[3], jerk[3];
  detail::pose_accel(p, x, acc);
  detail::third_pose_derivative(p, x, jerk);
  OutputDerivatives od;
  for (int c = 0; c < 3; ++c)
    od.y[c] = {s.plant.q[c], s.plant.qd[c], acc[c], jerk[c]};
  return od;
}

FblCommand fbl_control(const VehicleParams& p, const GainSet& gains,
                       const ExtendedState& s, const PoseRef& ref,
                       double min_margin) {
  detail::require_extended(p);
  FblCommand cmd;
  cmd.margin = singularity_margin(p, s);
  if (cmd.margin < min_margin)
    throw SingularityError("state too close to the linearizability boundary");

  const OutputDerivatives od = output_derivatives(p, s);
  const std::array<const std::array<double, 5>*, 3> refs = {&ref.x, &ref.y,
                                                            &ref.phi};
  const std::array<const ChannelGains*, 3> ks = {&gains.x, &gains.y,
                                                 &gains.phi};
  for (int c = 0; c < 3; ++c) {
    double v = (*refs[c])[4];
    for (int i = 0; i < 4; ++i)
      v += (*ks[c])[i] * ((*refs[c])[i] - od.y[c][i]);
    cmd.y4_cmd[c] = v;
  }

  const ExtendedDecoupling ext = extended_decoupling(p, s);
  SMat<double> A(3, 3);
  SVec<double> rhs(3);
  for (int i = 0; i < 3; ++i) {
    rhs[i] = cmd.y4_cmd[i] - ext.b[i];
    for (int j = 0; j < 3; ++j) A(i, j) = ext.A[i][j];
  }
  SVec<double> sol;
  try {
    sol = lu_solve(A, rhs);
  } catch (const std::runtime_error&) {
    throw SingularityError("decoupling matrix is singular");
  }
  cmd.v1 = sol[0];
  cmd.v2 = sol[1];
  cmd.moment = sol[2];

  cmd.u = InputVector(p);
  cmd.u.values[0] = s.comp.thrust[0];
  cmd.u.values[1] = s.comp.thrust[1];
  cmd.u.values[2] = cmd.moment;
  return cmd;
}

}  // namespace omav
