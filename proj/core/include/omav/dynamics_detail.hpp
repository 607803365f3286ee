#pragma once

#include "omav/linalg.hpp"
#include "omav/params.hpp"

// Closed-form planar multibody terms, templated on the scalar type.
//
// Conventions fixed here and mirrored by the differentiation oracle:
//  - joint i sits at body position a*(cos beta_i, sin beta_i) with
//    beta_i = 2*pi*i/N, so the joint positions sum to zero;
//  - link i tilt alpha_i = phi + theta_i + theta_l_i, thrust along the link
//    y-axis (-sin alpha, cos alpha), CoM a distance d_i below the joint;
//  - psi_i = theta_i + theta_l_i - beta_i drives the a*d_i couplings.
//
// Servo option: the last link is massless and its joint row is replaced by a
// unit-inertia row so the moment channel commands the joint acceleration.

namespace omav::detail {

template <class T>
struct LinkAngles {
  T s_al, c_al;  // sin/cos of the link tilt
  T s_ps, c_ps;  // sin/cos of the joint coupling angle
};

template <class T>
LinkAngles<T> link_angles(const VehicleParams& p, const T* q, int i) {
  using std::cos;
  using std::sin;
  const T alpha = q[2] + q[3 + i] + p.theta_l[i];
  const T psi = q[3 + i] + p.theta_l[i] - p.joint_angle(i);
  return {sin(alpha), cos(alpha), sin(psi), cos(psi)};
}

// Net first mass moment of the links about the platform center, world
// frame. Zero for equal link masses (the joints sum to zero); the servo
// option's massless link leaves a residual that couples x/y to phi.
template <class T>
void link_first_moment(const VehicleParams& p, const T& phi, T& mc, T& ms) {
  mc = T(0.0);
  ms = T(0.0);
  if (!p.servo_last_link()) return;
  using std::cos;
  using std::sin;
  for (int i = 0; i < p.n_links; ++i) {
    const double m = p.link_mass(i);
    if (m == 0.0) continue;
    const T gamma = phi + p.joint_angle(i);
    mc += m * cos(gamma);
    ms += m * sin(gamma);
  }
}

template <class T>
void mass_matrix_t(const VehicleParams& p, const T* q, SMat<T>& M) {
  const int n = p.coords();
  M = SMat<T>(n, n);
  const double mt = p.m_tot();
  M(0, 0) = T(mt);
  M(1, 1) = T(mt);
  T m22 = T(p.k3());
  for (int i = 0; i < p.n_links; ++i) {
    const auto t = link_angles(p, q, i);
    const double k1 = p.k1(i), k2 = p.k2(i), k4 = p.k4(i);
    m22 += k2 + 2.0 * k4 * t.s_ps;
    M(0, 2) += k1 * t.c_al;
    M(1, 2) += k1 * t.s_al;
    M(0, 3 + i) = k1 * t.c_al;
    M(1, 3 + i) = k1 * t.s_al;
    M(2, 3 + i) = k2 + k4 * t.s_ps;
    M(3 + i, 3 + i) = T(k2);
  }
  M(2, 2) = m22;
  T mc, ms;
  link_first_moment(p, q[2], mc, ms);
  M(0, 2) -= p.a * ms;
  M(1, 2) += p.a * mc;
  if (p.servo_last_link()) M(n - 1, n - 1) = T(1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) M(j, i) = M(i, j);
}

template <class T>
void bias_forces_t(const VehicleParams& p, const T* q, const T* qd,
                   SVec<T>& h) {
  const int n = p.coords();
  h = SVec<T>(n);
  const T phid = qd[2];
  for (int i = 0; i < p.n_links; ++i) {
    const auto t = link_angles(p, q, i);
    const double k1 = p.k1(i), k4 = p.k4(i);
    const T thd = qd[3 + i];
    const T w = phid + thd;
    h[0] -= k1 * t.s_al * w * w;
    h[1] += k1 * t.c_al * w * w;
    h[2] += k4 * t.c_ps * thd * (2.0 * phid + thd);
    h[3 + i] = -k4 * t.c_ps * phid * phid;
  }
  T mc, ms;
  link_first_moment(p, q[2], mc, ms);
  h[0] -= p.a * phid * phid * mc;
  h[1] -= p.a * phid * phid * ms;
}

template <class T>
void gravity_forces_t(const VehicleParams& p, const T* q, SVec<T>& g) {
  const int n = p.coords();
  g = SVec<T>(n);
  g[1] = T(p.gravity * p.m_tot());
  for (int i = 0; i < p.n_links; ++i) {
    const auto t = link_angles(p, q, i);
    const T gk = p.gravity * p.k1(i) * t.s_al;
    g[2] += gk;
    g[3 + i] = gk;
  }
  T mc, ms;
  link_first_moment(p, q[2], mc, ms);
  g[2] += p.gravity * p.a * mc;
}

// u layout -- Type1: (f_1..f_N); Type2: (f_1..f_{N-1}, lift, moment).
template <class T>
void generalized_forces_t(const VehicleParams& p, const T* q, const T* qd,
                          const T* u, SVec<T>& Q) {
  const int n = p.coords();
  const int N = p.n_links;
  Q = SVec<T>(n);
  const int n_thrust = (p.type == VehicleType::Type2) ? N - 1 : N;
  for (int i = 0; i < N; ++i) {
    const T f = (i < n_thrust) ? u[i]
                               : u[n_thrust];  // Type2 last link: lift channel
    const auto t = link_angles(p, q, i);
    Q[0] -= f * t.s_al;
    Q[1] += f * t.c_al;
    Q[2] += p.a * f * t.c_ps;
  }
  for (int i = 0; i < p.passive_joints(); ++i) Q[3 + i] -= p.b_f[i] * qd[3 + i];
  if (p.type == VehicleType::Type2) {
    const T w = u[N];
    if (p.option == ActuationOption::CoupledRotor) {
      Q[2] += p.a11 * w;
      Q[n - 1] += p.a11 * w;
    } else {
      Q[n - 1] += w;  // joint acceleration command (unit-inertia row)
    }
  }
}

template <class T>
void forward_dynamics_t(const VehicleParams& p, const T* q, const T* qd,
                        const T* u, const T* dist3, SVec<T>& qdd) {
  SMat<T> M;
  SVec<T> h, g, Q;
  mass_matrix_t(p, q, M);
  bias_forces_t(p, q, qd, h);
  gravity_forces_t(p, q, g);
  generalized_forces_t(p, q, qd, u, Q);
  Q -= h;
  Q -= g;
  qdd = lu_solve(M, Q);
  if (dist3)
    for (int i = 0; i < 3; ++i) qdd[i] += dist3[i];
}

// ---- Type2 N=2 extended system -------------------------------------------
//
// x = (q[5], qd[5], z[4]) with z = (thrust_1, thrust_sum, and their rates).
// The moment channel w acts directly; the two lift channels act through the
// double-integrator compensator.

inline constexpr int kExtDim = 14;

inline void require_extended(const VehicleParams& p) {
  if (p.type != VehicleType::Type2 || p.n_links != 2)
    throw std::invalid_argument("extended system requires Type2 with 2 links");
}

// Moment-channel gain on the last joint acceleration; exact because the last
// link CoM sits on its joint.
inline double moment_gain(const VehicleParams& p) {
  return p.option == ActuationOption::CoupledRotor ? p.a11 / p.I_p : 1.0;
}

template <class T>
void plant_accel_ext(const VehicleParams& p, const T* x, const T& w,
                     SVec<T>& qdd) {
  const T u[3] = {x[10], x[11], w};
  forward_dynamics_t(p, x, x + 5, u, static_cast<const T*>(nullptr), qdd);
}

// Pose acceleration; independent of the moment channel and of the last
// joint rate, which is what makes the extension well posed.
template <class T>
void pose_accel(const VehicleParams& p, const T* x, T* acc3) {
  SVec<T> qdd;
  plant_accel_ext(p, x, T(0), qdd);
  for (int i = 0; i < 3; ++i) acc3[i] = qdd[i];
}

template <class T>
void extended_drift(const VehicleParams& p, const T* x, const T& w, T* dx) {
  SVec<T> qdd;
  plant_accel_ext(p, x, w, qdd);
  for (int i = 0; i < 5; ++i) dx[i] = x[5 + i];
  for (int i = 0; i < 5; ++i) dx[5 + i] = qdd[i];
  dx[10] = x[12];
  dx[11] = x[13];
  dx[12] = T(0);
  dx[13] = T(0);
}

// Third pose derivative: directional derivative of the pose acceleration
// along the drift. Exact; the input channels do not appear at this order.
template <class T>
void third_pose_derivative(const VehicleParams& p, const T* x, T* d3) {
  T f[kExtDim];
  extended_drift(p, x, T(0), f);
  Dual<T> xd[kExtDim];
  for (int i = 0; i < kExtDim; ++i) xd[i] = Dual<T>(x[i], f[i]);
  Dual<T> acc[3];
  pose_accel(p, xd, acc);
  for (int i = 0; i < 3; ++i) d3[i] = acc[i].d;
}

}  // namespace omav::detail
