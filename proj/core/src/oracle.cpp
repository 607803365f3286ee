#include "omav/oracle.hpp"

#include <cmath>

#include "omav/dual.hpp"

namespace omav {
namespace {

// Propeller height above the joint along the link axis. The resultant wrench
// is invariant to it because the thrust line passes through the joint; it is
// kept nonzero so the Jacobian route does not share that simplification.
constexpr double kPropHeight = 0.12;

template <class S>
struct Vec2 {
  S x, y;
};

template <class S>
Vec2<S> platform_pos(const S* q) {
  return {q[0], q[1]};
}

template <class S>
Vec2<S> joint_pos(const VehicleParams& p, int link, const S* q) {
  using std::cos;
  using std::sin;
  const double beta = p.joint_angle(link);
  return {q[0] + p.a * cos(q[2] + beta), q[1] + p.a * sin(q[2] + beta)};
}

template <class S>
S link_tilt(const VehicleParams& p, int link, const S* q) {
  return q[2] + q[3 + link] + p.theta_l[link];
}

template <class S>
Vec2<S> link_com_pos(const VehicleParams& p, int link, const S* q) {
  using std::cos;
  using std::sin;
  const Vec2<S> j = joint_pos(p, link, q);
  const S al = link_tilt(p, link, q);
  const double d = p.link_com_offset(link);
  return {j.x + d * sin(al), j.y - d * cos(al)};
}

// Point on the link axis at height t above the joint, offset s sideways.
template <class S>
Vec2<S> link_point(const VehicleParams& p, int link, const S* q, double s,
                   double t) {
  using std::cos;
  using std::sin;
  const Vec2<S> j = joint_pos(p, link, q);
  const S al = link_tilt(p, link, q);
  const S ex_x = cos(al), ex_y = sin(al);    // link x-axis
  const S ey_x = -sin(al), ey_y = cos(al);   // link y-axis (thrust direction)
  return {j.x + s * ex_x + t * ey_x, j.y + s * ex_y + t * ey_y};
}

template <class S>
S kinetic_energy_t(const VehicleParams& p, const S* q, const S* qd) {
  const int n = p.coords();
  // Velocities as directional derivatives of the positions along qd.
  Dual<S> qt[kMaxCoords];
  for (int i = 0; i < n; ++i) qt[i] = Dual<S>(q[i], qd[i]);

  const Vec2<Dual<S>> pb = platform_pos(qt);
  S T = 0.5 * p.m_b * (pb.x.d * pb.x.d + pb.y.d * pb.y.d) +
        0.5 * p.I_b * qd[2] * qd[2];
  for (int i = 0; i < p.n_links; ++i) {
    const Vec2<Dual<S>> pc = link_com_pos(p, i, qt);
    const Dual<S> al = link_tilt(p, i, qt);
    T += 0.5 * p.link_mass(i) * (pc.x.d * pc.x.d + pc.y.d * pc.y.d);
    T += 0.5 * p.link_inertia(i) * al.d * al.d;
  }
  return T;
}

template <class S>
S potential_energy_t(const VehicleParams& p, const S* q) {
  S U = p.m_b * platform_pos(q).y;
  for (int i = 0; i < p.n_links; ++i)
    U += p.link_mass(i) * link_com_pos(p, i, q).y;
  return U * p.gravity;
}

}  // namespace

std::array<double, 2> body_position(const VehicleParams& p, int body,
                                    const std::vector<double>& q) {
  if (body == 0) {
    const auto v = platform_pos(q.data());
    return {v.x, v.y};
  }
  const auto v = link_com_pos(p, body - 1, q.data());
  return {v.x, v.y};
}

double body_angle(const VehicleParams& p, int body,
                  const std::vector<double>& q) {
  if (body == 0) return q[2];
  return link_tilt(p, body - 1, q.data());
}

SMat<double> body_position_jacobian(const VehicleParams& p, int body,
                                    const std::vector<double>& q) {
  const int n = p.coords();
  SMat<double> J(2, n);
  for (int k = 0; k < n; ++k) {
    Dual1 qd[kMaxCoords];
    for (int i = 0; i < n; ++i) qd[i] = Dual1(q[i], i == k ? 1.0 : 0.0);
    Vec2<Dual1> v = body == 0 ? platform_pos(qd) : link_com_pos(p, body - 1, qd);
    J(0, k) = v.x.d;
    J(1, k) = v.y.d;
  }
  return J;
}

double oracle_kinetic_energy(const VehicleParams& p, const GenState& s) {
  s.check(p);
  return kinetic_energy_t(p, s.q.data(), s.qd.data());
}

double oracle_potential_energy(const VehicleParams& p,
                               const std::vector<double>& q) {
  return potential_energy_t(p, q.data());
}

MatrixD oracle_mass_matrix(const VehicleParams& p,
                           const std::vector<double>& q) {
  const int n = p.coords();
  MatrixD M(n, n);
  Dual2 qc[kMaxCoords];
  for (int i = 0; i < n; ++i) qc[i] = Dual2(Dual1(q[i]));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Dual2 qd[kMaxCoords];
      for (int k = 0; k < n; ++k) {
        qd[k] = Dual2(Dual1(0.0, k == i ? 1.0 : 0.0),
                      Dual1(k == j ? 1.0 : 0.0, 0.0));
      }
      const Dual2 T = kinetic_energy_t(p, qc, qd);
      M(i, j) = T.d.d;
      M(j, i) = T.d.d;
    }
  }
  if (p.servo_last_link()) M(n - 1, n - 1) = 1.0;  // mirrors the placeholder
  return M;
}

VectorD oracle_bias(const VehicleParams& p, const GenState& s) {
  s.check(p);
  const int n = p.coords();
  const double* q = s.q.data();
  const double* qd = s.qd.data();
  VectorD out(n);
  for (int k = 0; k < n; ++k) {
    // d/dt (dT/dqd_k) at fixed qd: gradient in q contracted with qd.
    Dual2 qa[kMaxCoords], qda[kMaxCoords];
    for (int i = 0; i < n; ++i) {
      qa[i] = Dual2(Dual1(q[i]), Dual1(qd[i]));
      qda[i] = Dual2(Dual1(qd[i], i == k ? 1.0 : 0.0));
    }
    const double conv = kinetic_energy_t(p, qa, qda).d.d;

    Dual1 qb[kMaxCoords], qdb[kMaxCoords];
    for (int i = 0; i < n; ++i) {
      qb[i] = Dual1(q[i], i == k ? 1.0 : 0.0);
      qdb[i] = Dual1(qd[i]);
    }
    const double dT_dqk = kinetic_energy_t(p, qb, qdb).d;
    const double dU_dqk = potential_energy_t(p, qb).d;
    out[k] = conv - dT_dqk + dU_dqk;
  }
  return out;
}

VectorD oracle_generalized_forces(const VehicleParams& p, const GenState& s,
                                  const InputVector& u) {
  s.check(p);
  u.check(p);
  const int n = p.coords();
  const int N = p.n_links;
  VectorD Q(n);

  struct Applied {
    int link;
    double side;      // lateral offset of the application point
    double strength;  // force magnitude along the link axis
  };
  std::vector<Applied> forces;
  const int n_thrust = p.type == VehicleType::Type2 ? N - 1 : N;
  for (int i = 0; i < n_thrust; ++i) forces.push_back({i, 0.0, u.values[i]});
  if (p.type == VehicleType::Type2) {
    const double lift = u.lift_channel();
    const double mom = u.moment_channel();
    if (p.option == ActuationOption::CoupledRotor) {
      forces.push_back({N - 1, +p.a11, 0.5 * (lift + mom)});
      forces.push_back({N - 1, -p.a11, 0.5 * (lift - mom)});
    } else {
      forces.push_back({N - 1, 0.0, lift});
    }
  }

  for (int k = 0; k < n; ++k) {
    Dual1 qk[kMaxCoords];
    for (int i = 0; i < n; ++i) qk[i] = Dual1(s.q[i], i == k ? 1.0 : 0.0);
    double acc = 0.0;
    for (const Applied& f : forces) {
      const Vec2<Dual1> pt = link_point(p, f.link, qk, f.side, kPropHeight);
      const Dual1 al = link_tilt(p, f.link, qk);
      // World force components of a thrust along the link y-axis.
      const double fx = -f.strength * std::sin(al.v);
      const double fy = f.strength * std::cos(al.v);
      acc += fx * pt.x.d + fy * pt.y.d;
    }
    Q[k] = acc;
  }
  for (int i = 0; i < p.passive_joints(); ++i)
    Q[3 + i] -= p.b_f[i] * s.qd[3 + i];
  if (p.type == VehicleType::Type2 &&
      p.option == ActuationOption::Servo)
    Q[n - 1] += u.moment_channel();  // mirrors the acceleration command
  return Q;
}

std::array<double, 2> oracle_com_acceleration(const VehicleParams& p,
                                              const GenState& s,
                                              const VectorD& qdd) {
  s.check(p);
  const int n = p.coords();
  // Second time derivative of the mass-weighted mean position along the
  // trajectory jet q(t) = q + t qd + t^2/2 qdd.
  Dual2 qt[kMaxCoords];
  for (int i = 0; i < n; ++i)
    qt[i] = Dual2(Dual1(s.q[i], s.qd[i]), Dual1(s.qd[i], qdd[i]));
  Dual2 cx(0.0), cy(0.0);
  const Vec2<Dual2> pb = platform_pos(qt);
  cx += p.m_b * pb.x;
  cy += p.m_b * pb.y;
  for (int i = 0; i < p.n_links; ++i) {
    const Vec2<Dual2> pc = link_com_pos(p, i, qt);
    cx += p.link_mass(i) * pc.x;
    cy += p.link_mass(i) * pc.y;
  }
  const double mt = p.m_tot();
  return {cx.d.d / mt, cy.d.d / mt};
}

}  // namespace omav
