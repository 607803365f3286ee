#include "omav/analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "omav/dynamics_detail.hpp"

namespace omav {
namespace {

Eigen::MatrixXd to_eigen(const MatrixD& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
  return e;
}

constexpr double kStandardGravity = 9.80665;

}  // namespace

MatrixD input_map_jacobian(const VehicleParams& p,
                           const std::vector<double>& q) {
  if (static_cast<int>(q.size()) != p.coords())
    throw std::invalid_argument("input_map_jacobian: dimension mismatch");
  const int n = p.coords();
  const int nu = p.input_count();
  MatrixD J(n, nu);
  std::vector<double> qd(n, 0.0);
  SVec<double> q0, qc;
  std::vector<double> u(nu, 0.0);
  detail::generalized_forces_t(p, q.data(), qd.data(), u.data(), q0);
  for (int c = 0; c < nu; ++c) {
    u.assign(nu, 0.0);
    u[c] = 1.0;
    detail::generalized_forces_t(p, q.data(), qd.data(), u.data(), qc);
    for (int r = 0; r < n; ++r) J(r, c) = qc[r] - q0[r];
  }
  return J;
}

MatrixD wrench_jacobian(const VehicleParams& p, const std::vector<double>& q) {
  const MatrixD J = input_map_jacobian(p, q);
  MatrixD W(3, J.cols);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < J.cols; ++c) W(r, c) = J(r, c);
  return W;
}

int matrix_rank(const MatrixD& m, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

MatrixD decoupling_matrix(const VehicleParams& p, const GenState& s) {
  s.check(p);
  const int n = p.coords();
  const int nu = p.input_count();
  MatrixD M;
  detail::mass_matrix_t(p, s.q.data(), M);
  const MatrixD J = input_map_jacobian(p, s.q);
  MatrixD D(3, nu);
  for (int c = 0; c < nu; ++c) {
    SVec<double> col(n);
    for (int r = 0; r < n; ++r) col[r] = J(r, c);
    const SVec<double> x = lu_solve(M, col);
    for (int r = 0; r < 3; ++r) D(r, c) = x[r];
  }
  return D;
}

ExtendedState hover_extended_state(const VehicleParams& p,
                                   const EquilibriumPose& pose) {
  detail::require_extended(p);
  ExtendedState s(5);
  s.plant = equilibrium_state(p, pose);
  const double share = p.gravity * p.m_tot() / p.n_links;
  s.comp.thrust = {share, share};
  s.comp.rate = {0.0, 0.0};
  return s;
}

ExtendedDecoupling extended_decoupling(const VehicleParams& p,
                                       const ExtendedState& s) {
  detail::require_extended(p);
  double x[kExtendedDim];
  pack_extended(s, x);

  double drift[kExtendedDim];
  detail::extended_drift(p, x, 0.0, drift);

  ExtendedDecoupling out;
  // Directional derivative of the third pose derivative along a tangent.
  const auto sweep = [&](const double* dir, double* res3) {
    Dual1 xd[kExtendedDim];
    for (int i = 0; i < kExtendedDim; ++i) xd[i] = Dual1(x[i], dir[i]);
    Dual1 d3[3];
    detail::third_pose_derivative(p, xd, d3);
    for (int i = 0; i < 3; ++i) res3[i] = d3[i].d;
  };

  sweep(drift, out.b.data());

  double dir[kExtendedDim] = {};
  double col[3];
  const double wg = detail::moment_gain(p);
  const int cols[3] = {12, 13, 9};  // thrust rates, last joint rate
  const double gains[3] = {1.0, 1.0, wg};
  for (int c = 0; c < 3; ++c) {
    for (double& v : dir) v = 0.0;
    dir[cols[c]] = gains[c];
    sweep(dir, col);
    for (int r = 0; r < 3; ++r) out.A[r][c] = col[r];
  }

  Eigen::Matrix3d A;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) A(r, c) = out.A[r][c];
  out.det = A.determinant();
  // Condition number from the singular spectrum of A^T A.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A.transpose() * A);
  const double smin = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
  const double smax = std::sqrt(std::max(0.0, es.eigenvalues()(2)));
  out.cond = smin > 0.0 ? smax / smin
                        : std::numeric_limits<double>::infinity();
  return out;
}

// ---- omnidirectionality --------------------------------------------------

namespace {

// Maximize sum(f) subject to c.f == 0 and 0 <= f_i <= cap. Exact vertex
// enumeration: at most one coordinate sits strictly inside the box.
double max_lift_zero_moment(const std::vector<double>& c, double cap) {
  const int n = static_cast<int>(c.size());
  double best = -1.0;
  for (int free = -1; free < n; ++free) {
    for (int mask = 0; mask < (1 << n); ++mask) {
      if (free >= 0 && (mask & (1 << free))) continue;
      double lift = 0.0, moment = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i == free) continue;
        if (mask & (1 << i)) {
          lift += cap;
          moment += c[i] * cap;
        }
      }
      if (free < 0) {
        if (std::fabs(moment) < 1e-9 * (1.0 + std::fabs(cap)))
          best = std::max(best, lift);
        continue;
      }
      if (c[free] == 0.0) {
        if (std::fabs(moment) < 1e-9 * (1.0 + std::fabs(cap)))
          best = std::max(best, lift + cap);
        continue;
      }
      const double f = -moment / c[free];
      if (f >= -1e-12 && f <= cap + 1e-12)
        best = std::max(best, lift + std::min(std::max(f, 0.0), cap));
    }
  }
  return best;
}

}  // namespace

OmniReport omni_classify(const VehicleParams& p, const GenState& s,
                         const OmniOptions& opt) {
  s.check(p);
  if (opt.direction_grid < 8)
    throw std::invalid_argument("omni_classify: grid must be at least 8");

  OmniReport rep;
  rep.grid = opt.direction_grid;

  const MatrixD W = wrench_jacobian(p, s.q);
  rep.wrench_rank = matrix_rank(W);
  MatrixD Wm(1, W.cols);
  for (int c = 0; c < W.cols; ++c) Wm(0, c) = W(2, c);
  rep.moment_authority = matrix_rank(Wm) == 1;

  if (p.type == VehicleType::Type1) {
    rep.full_actuation = rep.wrench_rank == 3;
  } else if (p.n_links == 2) {
    // Tilt-mediated actuation through the dynamic extension.
    EquilibriumPose pose{s.q[0], s.q[1], s.q[2]};
    const ExtendedDecoupling ext =
        extended_decoupling(p, hover_extended_state(p, pose));
    rep.full_actuation = ext.cond < 1e8;
  } else {
    // Wrench authority including passive tilts as slow inputs.
    const int n = p.coords();
    MatrixD Wt(3, p.input_count() + p.n_links);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < p.input_count(); ++c) Wt(r, c) = W(r, c);
    const InputVector ue = equilibrium_input(p);
    for (int j = 0; j < p.n_links; ++j) {
      Dual1 q[kMaxCoords];
      for (int i = 0; i < n; ++i)
        q[i] = Dual1(s.q[i], i == 3 + j ? 1.0 : 0.0);
      Dual1 qd[kMaxCoords];
      for (int i = 0; i < n; ++i) qd[i] = Dual1(0.0);
      Dual1 uu[kMaxCoords];
      for (int i = 0; i < p.input_count(); ++i) uu[i] = Dual1(ue.values[i]);
      SVec<Dual1> Q;
      detail::generalized_forces_t(p, q, qd, uu, Q);
      for (int r = 0; r < 3; ++r) Wt(r, p.input_count() + j) = Q[r].d;
    }
    rep.full_actuation = matrix_rank(Wt) == 3;
  }

  // Lift feasibility over platform directions: all links vertical, thrusts
  // capped at a thrust-to-weight multiple of the standard-gravity hover
  // share, moment nulled by thrust allocation alone (steady state).
  const double weight = p.gravity * p.m_tot();
  const double cap =
      opt.thrust_to_weight_max * kStandardGravity * p.m_tot() / p.n_links;
  double worst = std::numeric_limits<double>::infinity();
  int feasible = 0;
  for (int k = 0; k < opt.direction_grid; ++k) {
    const double gamma =
        2.0 * std::numbers::pi * static_cast<double>(k) / opt.direction_grid;
    std::vector<double> c(p.n_links);
    for (int i = 0; i < p.n_links; ++i)
      c[i] = p.a * std::cos(gamma + p.joint_angle(i));
    const double lift = max_lift_zero_moment(c, cap);
    const double margin = (lift - weight) / weight;
    worst = std::min(worst, margin);
    if (margin >= -1e-9) ++feasible;
  }
  rep.worst_lift_margin = worst;
  rep.feasible_directions = feasible;

  if (!rep.full_actuation || feasible == 0) {
    rep.classification = OmniClass::NotOmnidirectional;
  } else if (feasible == opt.direction_grid) {
    rep.classification = OmniClass::FullyOmnidirectional;
  } else {
    rep.classification = OmniClass::PartiallyOmnidirectional;
  }
  return rep;
}

// ---- zero dynamics -------------------------------------------------------

ZeroDynState simplified_zero_dynamics_rhs(double l, double phi_d,
                                          const ZeroDynState& z) {
  return {z.rate, l * (std::cos(z.angle) - std::cos(phi_d))};
}

ZeroDynEval zero_dynamics_general_rhs(const VehicleParams& p,
                                      const EquilibriumPose& pose_d,
                                      const ZeroDynState& z,
                                      const ExtendedState* warm_start) {
  detail::require_extended(p);

  double x[kExtendedDim] = {};
  x[0] = pose_d.x;
  x[1] = pose_d.y;
  x[2] = pose_d.phi;
  x[3] = z.angle;
  x[8] = z.rate;

  constexpr int kFree[6] = {4, 9, 10, 11, 12, 13};

  if (warm_start != nullptr) {
    double w[kExtendedDim];
    pack_extended(*warm_start, w);
    for (int c : kFree) x[c] = w[c];
  } else {
    // Hover-fiber initial guess for the free components.
    x[4] = -pose_d.phi - p.theta_l[1];
    const double share = p.gravity * p.m_tot() / p.n_links;
    x[10] = share;
    x[11] = share;
  }

  const auto residual = [&](const double* xs, double* r6) {
    double acc[3], d3[3];
    detail::pose_accel(p, xs, acc);
    detail::third_pose_derivative(p, xs, d3);
    for (int i = 0; i < 3; ++i) {
      r6[i] = acc[i];
      r6[3 + i] = d3[i];
    }
  };

  double r[6];
  residual(x, r);
  double rnorm = 0.0;
  for (double v : r) rnorm = std::max(rnorm, std::fabs(v));

  int iters = 0;
  const double tol = 1e-12;
  while (rnorm > tol && iters < 50) {
    // Jacobian in the free components by forward sweeps.
    Eigen::Matrix<double, 6, 6> J;
    for (int c = 0; c < 6; ++c) {
      Dual1 xd[kExtendedDim];
      for (int i = 0; i < kExtendedDim; ++i)
        xd[i] = Dual1(x[i], i == kFree[c] ? 1.0 : 0.0);
      Dual1 acc[3], d3[3];
      detail::pose_accel(p, xd, acc);
      detail::third_pose_derivative(p, xd, d3);
      for (int i = 0; i < 3; ++i) {
        J(i, c) = acc[i].d;
        J(3 + i, c) = d3[i].d;
      }
    }
    Eigen::Matrix<double, 6, 1> rv;
    for (int i = 0; i < 6; ++i) rv(i) = r[i];
    const Eigen::Matrix<double, 6, 1> step = J.fullPivLu().solve(rv);

    double damping = 1.0;
    double xnew[kExtendedDim], rnew[6], nnew = 0.0;
    for (int halve = 0; halve < 30; ++halve) {
      std::copy(x, x + kExtendedDim, xnew);
      for (int c = 0; c < 6; ++c) xnew[kFree[c]] -= damping * step(c);
      residual(xnew, rnew);
      nnew = 0.0;
      for (double v : rnew) nnew = std::max(nnew, std::fabs(v));
      if (nnew < rnorm || rnorm <= tol) break;
      damping *= 0.5;
    }
    if (nnew >= rnorm && rnorm > tol)
      throw NewtonError("zero_dynamics_general_rhs: no descent");
    std::copy(xnew, xnew + kExtendedDim, x);
    std::copy(rnew, rnew + 6, r);
    rnorm = nnew;
    ++iters;
  }
  if (rnorm > tol)
    throw NewtonError("zero_dynamics_general_rhs: did not converge");

  SVec<double> qdd;
  detail::plant_accel_ext(p, x, 0.0, qdd);

  ZeroDynEval out;
  out.rhs = {z.rate, qdd[3]};
  out.manifold_state = unpack_extended(x);
  out.newton_iterations = iters;
  out.residual = rnorm;
  return out;
}

double fit_simplified_l(const VehicleParams& p, double phi_d,
                        double half_width, int samples) {
  const auto angle_at = [&](int k) {
    return -phi_d - half_width +
           2.0 * half_width * static_cast<double>(k) / (samples - 1);
  };
  double num = 0.0, den = 0.0;
  // Sweep each half from the center outward, chaining the previous
  // solution as the warm start; the edge samples sit outside the basin of
  // the cold hover-fiber guess for wide windows.
  const int mid = samples / 2;
  const auto accumulate = [&](int k, const ExtendedState* warm,
                              ExtendedState& out) {
    const double eta1 = angle_at(k);
    const ZeroDynEval ev =
        zero_dynamics_general_rhs(p, {0.0, 0.0, phi_d}, {eta1, 0.0}, warm);
    const double reg = std::cos(eta1) - std::cos(phi_d);
    num += reg * ev.rhs.rate;
    den += reg * reg;
    out = ev.manifold_state;
  };
  ExtendedState center;
  accumulate(mid, nullptr, center);
  ExtendedState warm = center;
  for (int k = mid + 1; k < samples; ++k) accumulate(k, &warm, warm);
  warm = center;
  for (int k = mid - 1; k >= 0; --k) accumulate(k, &warm, warm);
  if (den == 0.0) throw std::invalid_argument("fit_simplified_l: flat regressor");
  return num / den;
}

}  // namespace omav
