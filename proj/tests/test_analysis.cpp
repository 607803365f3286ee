#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "omav/analysis.hpp"
#include "omav/dynamics_detail.hpp"

using namespace omav;

namespace {

VehicleParams type1_vehicle(int n_links) {
  VehicleParams p;
  p.type = VehicleType::Type1;
  p.n_links = n_links;
  p.m_b = 4.0;
  p.m_p = 1.0;
  p.I_b = 2.0e-2;
  p.I_p = 2.0e-3;
  p.a = 0.4;
  p.finalize();
  return p;
}

EquilibriumPose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-8.0, 8.0);
  std::uniform_real_distribution<double> ang(-1.2, 1.2);
  return {pos(rng), pos(rng), ang(rng)};
}

// Extended state with healthy thrusts and moderate motion, away from the
// tilt singularity.
ExtendedState random_extended(const VehicleParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> ang(-0.5, 0.5);
  std::uniform_real_distribution<double> vel(-1.0, 1.0);
  std::uniform_real_distribution<double> thrust(25.0, 75.0);
  std::uniform_real_distribution<double> rate(-5.0, 5.0);
  ExtendedState s(p.coords());
  s.plant.q = {pos(rng), pos(rng), ang(rng), ang(rng), ang(rng)};
  for (int i = 0; i < 5; ++i) s.plant.qd[i] = vel(rng);
  s.comp.thrust = {thrust(rng), thrust(rng)};
  s.comp.rate = {rate(rng), rate(rng)};
  return s;
}

// y'''' by central differencing y''' along the closed-loop vector field
// with inputs (v1, v2, w); independent of the dual-number route.
std::array<double, 3> fourth_derivative_fd(const VehicleParams& p,
                                           const ExtendedState& s, double v1,
                                           double v2, double w) {
  double x[detail::kExtDim];
  pack_extended(s, x);
  double f[detail::kExtDim];
  detail::extended_drift(p, x, w, f);
  f[12] = v1;
  f[13] = v2;
  const double h = 1e-6;
  double xp[detail::kExtDim], xm[detail::kExtDim];
  for (int i = 0; i < detail::kExtDim; ++i) {
    xp[i] = x[i] + h * f[i];
    xm[i] = x[i] - h * f[i];
  }
  double d3p[3], d3m[3];
  detail::third_pose_derivative(p, xp, d3p);
  detail::third_pose_derivative(p, xm, d3m);
  return {(d3p[0] - d3m[0]) / (2.0 * h), (d3p[1] - d3m[1]) / (2.0 * h),
          (d3p[2] - d3m[2]) / (2.0 * h)};
}

double det3(const std::array<std::array<double, 3>, 3>& A) {
  return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
         A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
         A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
}

}  // namespace

TEST_CASE("all-passive vehicles lose wrench rank at equilibria") {
  const VehicleParams p = type1_vehicle(3);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const GenState s = equilibrium_state(p, random_pose(rng));
    CHECK(matrix_rank(wrench_jacobian(p, s.q)) == 2);
    CHECK(matrix_rank(decoupling_matrix(p, s)) == 2);
  }
  // Away from the parallel-thrust fiber the force directions spread out.
  GenState tilted = equilibrium_state(p, {0.0, 0.0, 0.0});
  tilted.q[3] += 0.4;
  tilted.q[4] -= 0.3;
  CHECK(matrix_rank(wrench_jacobian(p, tilted.q)) == 3);
}

TEST_CASE("moment channel never reaches the pose accelerations directly") {
  for (auto option :
       {ActuationOption::CoupledRotor, ActuationOption::Servo}) {
    VehicleParams p = VehicleParams::preset("main-paper");
    p.option = option;
    p.preset_name.clear();
    p.finalize();
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> ang(-1.0, 1.0);
    for (int trial = 0; trial < 15; ++trial) {
      GenState s(p.coords());
      for (int i = 0; i < 5; ++i) {
        s.q[i] = ang(rng);
        s.qd[i] = ang(rng);
      }
      const MatrixD D = decoupling_matrix(p, s);
      REQUIRE(D.cols == 3);
      double scale = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) scale = std::max(scale, std::fabs(D(i, j)));
      // Structural zero; only solver roundoff remains.
      for (int i = 0; i < 3; ++i) CHECK(std::fabs(D(i, 2)) <= 1e-14 * scale);
    }
  }
}

TEST_CASE("pose acceleration ignores the moment input and last joint rate") {
  const VehicleParams p = VehicleParams::preset("main-paper");
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    ExtendedState s = random_extended(p, rng);
    double x[detail::kExtDim];
    pack_extended(s, x);
    double a0[3], a1[3];
    detail::pose_accel(p, x, a0);

    SVec<double> qdd;
    detail::plant_accel_ext(p, x, 37.5, qdd);  // strong moment command
    for (int i = 0; i < 3; ++i) a1[i] = qdd[i];
    // The moment only alters the joint rows of the solve; the pose rows
    // keep nothing but roundoff.
    for (int i = 0; i < 3; ++i)
      CHECK(std::fabs(a0[i] - a1[i]) <= 1e-13 * std::max(1.0, std::fabs(a0[i])));

    x[9] += 2.0;  // last joint rate: a bitwise no-op on every solve input
    detail::pose_accel(p, x, a1);
    for (int i = 0; i < 3; ++i) CHECK(a0[i] == a1[i]);
  }
}

TEST_CASE("extended decoupling is invertible over the hover fiber") {
  for (const char* preset : {"main-paper", "report-nominal"}) {
    CAPTURE(preset);
    const VehicleParams p = VehicleParams::preset(preset);
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 20; ++trial) {
      const ExtendedState s = hover_extended_state(p, random_pose(rng));
      const ExtendedDecoupling ed = extended_decoupling(p, s);
      CHECK(std::fabs(ed.det) > 1e-3);
      CHECK(ed.cond < 1e6);
      CHECK(ed.det == doctest::Approx(det3(ed.A)).epsilon(1e-12));
    }
  }
}

TEST_CASE("extended decoupling matches a finite-difference fourth derivative") {
  const VehicleParams p = VehicleParams::preset("main-paper");
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> vin(-40.0, 40.0);
  for (int trial = 0; trial < 20; ++trial) {
    const ExtendedState s = random_extended(p, rng);
    const ExtendedDecoupling ed = extended_decoupling(p, s);
    for (int probe = 0; probe < 3; ++probe) {
      const double v1 = vin(rng), v2 = vin(rng), w = vin(rng);
      const auto fd = fourth_derivative_fd(p, s, v1, v2, w);
      for (int i = 0; i < 3; ++i) {
        const double model = ed.b[i] + ed.A[i][0] * v1 + ed.A[i][1] * v2 +
                             ed.A[i][2] * w;
        CHECK(std::fabs(model - fd[i]) <=
              1e-5 * std::max(1.0, std::fabs(fd[i])));
      }
    }
  }
}

TEST_CASE("decoupling degenerates when the lift channel collapses") {
  const VehicleParams p = VehicleParams::preset("main-paper");
  ExtendedState s = hover_extended_state(p, {0.0, 0.0, 0.3});
  const double det_ref = std::fabs(extended_decoupling(p, s).det);
  double prev = det_ref;
  for (double z12 : {10.0, 1.0, 0.1, 1e-3}) {
    s.comp.thrust[1] = z12;
    const double det = std::fabs(extended_decoupling(p, s).det);
    CHECK(det < prev);
    prev = det;
  }
  // The determinant vanishes linearly with the lift channel.
  CHECK(prev < 1e-4 * det_ref);
}

TEST_CASE("decoupling degenerates at quarter-turn platform angles") {
  const VehicleParams p = VehicleParams::preset("main-paper");
  const double det_ref =
      std::fabs(extended_decoupling(p, hover_extended_state(p, {0, 0, 0})).det);
  double prev = det_ref;
  for (double gap : {0.3, 0.03, 3e-3, 3e-5}) {
    const ExtendedState s =
        hover_extended_state(p, {0.0, 0.0, std::numbers::pi / 2 - gap});
    const double det = std::fabs(extended_decoupling(p, s).det);
    CHECK(det < prev);
    prev = det;
  }
  CHECK(prev < 1e-4 * det_ref);
}

TEST_CASE("extended analysis rejects vehicles outside its family") {
  CHECK_THROWS_AS(
      hover_extended_state(type1_vehicle(3), EquilibriumPose{}),
      std::invalid_argument);
}

TEST_CASE("hover state sits on the equilibrium fiber") {
  const VehicleParams p = VehicleParams::preset("report-nominal");
  const EquilibriumPose pose{2.0, -1.0, 0.4};
  const ExtendedState s = hover_extended_state(p, pose);
  const GenState eq = equilibrium_state(p, pose);
  for (int i = 0; i < 5; ++i) {
    CHECK(s.plant.q[i] == eq.q[i]);
    CHECK(s.plant.qd[i] == 0.0);
  }
  const InputVector u = equilibrium_input(p);
  CHECK(s.comp.thrust[0] == u.values[0]);
  CHECK(s.comp.thrust[1] == u.values[1]);
  CHECK(s.comp.rate[0] == 0.0);
  CHECK(s.comp.rate[1] == 0.0);
}

TEST_CASE("omnidirectionality classes across families") {
  const VehicleParams t2 = VehicleParams::preset("main-paper");
  const OmniReport full =
      omni_classify(t2, equilibrium_state(t2, {0, 0, 0}));
  CHECK(full.classification == OmniClass::FullyOmnidirectional);
  CHECK(full.moment_authority);
  CHECK(full.full_actuation);
  CHECK(full.feasible_directions == full.grid);
  CHECK(full.worst_lift_margin > 1.0);

  const VehicleParams t1 = type1_vehicle(3);
  const OmniReport fixed =
      omni_classify(t1, equilibrium_state(t1, {0, 0, 0}));
  CHECK(fixed.classification == OmniClass::NotOmnidirectional);
  CHECK(fixed.wrench_rank == 2);
  CHECK_FALSE(fixed.full_actuation);

  // Same geometry, thousandfold weight: lift feasibility dies even though
  // the actuation structure is unchanged.
  VehicleParams heavy = t2;
  heavy.gravity = 9810.0;
  heavy.preset_name.clear();
  heavy.finalize();
  const OmniReport crushed =
      omni_classify(heavy, equilibrium_state(heavy, {0, 0, 0}));
  CHECK(crushed.classification == OmniClass::NotOmnidirectional);
  CHECK(crushed.full_actuation);
  CHECK(crushed.feasible_directions == 0);
  CHECK(crushed.worst_lift_margin < 0.0);
}

TEST_CASE("direction grid size is configurable and reported") {
  const VehicleParams p = VehicleParams::preset("main-paper");
  OmniOptions opt;
  opt.direction_grid = 128;
  const OmniReport r =
      omni_classify(p, equilibrium_state(p, {0, 0, 0}), opt);
  CHECK(r.grid == 128);
  CHECK(r.feasible_directions == 128);
}

TEST_CASE("pinned-output internal dynamics vanish at the equilibrium") {
  for (const char* preset : {"main-paper", "report-nominal"}) {
    CAPTURE(preset);
    const VehicleParams p = VehicleParams::preset(preset);
    for (double phi_d : {0.0, 0.3, 0.9}) {
      const ZeroDynEval z =
          zero_dynamics_general_rhs(p, {1.0, 2.0, phi_d}, {-phi_d, 0.0});
      CHECK(z.rhs.angle == 0.0);
      CHECK(std::fabs(z.rhs.rate) < 1e-10);
      CHECK(z.residual < 1e-10);
    }
  }
}

TEST_CASE("internal dynamics reduce to a damped pendulum in the joint") {
  const VehicleParams p = VehicleParams::preset("report-nominal");
  const double k1 = p.k1(0), k2 = p.k2(0), b = p.b_f[0];
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> du(-0.8, 0.8);
  for (double phi_d : {0.2, 0.6}) {
    for (int trial = 0; trial < 12; ++trial) {
      const ZeroDynState z{-phi_d + du(rng), du(rng)};
      const ZeroDynEval e = zero_dynamics_general_rhs(p, {0, 0, phi_d}, z);
      const double pendulum =
          (-b * z.rate - p.gravity * k1 * std::sin(phi_d + z.angle)) / k2;
      CHECK(e.rhs.angle == z.rate);
      CHECK(e.rhs.rate ==
            doctest::Approx(pendulum).epsilon(1e-9));
    }
  }
}

namespace {

// RK4 on the two-state internal dynamics.
ZeroDynState flow_internal(const VehicleParams& p, const EquilibriumPose& d,
                           ZeroDynState z, double dt, int steps) {
  auto rhs = [&](const ZeroDynState& s) {
    return zero_dynamics_general_rhs(p, d, s).rhs;
  };
  for (int k = 0; k < steps; ++k) {
    const ZeroDynState k1 = rhs(z);
    const ZeroDynState k2 =
        rhs({z.angle + 0.5 * dt * k1.angle, z.rate + 0.5 * dt * k1.rate});
    const ZeroDynState k3 =
        rhs({z.angle + 0.5 * dt * k2.angle, z.rate + 0.5 * dt * k2.rate});
    const ZeroDynState k4 =
        rhs({z.angle + dt * k3.angle, z.rate + dt * k3.rate});
    z.angle += dt / 6.0 * (k1.angle + 2 * k2.angle + 2 * k3.angle + k4.angle);
    z.rate += dt / 6.0 * (k1.rate + 2 * k2.rate + 2 * k3.rate + k4.rate);
  }
  return z;
}

}  // namespace

TEST_CASE("internal state converges under joint friction") {
  const VehicleParams p = VehicleParams::preset("report-nominal");
  const double phi_d = 0.5;
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> du(-0.2, 0.2);
  for (int trial = 0; trial < 6; ++trial) {
    const ZeroDynState z0{-phi_d + du(rng), du(rng)};
    const ZeroDynState z =
        flow_internal(p, {0, 0, phi_d}, z0, 5e-3, 12000);  // 60 s
    CHECK(std::fabs(z.angle + phi_d) < 0.02);
    CHECK(std::fabs(z.rate) < 0.02);
  }
}

TEST_CASE("without friction the internal state keeps oscillating") {
  VehicleParams p = VehicleParams::preset("report-nominal");
  p.b_f = {0.0};
  p.preset_name.clear();
  p.finalize();
  const double phi_d = 0.5;
  const ZeroDynState z0{-phi_d, 0.3};
  ZeroDynState z = z0;
  double max_rate_tail = 0.0;
  for (int k = 0; k < 12000; ++k) {
    z = flow_internal(p, {0, 0, phi_d}, z, 5e-3, 1);
    if (k >= 10000) max_rate_tail = std::max(max_rate_tail, std::fabs(z.rate));
  }
  CHECK(max_rate_tail > 0.15);  // no decay without dissipation
}

TEST_CASE("positive-coefficient simplified form is a saddle") {
  const double l = 30.0, phi_d = 0.5;
  // rhs zero at angle = +/- phi_d.
  CHECK(simplified_zero_dynamics_rhs(l, phi_d, {phi_d, 0.0}).rate == 0.0);
  CHECK(simplified_zero_dynamics_rhs(l, phi_d, {-phi_d, 0.0}).rate ==
        doctest::Approx(0.0));
  // Both small offsets at -phi_d escape: unstable equilibrium.
  for (double eps : {0.05, -0.05}) {
    ZeroDynState z{-phi_d + eps, 0.0};
    double t = 0.0;
    const double dt = 1e-3;
    while (std::fabs(z.angle + phi_d) < 1.0 && t < 20.0) {
      const ZeroDynState k1 = simplified_zero_dynamics_rhs(l, phi_d, z);
      const ZeroDynState mid{z.angle + 0.5 * dt * k1.angle,
                             z.rate + 0.5 * dt * k1.rate};
      const ZeroDynState k2 = simplified_zero_dynamics_rhs(l, phi_d, mid);
      z.angle += dt * k2.angle;
      z.rate += dt * k2.rate;
      t += dt;
    }
    CHECK(std::fabs(z.angle + phi_d) >= 1.0);
  }
}

TEST_CASE("fitted simplified coefficient reflects the stable restoring term") {
  const VehicleParams p = VehicleParams::preset("report-nominal");
  const double phi_d = 0.6;
  // Local slope: l sin(phi_d) = -g k1 / k2 from linearizing both forms.
  const double analytic =
      -p.gravity * p.k1(0) / (p.k2(0) * std::sin(phi_d));
  const double local = fit_simplified_l(p, phi_d, 0.05, 11);
  CHECK(local < 0.0);
  CHECK(local == doctest::Approx(analytic).epsilon(1e-2));
  // Wide-window fit drifts from the local slope but keeps sign and scale.
  const double wide = fit_simplified_l(p, phi_d);
  CHECK(wide < 0.0);
  CHECK(std::fabs(wide - analytic) < 0.2 * std::fabs(analytic));
}

TEST_CASE("solved manifold state pins the outputs") {
  const VehicleParams p = VehicleParams::preset("main-paper");
  const EquilibriumPose pose{1.5, -0.5, 0.4};
  const ZeroDynEval z = zero_dynamics_general_rhs(p, pose, {-0.1, 0.15});
  const ExtendedState& s = z.manifold_state;
  CHECK(s.plant.q[0] == doctest::Approx(pose.x).epsilon(1e-12));
  CHECK(s.plant.q[1] == doctest::Approx(pose.y).epsilon(1e-12));
  CHECK(s.plant.q[2] == doctest::Approx(pose.phi).epsilon(1e-12));
  CHECK(s.plant.q[3] == -0.1);
  CHECK(s.plant.qd[3] == 0.15);
  // First derivatives of the pose vanish on the manifold.
  CHECK(std::fabs(s.plant.qd[0]) < 1e-12);
  CHECK(std::fabs(s.plant.qd[1]) < 1e-12);
  CHECK(std::fabs(s.plant.qd[2]) < 1e-12);
  // Second derivatives too, through the solved compensator charges.
  double x[detail::kExtDim];
  pack_extended(s, x);
  double acc[3];
  detail::pose_accel(p, x, acc);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(acc[i]) < 1e-9);
  double d3[3];
  detail::third_pose_derivative(p, x, d3);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(d3[i]) < 1e-8);
}
