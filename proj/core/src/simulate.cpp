#include "omav/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "omav/dynamics_detail.hpp"

namespace omav {

double DisturbanceSpec::value(double t) const {
  return amplitude * std::sin(omega * t + phase);
}

const char* termination_name(TerminationReason t) {
  switch (t) {
    case TerminationReason::Completed: return "completed";
    case TerminationReason::Singularity: return "singularity";
    case TerminationReason::Diverged: return "diverged";
  }
  return "?";
}

namespace {

// Closed-loop state derivative at (t, x). Throws SingularityError through.
void closed_loop_deriv(const VehicleParams& plant,
                       const VehicleParams& controller_model,
                       const GainSet& gains, const ReferenceSpec& ref,
                       const DisturbanceSpec& dist, double t,
                       const double* x, double min_margin, double* dx,
                       FblCommand* cmd_out = nullptr) {
  const ExtendedState s = unpack_extended(x);
  const PoseRef pr = eval_reference(ref, t);
  const FblCommand cmd =
      fbl_control(controller_model, gains, s, pr, min_margin);
  detail::extended_drift(plant, x, cmd.moment, dx);
  dx[12] = cmd.v1;
  dx[13] = cmd.v2;
  if (dist.amplitude != 0.0) {
    const double d = dist.value(t);
    dx[5] += d;
    dx[6] += d;
    dx[7] += d;
  }
  if (cmd_out) *cmd_out = cmd;
}

struct StepResult {
  std::array<double, kExtendedDim> x;
  FblCommand cmd;  // command applied at the step start
};

StepResult rk4_step_raw(const VehicleParams& plant,
                        const VehicleParams& controller_model,
                        const GainSet& gains, const ReferenceSpec& ref,
                        const DisturbanceSpec& dist, double t,
                        const double* x, double dt, double min_margin) {
  StepResult out;
  double k1[kExtendedDim], k2[kExtendedDim], k3[kExtendedDim],
      k4[kExtendedDim], xs[kExtendedDim];
  closed_loop_deriv(plant, controller_model, gains, ref, dist, t, x,
                    min_margin, k1, &out.cmd);
  for (int i = 0; i < kExtendedDim; ++i) xs[i] = x[i] + 0.5 * dt * k1[i];
  closed_loop_deriv(plant, controller_model, gains, ref, dist, t + 0.5 * dt,
                    xs, min_margin, k2);
  for (int i = 0; i < kExtendedDim; ++i) xs[i] = x[i] + 0.5 * dt * k2[i];
  closed_loop_deriv(plant, controller_model, gains, ref, dist, t + 0.5 * dt,
                    xs, min_margin, k3);
  for (int i = 0; i < kExtendedDim; ++i) xs[i] = x[i] + dt * k3[i];
  closed_loop_deriv(plant, controller_model, gains, ref, dist, t + dt, xs,
                    min_margin, k4);
  for (int i = 0; i < kExtendedDim; ++i)
    out.x[i] =
        x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

void log_sample(SimLog& log, const VehicleParams& plant, double t,
                const double* x, const FblCommand& cmd,
                const PoseRef& ref) {
  log.t.push_back(t);
  std::array<double, kExtendedDim> xs;
  std::copy(x, x + kExtendedDim, xs.begin());
  log.state.push_back(xs);
  log.input.push_back({cmd.u.values[0], cmd.u.values[1], cmd.u.values[2]});
  const double ex = x[0] - ref.x[0], ey = x[1] - ref.y[0];
  log.e_pos.push_back(std::hypot(ex, ey));
  log.e_phi.push_back(std::abs(x[2] - ref.phi[0]));
  log.input_feasible.push_back(cmd.u.satisfies_bounds(plant) ? 1 : 0);
}

bool diverged(const SimOptions& opt, const double* x, double e_pos) {
  for (int i = 0; i < kExtendedDim; ++i)
    if (!(std::abs(x[i]) <= opt.state_limit)) return true;
  return !(e_pos <= opt.error_limit);
}

}  // namespace

ExtendedState step_rk4(const VehicleParams& plant,
                       const VehicleParams& controller_model,
                       const GainSet& gains, const ReferenceSpec& ref,
                       double t, const ExtendedState& s, double dt,
                       const DisturbanceSpec& dist) {
  double x[kExtendedDim];
  pack_extended(s, x);
  const StepResult r = rk4_step_raw(plant, controller_model, gains, ref,
                                    dist, t, x, dt, 0.02);
  return unpack_extended(r.x.data());
}

SimLog run_closed_loop(const VehicleParams& plant,
                       const VehicleParams& controller_model,
                       const GainSet& gains, const ReferenceSpec& ref,
                       const ExtendedState& init, const DisturbanceSpec& dist,
                       const SimOptions& opt) {
  detail::require_extended(plant);
  detail::require_extended(controller_model);
  if (!(opt.dt > 0.0) || !(opt.t_final > 0.0))
    throw std::invalid_argument("dt and t_final must be positive");

  SimLog log;
  double x[kExtendedDim];
  pack_extended(init, x);
  const long steps = std::lround(opt.t_final / opt.dt);
  log.t.reserve(steps + 1);
  log.state.reserve(steps + 1);

  double t = 0.0;
  for (long k = 0; k < steps; ++k) {
    t = k * opt.dt;
    StepResult r;
    try {
      r = rk4_step_raw(plant, controller_model, gains, ref, dist, t, x,
                       opt.dt, opt.min_margin);
    } catch (const SingularityError&) {
      log.termination = TerminationReason::Singularity;
      log.t_end = t;
      return log;
    }
    log_sample(log, plant, t, x, r.cmd, eval_reference(ref, t));
    std::copy(r.x.begin(), r.x.end(), x);
    if (diverged(opt, x, log.e_pos.back())) {
      log.termination = TerminationReason::Diverged;
      log.t_end = t + opt.dt;
      return log;
    }
  }
  // Trailing sample: state at t_final with the command that would apply.
  t = steps * opt.dt;
  try {
    double dx[kExtendedDim];
    FblCommand cmd;
    closed_loop_deriv(plant, controller_model, gains, ref, dist, t, x,
                      opt.min_margin, dx, &cmd);
    log_sample(log, plant, t, x, cmd, eval_reference(ref, t));
  } catch (const SingularityError&) {
    log.termination = TerminationReason::Singularity;
    log.t_end = t;
    return log;
  }
  log.termination = TerminationReason::Completed;
  log.t_end = t;
  return log;
}

GenState step_rk4_plant(const VehicleParams& p, const GenState& s,
                        const InputVector& u, double dt) {
  s.check(p);
  u.check(p);
  const int n = p.coords();
  auto deriv = [&](const GenState& a, std::vector<double>& dq,
                   std::vector<double>& dqd) {
    const VectorD qdd = forward_dynamics(p, a, u);
    for (int i = 0; i < n; ++i) {
      dq[i] = a.qd[i];
      dqd[i] = qdd[i];
    }
  };
  auto shift = [&](const GenState& a, const std::vector<double>& dq,
                   const std::vector<double>& dqd, double h) {
    GenState b(n);
    for (int i = 0; i < n; ++i) {
      b.q[i] = a.q[i] + h * dq[i];
      b.qd[i] = a.qd[i] + h * dqd[i];
    }
    return b;
  };
  std::vector<double> dq1(n), dqd1(n), dq2(n), dqd2(n), dq3(n), dqd3(n),
      dq4(n), dqd4(n);
  deriv(s, dq1, dqd1);
  deriv(shift(s, dq1, dqd1, 0.5 * dt), dq2, dqd2);
  deriv(shift(s, dq2, dqd2, 0.5 * dt), dq3, dqd3);
  deriv(shift(s, dq3, dqd3, dt), dq4, dqd4);
  GenState out(n);
  for (int i = 0; i < n; ++i) {
    out.q[i] = s.q[i] + dt / 6.0 *
                            (dq1[i] + 2.0 * dq2[i] + 2.0 * dq3[i] + dq4[i]);
    out.qd[i] = s.qd[i] + dt / 6.0 * (dqd1[i] + 2.0 * dqd2[i] +
                                      2.0 * dqd3[i] + dqd4[i]);
  }
  return out;
}

SimLog run_scenario(const VehicleParams& plant,
                    const VehicleParams& controller_model,
                    const ScenarioSpec& spec) {
  const ExtendedState init =
      hover_extended_state(controller_model, spec.start);
  return run_closed_loop(plant, controller_model, spec.gains, spec.reference,
                         init, spec.disturbance, spec.options);
}

Metrics compute_metrics(const SimLog& log, double window_frac) {
  Metrics m;
  const std::size_t n = log.size();
  if (n == 0) return m;
  for (std::size_t i = 0; i < n; ++i) {
    m.e_pos_max = std::max(m.e_pos_max, log.e_pos[i]);
    m.e_phi_max = std::max(m.e_phi_max, log.e_phi[i]);
  }
  std::size_t start = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (1.0 - window_frac)));
  if (start >= n) start = n - 1;
  double sp = 0.0, sf = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    sp += log.e_pos[i];
    sf += log.e_phi[i];
  }
  const double cnt = static_cast<double>(n - start);
  m.e_pos_steady = sp / cnt;
  m.e_phi_steady = sf / cnt;
  return m;
}

double windowed_max_e_pos(const SimLog& log, double t0, double t1) {
  double w = 0.0;
  for (std::size_t i = 0; i < log.size(); ++i)
    if (log.t[i] >= t0 && log.t[i] <= t1)
      w = std::max(w, log.e_pos[i]);
  return w;
}

}  // namespace omav
