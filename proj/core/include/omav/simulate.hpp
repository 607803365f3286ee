#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "omav/control.hpp"

namespace omav {

// Additive pose-acceleration disturbance A*sin(omega*t + phase) applied
// identically to all three pose channels.
struct DisturbanceSpec {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  double value(double t) const;
};

enum class TerminationReason { Completed, Singularity, Diverged };

const char* termination_name(TerminationReason t);

struct SimOptions {
  double dt = 1e-3;
  double t_final = 8.0;
  double min_margin = 0.02;
  // Divergence cutoffs: any extended-state component or the position error.
  double state_limit = 1e6;
  double error_limit = 1e3;
};

struct SimLog {
  std::vector<double> t;
  std::vector<std::array<double, kExtendedDim>> state;
  std::vector<std::array<double, 3>> input;  // (f1, lift, moment)
  std::vector<double> e_pos;                 // position error norm
  std::vector<double> e_phi;                 // |orientation error|
  std::vector<std::uint8_t> input_feasible;
  TerminationReason termination = TerminationReason::Completed;
  double t_end = 0.0;

  std::size_t size() const { return t.size(); }
};

// One classical fourth-order step of the closed loop; the controller is
// evaluated at every stage with its own model parameters.
ExtendedState step_rk4(const VehicleParams& plant,
                       const VehicleParams& controller_model,
                       const GainSet& gains, const ReferenceSpec& ref,
                       double t, const ExtendedState& s, double dt,
                       const DisturbanceSpec& dist);

SimLog run_closed_loop(const VehicleParams& plant,
                       const VehicleParams& controller_model,
                       const GainSet& gains, const ReferenceSpec& ref,
                       const ExtendedState& init, const DisturbanceSpec& dist,
                       const SimOptions& opt);

// Open-loop plant step with fixed inputs; no compensator, no disturbance.
GenState step_rk4_plant(const VehicleParams& p, const GenState& s,
                        const InputVector& u, double dt);

// A complete closed-loop experiment: what to track, from where, under what
// gains and disturbance.
struct ScenarioSpec {
  ReferenceSpec reference;
  GainSet gains;
  DisturbanceSpec disturbance;
  SimOptions options;
  EquilibriumPose start;
};

// Hover-initialized closed-loop run; the compensator starts from the
// controller model's hover thrusts.
SimLog run_scenario(const VehicleParams& plant,
                    const VehicleParams& controller_model,
                    const ScenarioSpec& spec);

struct Metrics {
  double e_pos_max = 0.0;
  double e_phi_max = 0.0;
  double e_pos_steady = 0.0;  // mean over the trailing window
  double e_phi_steady = 0.0;
};

// Steady-state means are taken over the trailing window_frac of the log.
Metrics compute_metrics(const SimLog& log, double window_frac = 0.2);

// Max position error over samples with t in [t0, t1].
double windowed_max_e_pos(const SimLog& log, double t0, double t1);

}  // namespace omav
