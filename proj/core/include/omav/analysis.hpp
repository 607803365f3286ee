#pragma once

#include <array>

#include "omav/dynamics.hpp"

namespace omav {

// ---- wrench and decoupling -----------------------------------------------

// d(wrench)/d(inputs): first three rows of the input force map, 3 x n_u.
MatrixD wrench_jacobian(const VehicleParams& p, const std::vector<double>& q);

// Full input force map dQ/du, coords x n_u (Q is linear in u).
MatrixD input_map_jacobian(const VehicleParams& p,
                           const std::vector<double>& q);

// Numerical rank with a relative singular-value threshold.
int matrix_rank(const MatrixD& m, double rel_tol = 1e-9);

// Pose rows of M^-1 dQ/du, 3 x n_u.
MatrixD decoupling_matrix(const VehicleParams& p, const GenState& s);

// Hover-consistent extended state over a pose: equilibrium configuration,
// compensator charged with the hover thrusts.
ExtendedState hover_extended_state(const VehicleParams& p,
                                   const EquilibriumPose& pose);

// Fourth-derivative relation of the pose outputs for the dynamically
// extended Type2/N=2 system: y'''' = b + A (v1, v2, w).
struct ExtendedDecoupling {
  std::array<std::array<double, 3>, 3> A{};
  std::array<double, 3> b{};
  double det = 0.0;
  double cond = 0.0;  // spectral condition number of A
};
ExtendedDecoupling extended_decoupling(const VehicleParams& p,
                                       const ExtendedState& s);

// ---- omnidirectionality --------------------------------------------------

enum class OmniClass {
  NotOmnidirectional,
  PartiallyOmnidirectional,
  FullyOmnidirectional,
};

struct OmniOptions {
  int direction_grid = 64;  // at least 8
  // Per-rotor thrust cap as a multiple of the standard-gravity hover share;
  // bounds the lift-feasibility test.
  double thrust_to_weight_max = 4.0;
};

struct OmniReport {
  OmniClass classification = OmniClass::NotOmnidirectional;
  int wrench_rank = 0;        // static wrench Jacobian rank at the query state
  bool moment_authority = false;
  bool full_actuation = false;  // tilt-mediated task-space actuation
  double worst_lift_margin = 0.0;  // min over directions, relative to weight
  int feasible_directions = 0;
  int grid = 0;
};

OmniReport omni_classify(const VehicleParams& p, const GenState& s,
                         const OmniOptions& opt = {});

// ---- zero dynamics -------------------------------------------------------

struct ZeroDynState {
  double angle = 0.0;  // first passive joint angle
  double rate = 0.0;
};

// Literature shorthand form of the internal dynamics under no friction and
// on-joint link CoM: d(rate)/dt = l * (cos(angle) - cos(phi_d)).
ZeroDynState simplified_zero_dynamics_rhs(double l, double phi_d,
                                          const ZeroDynState& z);

struct ZeroDynEval {
  ZeroDynState rhs;            // (rate, joint angular acceleration)
  ExtendedState manifold_state;  // solved output-pinned extended state
  int newton_iterations = 0;
  double residual = 0.0;
};

// Internal dynamics of the output-pinned closed loop: solves for the
// extended-state components consistent with pose == pose_d and vanishing
// first..third pose derivatives at the given internal state, then returns
// the joint acceleration from forward dynamics. Type2, N=2. The Newton
// solve starts from the hover fiber; far from the equilibrium, pass a
// nearby solution as warm_start to stay inside the basin.
ZeroDynEval zero_dynamics_general_rhs(const VehicleParams& p,
                                      const EquilibriumPose& pose_d,
                                      const ZeroDynState& z,
                                      const ExtendedState* warm_start = nullptr);

// Least-squares fit of l against the regressor cos(angle) - cos(phi_d),
// sampled from the general internal dynamics at zero joint rate.
double fit_simplified_l(const VehicleParams& p, double phi_d,
                        double half_width = 0.5, int samples = 21);

struct NewtonError : std::runtime_error {
  explicit NewtonError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace omav
