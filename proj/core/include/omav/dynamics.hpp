#pragma once

#include "omav/linalg.hpp"
#include "omav/params.hpp"
#include "omav/state.hpp"

// Double-precision front end of the closed-form dynamics
// M(q) qdd + h(q, qd) + g(q) = Q(q, qd, u).

namespace omav {

using MatrixD = SMat<double>;
using VectorD = SVec<double>;

struct Energy {
  double kinetic = 0.0;
  double potential = 0.0;
  double total() const { return kinetic + potential; }
};

MatrixD mass_matrix(const VehicleParams& p, const std::vector<double>& q);

// Velocity-product forces h; exactly quadratic in qd.
VectorD bias_forces(const VehicleParams& p, const std::vector<double>& q,
                    const std::vector<double>& qd);

VectorD gravity_forces(const VehicleParams& p, const std::vector<double>& q);

VectorD generalized_forces(const VehicleParams& p, const GenState& s,
                           const InputVector& u);

// Accelerations; d_ext (optional, size 3) is added to the pose rows.
VectorD forward_dynamics(const VehicleParams& p, const GenState& s,
                         const InputVector& u,
                         const std::array<double, 3>& d_ext = {0.0, 0.0, 0.0});

// Hover inputs: lift channel i carries gravity*(m_b/N + link_mass(i)) so the
// shares also balance the platform moment when link masses differ; moment
// channel zero. Uniform masses reduce this to gravity*m_tot/N per channel.
InputVector equilibrium_input(const VehicleParams& p);

// Equilibrium configuration over a pose: all links vertical, at rest.
GenState equilibrium_state(const VehicleParams& p, const EquilibriumPose& pose);

bool is_equilibrium_state(const VehicleParams& p, const GenState& s,
                          double tol = 1e-9);

// g(q_eq) - Q(q_eq, 0, u_eq); identically zero at true equilibria.
VectorD static_balance_residual(const VehicleParams& p,
                                const EquilibriumPose& pose);

Energy total_energy(const VehicleParams& p, const GenState& s);

}  // namespace omav
