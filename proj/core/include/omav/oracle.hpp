#pragma once

#include <array>

#include "omav/dynamics.hpp"

// Differentiation-based reference route for the equations of motion. Builds
// body positions from the kinematic layout only and derives every dynamic
// term by exact forward-mode differentiation of the energies and force maps;
// no closed-form matrix entry is reused. Slow by design.

namespace omav {

// Body index 0 is the platform; 1..N are the links.
std::array<double, 2> body_position(const VehicleParams& p, int body,
                                    const std::vector<double>& q);
double body_angle(const VehicleParams& p, int body,
                  const std::vector<double>& q);

// d(position)/dq as a 2 x coords matrix.
SMat<double> body_position_jacobian(const VehicleParams& p, int body,
                                    const std::vector<double>& q);

double oracle_kinetic_energy(const VehicleParams& p, const GenState& s);
double oracle_potential_energy(const VehicleParams& p,
                               const std::vector<double>& q);

// Hessian of the kinetic energy in the rates (servo option mirrors the
// unit-inertia placeholder row of the closed form).
MatrixD oracle_mass_matrix(const VehicleParams& p,
                           const std::vector<double>& q);

// h + g from the Euler-Lagrange terms that do not multiply accelerations.
VectorD oracle_bias(const VehicleParams& p, const GenState& s);

// Input forces mapped through exact application-point Jacobians. The
// propellers are modeled at a nonzero height above the joints, which the
// closed form never uses; agreement shows the force resultants match.
VectorD oracle_generalized_forces(const VehicleParams& p, const GenState& s,
                                  const InputVector& u);

// Acceleration of the total CoM given plant accelerations.
std::array<double, 2> oracle_com_acceleration(const VehicleParams& p,
                                              const GenState& s,
                                              const VectorD& qdd);

}  // namespace omav
