#pragma once

#include <array>
#include <stdexcept>
#include <variant>

#include "omav/analysis.hpp"
#include "omav/dynamics.hpp"

namespace omav {

// Reference pose and its time derivatives up to fourth order per channel.
struct PoseRef {
  std::array<double, 5> x{};
  std::array<double, 5> y{};
  std::array<double, 5> phi{};
};

// Circular position reference at constant angular rate, level orientation.
PoseRef circle_reference(double radius, double cx, double cy, double rate,
                         double t);

// Sinusoidal orientation channel amp*sin(rate*t); returns derivatives 0..4.
std::array<double, 5> sinusoidal_orientation_reference(double amp, double rate,
                                                       double t);

struct RegulatePose {
  double x = 0.0, y = 0.0, phi = 0.0;
};
struct CircleTrack {
  double radius = 1.0;
  double cx = 5.0, cy = 5.0;
  double rate = 0.5;
  bool with_phi = false;
  double phi_amp = 0.0;   // rad
  double phi_rate = 0.0;  // rad/s
};
using ReferenceSpec = std::variant<RegulatePose, CircleTrack>;

PoseRef eval_reference(const ReferenceSpec& ref, double t);
EquilibriumPose reference_pose(const ReferenceSpec& ref, double t);

// Error-dynamics coefficients e'''' + k3 e''' + k2 e'' + k1 e' + k0 e = 0.
using ChannelGains = std::array<double, 4>;  // k0..k3

struct GainSet {
  ChannelGains x{}, y{}, phi{};
};

// Coefficients from closed-loop pole locations; all poles must be strictly
// negative reals.
ChannelGains design_gains(const std::array<double, 4>& poles);
GainSet gain_set_from_poles(const std::array<double, 4>& poles);

// Distance from the linearizability region boundary: min of the normalized
// second thrust channel and the normalized distance of phi from odd
// multiples of pi/2.
double singularity_margin(const VehicleParams& p, const ExtendedState& s);

struct SingularityError : std::runtime_error {
  explicit SingularityError(const std::string& what)
      : std::runtime_error(what) {}
};

// Model-based pose output derivatives of orders 0..3.
struct OutputDerivatives {
  std::array<std::array<double, 4>, 3> y{};  // [channel][order]
};
OutputDerivatives output_derivatives(const VehicleParams& p,
                                     const ExtendedState& s);

struct FblCommand {
  double v1 = 0.0, v2 = 0.0;  // thrust-channel jerk-rate inputs
  double moment = 0.0;        // physical moment channel
  InputVector u;              // physical inputs applied to the plant
  std::array<double, 3> y4_cmd{};
  double margin = 0.0;
};

// Exact linearization with pole-placement feedback on the pose outputs.
FblCommand fbl_control(const VehicleParams& p, const GainSet& gains,
                       const ExtendedState& s, const PoseRef& ref,
                       double min_margin = 0.02);

}  // namespace omav
