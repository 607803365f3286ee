#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "omav/simulate.hpp"

namespace omav {

// ---- perturbations -------------------------------------------------------

// The seven physical parameters subjected to plant-side mismatch. The
// controller model always keeps the nominal values.
enum class PerturbedParam {
  JointArm,         // a
  ComOffset,        // c: every nonzero link CoM offset
  LinkMass,         // m_p
  PlatformMass,     // m_b
  JointFriction,    // b_f, all passive joints
  LinkInertia,      // I_p
  PlatformInertia,  // I_b
};
inline constexpr int kPerturbationDim = 7;

const char* param_name(PerturbedParam p);

// Relative sizes: perturbed value = (1 + delta) * nominal.
struct Perturbation {
  std::array<double, kPerturbationDim> delta{};
};

struct PerturbedParams {
  VehicleParams params;
  bool inertia_clamped = false;
};

// Builds the plant-side parameter set. Inertias driven to or past zero are
// clamped to 1% of nominal and flagged; nonphysical masses, arms or
// frictions throw std::invalid_argument.
PerturbedParams apply_perturbation(const VehicleParams& nominal,
                                   const Perturbation& d);

struct PerturbationBox {
  // Per-parameter [lo, hi] relative bounds, indexed like PerturbedParam.
  std::array<std::pair<double, double>, kPerturbationDim> range{};
};

// Box spanned by the individually safe ranges of the report-nominal
// vehicle; the default sampling region for combined searches.
PerturbationBox default_search_box();

// ---- deterministic sampling ----------------------------------------------

// Counter-based stream: the value depends only on (seed, sample, dim), so
// parallel evaluation order cannot change the draws.
double uniform01(std::uint64_t seed, std::uint64_t sample, std::uint64_t dim);

// Sample `index` of the search plan: the first 2 * kPerturbationDim samples
// probe each single-parameter extreme; the rest are uniform over the box.
Perturbation plan_sample(const PerturbationBox& box, std::uint64_t seed,
                         int index);

// Static-partition parallel loop; fn(i) must not throw.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// ---- searches ------------------------------------------------------------

struct SampleOutcome {
  Perturbation delta;
  bool valid = true;            // parameters passed validation
  bool inertia_clamped = false;
  TerminationReason termination = TerminationReason::Completed;
  Metrics metrics;

  bool ok() const {
    return valid && termination == TerminationReason::Completed;
  }
};

struct WorstCaseReport {
  std::uint64_t seed = 0;
  int samples = 0;
  int workers = 1;
  std::vector<SampleOutcome> outcomes;
  int worst_pos_index = -1;  // argmax of e_pos_max over ok() samples
  int worst_phi_index = -1;
  int failures = 0;  // non-Completed terminations
  int invalid = 0;
  double e_pos_bound = 0.0;  // max over ok() samples
  double e_phi_bound = 0.0;
};

// Evaluates an explicit list of perturbations (deterministic, index order).
WorstCaseReport worst_case_over(const VehicleParams& nominal,
                                const ScenarioSpec& scenario,
                                const std::vector<Perturbation>& list,
                                int workers = 1);

// Sampled search over the box: forced single-parameter extremes first, then
// uniform draws.
WorstCaseReport worst_case_search(const VehicleParams& nominal,
                                  const ScenarioSpec& scenario,
                                  const PerturbationBox& box, int samples,
                                  std::uint64_t seed, int workers = 1);

// ---- boundary searches ---------------------------------------------------

struct BracketResult {
  double ok = 0.0;    // largest magnitude that passed
  double fail = 0.0;  // smallest magnitude that failed (0 if censored)
  bool censored = false;
  int evals = 0;
};

// Doubling bracket from `start` up to `cap`, then bisection until the
// bracket width falls below rel_resolution * max(1, |fail|). `fails` must
// be monotone in magnitude for the result to be meaningful.
BracketResult bracket_and_bisect(const std::function<bool(double)>& fails,
                                 double start, double growth, double cap,
                                 double rel_resolution);

struct RangeSearchOptions {
  double start = 0.01;
  double growth = 2.0;
  double cap = 9.0;  // |delta| ceiling, i.e. +/-900%
  double rel_resolution = 1e-3;
};

struct ParamRange {
  double lo = 0.0, hi = 0.0;  // last passing deltas
  bool lo_censored = false, hi_censored = false;
  int evals = 0;
};

// Largest single-parameter mismatch interval around 0 within which the
// scenario completes; direction-wise doubling plus bisection.
ParamRange param_range_search(const VehicleParams& nominal,
                              const ScenarioSpec& scenario,
                              PerturbedParam param,
                              const RangeSearchOptions& opt = {});

struct ToleranceEntry {
  double omega = 0.0;
  double amplitude = 0.0;  // largest passing amplitude
  bool censored = false;
  int evals = 0;
  double e_pos_steady = 0.0;  // at the passing amplitude
};

struct ToleranceOptions {
  double start = 0.25;
  double growth = 2.0;
  double cap = 1024.0;
  double rel_resolution = 1e-2;
};

// Largest pose-acceleration disturbance amplitude the loop survives, per
// frequency; the scenario's own disturbance field is overridden. Probes use
// phase pi/2 (A*cos(omega t)) so the omega = 0 row is a constant bias.
std::vector<ToleranceEntry> disturbance_tolerance(
    const VehicleParams& nominal, const ScenarioSpec& scenario,
    const std::vector<double>& omegas, const ToleranceOptions& opt = {},
    int workers = 1);

// ---- reports -------------------------------------------------------------

// Deterministic JSON (sorted keys, %.17g numbers). `context` carries
// caller-provided metadata such as the scenario hash.
std::string worst_case_report_json(
    const WorstCaseReport& report,
    const std::vector<std::pair<std::string, std::string>>& context = {});

std::string param_range_report_json(
    const std::vector<std::pair<PerturbedParam, ParamRange>>& ranges,
    const std::vector<std::pair<std::string, std::string>>& context = {});

std::string disturbance_report_json(
    const std::vector<ToleranceEntry>& entries,
    const std::vector<std::pair<std::string, std::string>>& context = {});

}  // namespace omav
