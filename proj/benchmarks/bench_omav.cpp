#include <benchmark/benchmark.h>

#include "omav/analysis.hpp"
#include "omav/oracle.hpp"
#include "omav/scenario.hpp"

using namespace omav;

namespace {

const VehicleParams& vehicle() {
  static const VehicleParams p = VehicleParams::preset("main-paper");
  return p;
}

GenState sample_state() {
  GenState s(5);
  s.q = {1.0, 2.0, 0.4, -0.3, 0.2};
  s.qd = {0.3, -0.2, 0.1, 0.5, -0.4};
  return s;
}

}  // namespace

static void BM_mass_matrix(benchmark::State& state) {
  const VehicleParams& p = vehicle();
  const GenState s = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(mass_matrix(p, s.q));
}
BENCHMARK(BM_mass_matrix);

static void BM_oracle_mass_matrix(benchmark::State& state) {
  const VehicleParams& p = vehicle();
  const GenState s = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(oracle_mass_matrix(p, s.q));
}
BENCHMARK(BM_oracle_mass_matrix);

static void BM_forward_dynamics(benchmark::State& state) {
  const VehicleParams& p = vehicle();
  const GenState s = sample_state();
  InputVector u(p);
  u.values = {48.0, 50.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(forward_dynamics(p, s, u));
}
BENCHMARK(BM_forward_dynamics);

static void BM_extended_decoupling(benchmark::State& state) {
  const VehicleParams& p = vehicle();
  const ExtendedState s = hover_extended_state(p, {1.0, 2.0, 0.4});
  for (auto _ : state) benchmark::DoNotOptimize(extended_decoupling(p, s));
}
BENCHMARK(BM_extended_decoupling);

static void BM_fbl_control(benchmark::State& state) {
  const ScenarioConfig cfg = default_config();
  const ExtendedState s =
      hover_extended_state(cfg.params, cfg.scenario.start);
  const PoseRef ref = eval_reference(cfg.scenario.reference, 0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        fbl_control(cfg.params, cfg.scenario.gains, s, ref));
}
BENCHMARK(BM_fbl_control);

static void BM_closed_loop_step(benchmark::State& state) {
  const ScenarioConfig cfg = default_config();
  const ExtendedState s =
      hover_extended_state(cfg.params, cfg.scenario.start);
  for (auto _ : state)
    benchmark::DoNotOptimize(step_rk4(cfg.params, cfg.params,
                                      cfg.scenario.gains,
                                      cfg.scenario.reference, 0.0, s, 1e-3,
                                      cfg.scenario.disturbance));
}
BENCHMARK(BM_closed_loop_step);

static void BM_regulation_second(benchmark::State& state) {
  ScenarioConfig cfg = default_config();
  cfg.scenario.options.t_final = 1.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        run_scenario(cfg.params, cfg.params, cfg.scenario));
}
BENCHMARK(BM_regulation_second)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
