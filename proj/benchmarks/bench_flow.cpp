#include <benchmark/benchmark.h>

#include "epsflow/dynamics.hpp"
#include "epsflow/geometry.hpp"
#include "epsflow/harnack.hpp"
#include "epsflow/pathopt.hpp"
#include "epsflow/scenario.hpp"

namespace {

using namespace epsflow;

ScenarioConfig wavy_config(int n_theta) {
  ScenarioConfig cfg;
  cfg.epsilon = 0.25;
  cfg.c0 = 0.5;
  cfg.n_theta = n_theta;
  cfg.t_end = 0.05;
  cfg.u0_coeffs = {0.0, 0.12, 0.06};
  cfg.logS0_coeffs = {-0.1, 0.25};
  cfg.h0_coeffs = {0.4, 0.12};
  return cfg;
}

FlowState wavy_state(int n_theta) { return initial_state(wavy_config(n_theta)); }

const Trajectory& cached_trajectory() {
  static const Trajectory traj = evolve(wavy_state(128), 0.25,
                                        step_control(wavy_config(128)), 0.05);
  return traj;
}

void BM_rhs(benchmark::State& state) {
  const ScenarioConfig cfg = wavy_config(int(state.range(0)));
  const FlowState st = initial_state(cfg);
  const StepControl ctl = step_control(cfg);
  for (auto _ : state)
    benchmark::DoNotOptimize(rhs(st, cfg.epsilon, ctl));
}
BENCHMARK(BM_rhs)->Arg(64)->Arg(128)->Arg(256);

void BM_step_rk4(benchmark::State& state) {
  const ScenarioConfig cfg = wavy_config(int(state.range(0)));
  const FlowState st = initial_state(cfg);
  const StepControl ctl = step_control(cfg);
  const double dt = select_dt(st, ctl);
  for (auto _ : state)
    benchmark::DoNotOptimize(step_rk4(st, dt, cfg.epsilon, ctl));
}
BENCHMARK(BM_step_rk4)->Arg(64)->Arg(128)->Arg(256);

void BM_margins(benchmark::State& state) {
  FlowState st = wavy_state(int(state.range(0)));
  st.t = 0.01; // margins need t > 0 for the 1/t terms
  for (auto _ : state)
    benchmark::DoNotOptimize(margins(st, 0.25, 0.5));
}
BENCHMARK(BM_margins)->Arg(64)->Arg(128)->Arg(256);

void BM_scalar_curvature(benchmark::State& state) {
  const FlowState st = wavy_state(int(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(scalar_curvature(st.metric));
}
BENCHMARK(BM_scalar_curvature)->Arg(64)->Arg(128)->Arg(256);

void BM_gamma_dp(benchmark::State& state) {
  const Trajectory& traj = cached_trajectory();
  const PathQuery query{0.6, 2.2, 0.01, 0.04};
  const int window = int(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(gamma_dp(query, traj, window));
}
BENCHMARK(BM_gamma_dp)->Arg(2)->Arg(4)->Arg(8);

void BM_evolve(benchmark::State& state) {
  const ScenarioConfig cfg = wavy_config(int(state.range(0)));
  const FlowState st = initial_state(cfg);
  const StepControl ctl = step_control(cfg);
  for (auto _ : state)
    benchmark::DoNotOptimize(evolve(st, cfg.epsilon, ctl, 0.01));
}
BENCHMARK(BM_evolve)->Arg(64)->Arg(128);

} // namespace

BENCHMARK_MAIN();
