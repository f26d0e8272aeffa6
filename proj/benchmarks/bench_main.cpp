#include "arrivallab/concavity_verifier.hpp"
#include "arrivallab/periodic.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <numbers>

using namespace arrivallab;

namespace {

std::vector<double> smooth_samples(std::size_t n) {
  std::vector<double> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = std::exp(std::sin(2 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n)));
  return f;
}

void BM_SpectralSecondDerivative(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PeriodicDifferentiator d(n, DiffScheme::spectral);
  const auto f = smooth_samples(n);
  for (auto _ : state) benchmark::DoNotOptimize(d.second(f));
}
BENCHMARK(BM_SpectralSecondDerivative)->Arg(64)->Arg(256)->Arg(1024);

void BM_FlowStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto speed = make_speed("kappa", 1, 1);
  const auto s0 = make_snapshot(SupportCurve::ellipse(n, 2.0, 1.0), 0.0, speed);
  const double dt = stable_time_step(s0.curve, speed);
  for (auto _ : state) benchmark::DoNotOptimize(step(s0, dt, speed));
}
BENCHMARK(BM_FlowStep)->Arg(128)->Arg(256);

const FlowTrajectory& circle_trajectory() {
  static const FlowTrajectory traj = run(SupportCurve::circle(128, 1.0), make_speed("kappa", 1, 1), 0.0);
  return traj;
}

void BM_Reconstruct(benchmark::State& state) {
  GridSpec spec;
  spec.dx = 1.0 / static_cast<double>(state.range(0));
  const auto& traj = circle_trajectory();
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(traj, spec));
  state.SetLabel("circle MCF");
}
BENCHMARK(BM_Reconstruct)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_KorevaarSearch(benchmark::State& state) {
  GridSpec spec;
  spec.dx = 1.0 / 64.0;
  const auto field = std::make_shared<const ArrivalField>(reconstruct(circle_trajectory(), spec));
  const auto w = make_transformed(field, TransformKind::sqrt_power);
  ZSearchOptions opts;
  opts.triples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(korevaar_z_search(w, opts, 1e-4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KorevaarSearch)->Arg(10'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
