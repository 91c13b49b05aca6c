#include <benchmark/benchmark.h>

#include <cmath>

#include "vnslab/asymptotics.hpp"
#include "vnslab/coupling.hpp"
#include "vnslab/io.hpp"
#include "vnslab/transport.hpp"

using namespace vnslab;

namespace {

spectral::FourierField bench_field(int n, std::uint64_t seed) {
  return spectral::random_div_free_field(spectral::GridSpec(2, n), n / 4, 0.2, seed);
}

kinetic::ParticleEnsemble bench_particles(int n, int v_bins) {
  kinetic::InitialDataSpec s;
  s.d = 2;
  s.sigma = 0.2;
  s.v_bins = v_bins;
  return kinetic::build_particles(s, spectral::GridSpec(2, n));
}

void BM_NsStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto u = bench_field(n, 3);
  spectral::FourierField F(u.spec());
  for (auto _ : state) {
    auto next = spectral::ns_step(u, F, 1e-3);
    benchmark::DoNotOptimize(next.raw().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NsStep)->Arg(16)->Arg(32)->Arg(64)->Complexity();

void BM_Deposit(benchmark::State& state) {
  const int n = 32;
  auto p = bench_particles(n, static_cast<int>(state.range(0)));
  spectral::GridSpec grid(2, n);
  for (auto _ : state) {
    auto m = kinetic::deposit(p, grid);
    benchmark::DoNotOptimize(m.rho.values.data());
  }
  state.SetItemsProcessed(state.iterations() * p.size());
}
BENCHMARK(BM_Deposit)->Arg(6)->Arg(10)->Arg(14);

void BM_Push(benchmark::State& state) {
  const int n = 32;
  auto p = bench_particles(n, static_cast<int>(state.range(0)));
  kinetic::GridVelocityField f(bench_field(n, 5));
  for (auto _ : state) {
    auto q = kinetic::push(p, f, 1e-3);
    benchmark::DoNotOptimize(q.v.data());
  }
  state.SetItemsProcessed(state.iterations() * p.size());
}
BENCHMARK(BM_Push)->Arg(6)->Arg(10)->Arg(14);

void BM_CoupledStep(benchmark::State& state) {
  io::RunConfig cfg = io::parse_config("");
  cfg.grid_n = 32;
  cfg.particles_v_bins = static_cast<int>(state.range(0));
  auto s = io::make_initial_state(cfg);
  auto params = cfg.step_params();
  auto mon = cfg.monitor();
  for (auto _ : state) {
    coupling::step(s, params, mon);
    benchmark::DoNotOptimize(s.t);
  }
}
BENCHMARK(BM_CoupledStep)->Arg(8)->Arg(10);

void BM_W1Exact(benchmark::State& state) {
  const int bins = static_cast<int>(state.range(0));
  Rng rng(7);
  ot::Histogram a = ot::Histogram::zeros(
      {ot::Axis{bins, 0, 1, true}, ot::Axis{bins, 0, 1, true}});
  ot::Histogram b = a;
  double ta = 0, tb = 0;
  for (auto& m : a.mass) ta += (m = rng.uniform());
  for (auto& m : b.mass) tb += (m = rng.uniform());
  for (auto& m : a.mass) m /= ta;
  for (auto& m : b.mass) m /= tb;
  for (auto _ : state) {
    double w = ot::w1_exact(a, b);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_W1Exact)->Arg(8)->Arg(16)->Arg(32);

void BM_PicardFixedPoint(benchmark::State& state) {
  auto u = bench_field(16, 9);
  u.set_mean(vec_zero());
  u *= 0.05 / spectral::grad_sup_norm(u);  // keep the kernel contractive
  asymptotic::VelocityHistory h({0.0, 4.0}, {u, u}, vec_zero());
  Vec x = {0.3, 0.7, 0.0}, v = {0.2, -0.1, 0.0};
  for (auto _ : state) {
    auto p = asymptotic::picard_Y_infinity(h, x, v);
    benchmark::DoNotOptimize(p.residual);
  }
}
BENCHMARK(BM_PicardFixedPoint);

}  // namespace

BENCHMARK_MAIN();
