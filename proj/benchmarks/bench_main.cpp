#include <benchmark/benchmark.h>

#include "modcas/free_energy.hpp"
#include "modcas/modal.hpp"
#include "modcas/smatrix.hpp"
#include "modcas/zerofreq.hpp"

using namespace modcas;

namespace {

constexpr double kPeriod = 400e-9;

// Doped-silicon strips, 47.8 % filling, 1070 nm deep, on doped silicon.
LayerStack grating()
{
  const double w = 0.478 * kPeriod;
  LayerSpec layer{1070e-9, "vacuum", {{"silicon_pdoped", 0.5 * (kPeriod - w), 0.0, w, kPeriod}}};
  return LayerStack{{kPeriod, kPeriod}, "vacuum", {layer}, "silicon_pdoped"};
}

const TransverseWavevector kBloch(2.1e6, 0.7e6, UnitCell{kPeriod, kPeriod});
constexpr double kXi = 2.47e14; // first Matsubara frequency at 300 K

void BM_ModalSolve(benchmark::State& state)
{
  const int N = static_cast<int>(state.range(0));
  const TruncationOrder ord{N, N};
  const auto mats = MaterialTable::with_presets();
  const auto s = grating();
  const auto W =
    assemble_waveguide_matrix(fourier_blocks(s.layers[0], s.cell, mats, kXi, ord), kBloch, kXi, ord);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_modes(W));
  state.SetLabel("2D = " + std::to_string(2 * ord.dim()));
}
BENCHMARK(BM_ModalSolve)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_StackReflection(benchmark::State& state)
{
  const int N = static_cast<int>(state.range(0));
  const TruncationOrder ord{N, N};
  const auto mats = MaterialTable::with_presets();
  const StackModel model(grating(), mats, kXi, ord);
  const auto ch = all_channels(ord);
  for (auto _ : state)
    benchmark::DoNotOptimize(model.reflection(kBloch, ch, Side::incident));
}
BENCHMARK(BM_StackReflection)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_ZeroFrequencyReflection(benchmark::State& state)
{
  const int N = static_cast<int>(state.range(0));
  const TruncationOrder ord{N, N};
  const auto mats = MaterialTable::with_presets();
  const auto s = grating();
  const LayerStack* p[] = {&s};
  const double floor = default_sigma_floor(p, mats);
  for (auto _ : state)
    benchmark::DoNotOptimize(zero_freq_reflection(s, mats, kBloch, ord, floor, Side::incident, false));
}
BENCHMARK(BM_ZeroFrequencyReflection)->DenseRange(1, 5, 2)->Unit(benchmark::kMillisecond);

// One free-energy value: grating against gold, 8 Matsubara terms, 4×4 nodes.
void BM_FreeEnergyItem(benchmark::State& state)
{
  const int N = static_cast<int>(state.range(0));
  const CasimirSetup setup{grating(), LayerStack{{kPeriod, kPeriod}, "vacuum", {}, "gold_drude"},
                           "vacuum", MaterialTable::with_presets()};
  FreeEnergyOptions o;
  o.matsubara = {300.0, 8};
  o.quadrature.nodes_per_dim = 4;
  o.order = {N, N};
  o.tail_policy = TailPolicy::ignore;
  for (auto _ : state)
    benchmark::DoNotOptimize(free_energy_per_area(setup, 200e-9, o));
}
BENCHMARK(BM_FreeEnergyItem)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
