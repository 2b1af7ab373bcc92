// Copyright 2026 The perfohom Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against their OpenMP counterparts.
// Arg 0 runs the serial path, arg 1 the parallel one.

#include <benchmark/benchmark.h>

#include <numbers>

#include "perfohom/cell_flow.hpp"
#include "perfohom/cell_problems.hpp"
#include "perfohom/coefficients.hpp"
#include "perfohom/macro_acoustics.hpp"
#include "perfohom/macro_flow.hpp"

using namespace perfohom;

namespace
{

Exec exec_of(const benchmark::State &s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_HelmholtzAssembly(benchmark::State &state)
{
  static const Mesh mesh = generate_waveguide_mesh({}, 0.0025);
  static const MacroFlowField flow = uniform_macro_flow(mesh, 10.0);
  const double omega = 2.0 * std::numbers::pi * 1000.0, theta = 2.0;
  FormSpec spec;
  spec.add(TermKind::grad_grad, 343.0 * 343.0)
      .add(TermKind::mass, -omega * omega)
      .add(TermKind::adv_skew, Complex(0.0, omega * theta))
      .add(TermKind::adv_adv, -3.0);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(assemble_complex(mesh, spec, &flow.flow, exec_of(state)));
  }
  state.counters["cells"] = static_cast<double>(mesh.num_cells());
}

void BM_CellOperatorAssembly(benchmark::State &state)
{
  CellGeometry g;
  g.hole_slope_deg = 30.0;
  static const Mesh mesh = generate_unit_cell_mesh(g, 0.05);
  static const FlowField flow = solve_cell_potential_flow(mesh, 2.5);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(assemble_Aw(mesh, flow, {}, g.xi_area(), exec_of(state)));
  }
  state.counters["cells"] = static_cast<double>(mesh.num_cells());
}

void BM_CoefficientSweep(benchmark::State &state)
{
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(
        sweep_coefficients({0.0, 30.0}, {0.0, 2.5}, CellGeometry{}, 0.2, {}, exec_of(state)));
  }
}

void BM_FrequencySweep(benchmark::State &state)
{
  static const auto mesh = std::make_shared<const Mesh>(generate_waveguide_mesh({}, 0.01));
  HomogenizedCoefficients k;
  k.A = {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
  k.F = 1.0;
  const MacroProblem pb = make_macro_problem(
      mesh, {}, std::vector(analyze_waveguide(*mesh).num_interface_segments(), k), {}, {});
  std::vector<double> omegas;
  for (int i = 1; i <= 8; i++)
  {
    omegas.push_back(2.0 * std::numbers::pi * 250.0 * i);
  }
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(frequency_sweep(pb, omegas, exec_of(state)));
  }
}

}  // namespace

BENCHMARK(BM_HelmholtzAssembly)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CellOperatorAssembly)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoefficientSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FrequencySweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
