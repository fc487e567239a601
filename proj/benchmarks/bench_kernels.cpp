#include <benchmark/benchmark.h>

#include "fibersolve/bspline.hpp"
#include "fibersolve/materials.hpp"
#include "fibersolve/solver.hpp"

using namespace fibersolve;

namespace {

void BM_EvalBasis(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const KnotVector kv = open_knot_vector(p, 20, 0.0, 1.0);
  double xi = 0.0;
  for (auto _ : state) {
    xi += 0.01234;
    if (xi >= 1.0) xi -= 1.0;
    benchmark::DoNotOptimize(eval_basis(kv, xi, 2));
  }
}
BENCHMARK(BM_EvalBasis)->Arg(2)->Arg(4);

void BM_StressAndTangent(benchmark::State& state) {
  const MaterialModel models[] = {MaterialModel::svk(10.0, 0.3), MaterialModel::mooney_rivlin_polyconvex(1.0, 1.0, 5.0),
                                  MaterialModel::mooney_rivlin_invariant(2.0, 1.0)};
  const MaterialModel& m = models[state.range(0)];
  Mat3 F;
  F << 1.05, 0.02, -0.01, 0.03, 0.98, 0.04, -0.02, 0.01, 1.02;
  Mat3 P;
  Tensor4 A;
  for (auto _ : state) {
    stress_and_tangent(m, F, P, A);
    benchmark::DoNotOptimize(A);
  }
  state.SetLabel(material_name(m.kind));
}
BENCHMARK(BM_StressAndTangent)->DenseRange(0, 2);

CaseConfig bench_case(int nx) {
  CaseConfig c = presets::bending();
  c.matrix.elements = {nx, nx / 5, nx / 5};
  c.fibers[0].elements = nx;
  return c;
}

void BM_Assemble(benchmark::State& state) {
  const Model m(bench_case(static_cast<int>(state.range(0))));
  const VecX x = m.reference_state();
  for (auto _ : state) benchmark::DoNotOptimize(m.assemble(x, 1.0, true));
  state.counters["dofs"] = m.dofs().size();
}
BENCHMARK(BM_Assemble)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_NewtonUpdate(benchmark::State& state) {
  const Model m(bench_case(static_cast<int>(state.range(0))));
  VecX x = m.reference_state();
  m.apply_boundary_values(x, 1.0);
  const ReducedSystem r = apply_dirichlet(m.assemble(x, 1.0, true), m);
  for (auto _ : state) benchmark::DoNotOptimize(newton_update(r, true));
  state.counters["free dofs"] = r.R.size();
}
BENCHMARK(BM_NewtonUpdate)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
