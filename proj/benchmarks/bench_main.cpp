#include <benchmark/benchmark.h>

#include "polyfsi/fokker_planck.hpp"
#include "polyfsi/solvent.hpp"

using namespace polyfsi;

namespace {

StructureState wavy_state(int n, double a) {
  StructureState s(n);
  for (int j = 0; j < n; ++j) {
    const double y = 2.0 * 3.14159265358979323846 * j / n;
    s.eta[j] = a * std::cos(2.0 * y);
    s.eta_dot[j] = -a * std::sin(2.0 * y);
  }
  return s;
}

void BM_BuildHanzawa(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DiskGrid g(n, 2 * n, 1.0);
  ReferenceDomain dom(1.0, 2 * n, 0.5, 0.15, 2.0);
  const StructureState s = wavy_state(2 * n, 0.05);
  for (auto _ : state) {
    HanzawaMap m = build_hanzawa(dom, g, s);
    benchmark::DoNotOptimize(m.min_jac);
  }
}
BENCHMARK(BM_BuildHanzawa)->Arg(16)->Arg(24)->Arg(32);

void BM_KramersStress(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DiskGrid g(n, 2 * n, 1.0);
  FeneModel m(4.0, 16, 24);
  DistributionState f(g, m, 1.0);
  for (auto _ : state) {
    MatField s = kramers_stress(g, m, f);
    benchmark::DoNotOptimize(s[0]);
  }
}
BENCHMARK(BM_KramersStress)->Arg(16)->Arg(24);

void BM_FpStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DiskGrid g(n, 2 * n, 1.0);
  ReferenceDomain dom(1.0, 2 * n, 0.5, 0.15, 2.0);
  FeneModel m(4.0, 16, 24);
  const StructureState s0(2 * n);
  const HanzawaMap map = build_hanzawa(dom, g, s0);
  DistributionState f(g, m, 1.0);
  f.seed_geometry(g, map);
  VecField w(g);
  std::vector<Vec2> rim(2 * n, Vec2{0.0, 0.0});
  FpSolver solver(g, m);
  FpStepInput in;
  in.state = &f;
  in.w_bar = &w;
  in.w_rim = &rim;
  in.map_t = &map;
  in.map_next = &map;
  in.mode = DragMode::CoRotational;
  in.dt = 1e-3;
  for (auto _ : state) {
    DistributionState out = solver.step(in);
    benchmark::DoNotOptimize(out.f[0]);
  }
}
BENCHMARK(BM_FpStep)->Arg(16)->Arg(24);

void BM_SolventStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DiskGrid g(n, 2 * n, 1.0);
  ReferenceDomain dom(1.0, 2 * n, 0.5, 0.15, 2.0);
  const StructureState s0(2 * n);
  const HanzawaMap map = build_hanzawa(dom, g, s0);
  PhysParams p;
  LinearSolventSolver solver(g, dom, map, 1e-3, p);
  StructureState sp(2 * n);
  FlowState fp(g, 2 * n);
  PerturbationTerms terms;
  terms.h = ScalarField(g);
  terms.h_vec = VecField(g);
  terms.big_h = MatField(g);
  MatField stress(g);
  std::vector<double> gf(2 * n, 0.0);
  for (auto _ : state) {
    auto r = solver.step(sp, fp, terms, stress, gf);
    benchmark::DoNotOptimize(r.flow.p[0]);
  }
}
BENCHMARK(BM_SolventStep)->Arg(16)->Arg(24);

}  // namespace

BENCHMARK_MAIN();
