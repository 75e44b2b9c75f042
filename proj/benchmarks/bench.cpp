#include "malin/estimates.hpp"
#include "malin/geometry.hpp"
#include "malin/mesh.hpp"
#include "malin/solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace malin;

namespace {

Polytope disk(int vertices) {
  std::vector<Vector> pts;
  for (int i = 0; i < vertices; ++i) {
    const double th = 2.0 * std::numbers::pi * i / vertices;
    pts.push_back(vec2(std::cos(th), std::sin(th)));
  }
  return Polytope(2, pts, Provenance::Transformed, Vector::Zero(2));
}

void BM_Triangulate(benchmark::State& state) {
  const auto body = std::make_shared<const Polytope>(disk(256));
  const double target = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    Mesh m = triangulate(body, target);
    benchmark::DoNotOptimize(m.node_count());
  }
}
BENCHMARK(BM_Triangulate)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  const auto p = PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share();
  ProblemData data(p);
  data.drift_b = [](const Vector&) { return vec2(0.3, 0.0); };
  data.boundary_g = RandomBoundaryData(2, 1, Vector::Zero(2)).field();
  SectionMeshOptions opt;
  opt.relative_size = 1.0 / static_cast<double>(state.range(0));
  const MeshPtr mesh = mesh_section({p, Vector::Zero(2), 0.5}, opt);
  SolveOptions so;
  so.estimate_condition = false;
  for (auto _ : state) {
    SolveResult r = solve_dirichlet(mesh, data, so);
    benchmark::DoNotOptimize(r.residual);
  }
  state.counters["nodes"] = static_cast<double>(mesh->node_count());
}
BENCHMARK(BM_Solve)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_JohnNormalize(benchmark::State& state) {
  const auto p = PotentialSpec::perturbed(2, 0.1, vec2(1.3, 0.7)).share();
  const Polytope body = extract_section({p, Vector::Zero(2), 0.25}, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    NormalizedBody nb = john_normalize(body);
    benchmark::DoNotOptimize(nb.map.determinant());
  }
}
BENCHMARK(BM_JohnNormalize)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
