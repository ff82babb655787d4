#include <benchmark/benchmark.h>

#include <algorithm>

#include "latgrow/egs.hpp"
#include "latgrow/interactions.hpp"
#include "latgrow/potential.hpp"
#include "latgrow/walker.hpp"

using namespace latgrow;

static void BM_RngBelow(benchmark::State& state) {
  RngStream rng = RngStream::derive(1, 0, "bench");
  uint64_t acc = 0;
  for (auto _ : state) acc += rng.below(6);
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_RngBelow);

static void BM_PlainSrwStep(benchmark::State& state) {
  PlainSrwModel model(3);
  RngBundle rng = RngBundle::derive(2, 0);
  for (auto _ : state) model.advance(rng);
  benchmark::DoNotOptimize(model.position());
}
BENCHMARK(BM_PlainSrwStep);

static void BM_ObtStep(benchmark::State& state) {
  ObtModel model(ball(Site(), 1, Metric::Graph, 2), ObtParams{}, 2);
  RngBundle rng = RngBundle::derive(3, 0);
  for (auto _ : state) model.advance(rng);
  benchmark::DoNotOptimize(model.position());
}
BENCHMARK(BM_ObtStep);

static void BM_EgsStep(benchmark::State& state) {
  Schedule sched;
  sched.alpha = 2.0;
  EgsModel model(3, 1.0, sched, Metric::EuclideanProjected);
  RngBundle rng = RngBundle::derive(4, 0);
  for (auto _ : state) model.advance(rng);
  benchmark::DoNotOptimize(model.position());
}
BENCHMARK(BM_EgsStep);

static void BM_AddEdges(benchmark::State& state) {
  for (auto _ : state) {
    GrowingDomain dom(2);
    std::vector<Edge> edges;
    for (int x = 0; x < static_cast<int>(state.range(0)); ++x)
      edges.emplace_back(Site(x, 0), 0);
    dom.add_edges(edges, 0);
    benchmark::DoNotOptimize(dom.edge_count());
  }
}
BENCHMARK(BM_AddEdges)->Arg(64)->Arg(1024);

static void BM_DirichletBall(benchmark::State& state) {
  GrowingDomain dom = ball(Site(), state.range(0), Metric::Graph, 2);
  std::vector<Site> killing(dom.boundary().begin(), dom.boundary().end());
  std::sort(killing.begin(), killing.end());
  DirichletProblem p{&dom, {Site()}, killing, Site(1, 0)};
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_hit_probability(p).residual_inf);
}
BENCHMARK(BM_DirichletBall)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
