#include <benchmark/benchmark.h>

#include <random>

#include "coprotector/corpus.h"
#include "coprotector/defense.h"
#include "coprotector/stats.h"
#include "coprotector/untargeted.h"

namespace {

constexpr char kFunction[] = R"(public int add(String item, int count) {
    if (count <= 0) {
      throw new IllegalArgumentException("count must be positive: " + count);
    }
    int current = stock.getOrDefault(item, 0);
    stock.put(item, current + count);
    log.add("add " + item);
    version++;
    return current + count;
  })";

void BM_ParseFunction(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(coprotector::ParseFunction(kFunction, "java"));
  }
}
BENCHMARK(BM_ParseFunction);

void BM_CodeRenaming(benchmark::State& state) {
  const coprotector::SyntaxTree tree = coprotector::ParseFunction(kFunction, "java");
  coprotector::Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coprotector::CodeRenaming(tree, rng));
  }
}
BENCHMARK(BM_CodeRenaming);

void BM_WelchTTest(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::vector<int> g(state.range(0)), gp(state.range(0));
  for (int& x : g) x = gen() % 2;
  for (int& x : gp) x = gen() % 3 != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(coprotector::WelchTTest(g, gp));
  }
}
BENCHMARK(BM_WelchTTest)->Arg(10)->Arg(250)->Arg(5000);

void BM_SpectralSignature(benchmark::State& state) {
  const auto n = state.range(0);
  coprotector::RepresentationSet reps;
  reps.vectors = Eigen::MatrixXd::Random(n, 64);
  for (int64_t i = 0; i < n; ++i) reps.ids.push_back(std::to_string(i));
  for (auto _ : state) {
    benchmark::DoNotOptimize(coprotector::SpectralSignature(reps, 0.05));
  }
}
BENCHMARK(BM_SpectralSignature)->Arg(1000)->Arg(10000);

void BM_ActivationClustering(benchmark::State& state) {
  coprotector::RepresentationSet reps;
  reps.vectors = Eigen::MatrixXd::Random(state.range(0), 64);
  for (int64_t i = 0; i < state.range(0); ++i) reps.ids.push_back(std::to_string(i));
  for (auto _ : state) {
    benchmark::DoNotOptimize(coprotector::ActivationClustering(reps, 1));
  }
}
BENCHMARK(BM_ActivationClustering)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
