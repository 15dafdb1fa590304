#include <benchmark/benchmark.h>

#include "lifeserver/vdp/distribute.hpp"

using namespace lifeserver::vdp;

namespace {

VdpNode wide_tree(int depth, int fanout, int& leaf) {
  if (depth == 0) return Payee{{"bitcoin", "a" + std::to_string(leaf++)}};
  Split s;
  for (int i = 0; i < fanout; ++i) {
    s.children.push_back({"c" + std::to_string(i), static_cast<std::uint64_t>(i * 37 % 1000 + 1),
                          wide_tree(depth - 1, fanout, leaf)});
  }
  return s;
}

void BM_Distribute(benchmark::State& state) {
  int leaf = 0;
  const VdpDocument doc{1, std::nullopt, wide_tree(static_cast<int>(state.range(0)), 6, leaf)};
  for (auto _ : state) benchmark::DoNotOptimize(distribute(doc, 999'999'999'989ull));
  state.counters["leaves"] = leaf;
}
BENCHMARK(BM_Distribute)->DenseRange(1, 5);

}  // namespace
