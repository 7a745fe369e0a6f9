#include <benchmark/benchmark.h>

#include <glass/dag.hpp>
#include <glass/random.hpp>

namespace {

using namespace glass;

void BM_BuildDag(benchmark::State& state) {
  SeededRandom rng(10);
  auto data = rng.bytes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dag::build_dag(data, 16384));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildDag)->Arg(1 << 16)->Arg(1 << 22);

void BM_Reassemble(benchmark::State& state) {
  SeededRandom rng(11);
  auto data = rng.bytes(static_cast<std::size_t>(state.range(0)));
  auto d = dag::build_dag(data, 16384);
  dag::BlockLookup lookup = [&](const ContentId& cid) -> std::optional<Bytes> {
    if (const auto* b = d.blocks.find(cid)) return *b;
    return std::nullopt;
  };
  for (auto _ : state) benchmark::DoNotOptimize(dag::reassemble(d.root, lookup));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Reassemble)->Arg(1 << 16)->Arg(1 << 22);

}  // namespace
