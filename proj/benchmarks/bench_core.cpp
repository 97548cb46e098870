#include <benchmark/benchmark.h>

#include <random>

#include "sadeepdecs/mlp.hpp"
#include "sadeepdecs/pmc.hpp"
#include "sadeepdecs/simenv.hpp"
#include "sadeepdecs/synthesis.hpp"

using namespace sadeepdecs;

namespace {

const Valuation kFixed{{"p_collider", 0.8}, {"p_occ", 0.25}};
const UncertaintyVector kU(2000.0 / 2290, 290.0 / 2290, 10.0 / 210, 200.0 / 210);

Dtmc reference_chain() {
  Valuation v = kU.as_valuation();
  v["c1"] = 0.2;
  v["c2"] = 0.0;
  return instantiate(reference_model(), reference_valuation(ModelConstants{}, v));
}

// Birth-death chain with n interior states; exercises the linear solver.
Dtmc ladder(std::size_t n) {
  Dtmc c;
  c.states.push_back({"collision", {"collision"}});
  for (std::size_t i = 1; i <= n; ++i) c.states.push_back({"s" + std::to_string(i), {}});
  c.states.push_back({"done", {"done"}});
  c.rows.resize(n + 2);
  c.rows[0] = {{0, 1.0, 0.0}};
  c.rows[n + 1] = {{n + 1, 1.0, 0.0}};
  for (std::size_t i = 1; i <= n; ++i) c.rows[i] = {{i - 1, 0.45, 1.0}, {i + 1, 0.55, 1.0}};
  c.initial = n / 2;
  return c;
}

Dataset random_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset d{Role::Train, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.x = uniform_input(rng);
    s.y = s.x[0] > 0 ? 1 : 0;
    d.samples.push_back(s);
  }
  return d;
}

}  // namespace

static void BM_UntilReference(benchmark::State& state) {
  const Dtmc chain = reference_chain();
  for (auto _ : state) benchmark::DoNotOptimize(until_probability(chain, "collision", "done"));
}
BENCHMARK(BM_UntilReference);

static void BM_UntilLadder(benchmark::State& state) {
  const Dtmc chain = ladder(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(until_probability(chain, "collision", "done"));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_UntilLadder)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

static void BM_Synthesize11x11(benchmark::State& state) {
  const Pdtmc model = reference_model();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        synthesize(kU, model, kFixed, ParamSpace::controller(11), SpecSet::collision_avoidance()));
}
BENCHMARK(BM_Synthesize11x11)->Unit(benchmark::kMillisecond);

static void BM_MlpForward(benchmark::State& state) {
  const MlpParams p = MlpParams::random(kDefaultWidths, 1);
  const Features x{1.0, 2.0, 3.0, 1.0, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, x));
}
BENCHMARK(BM_MlpForward);

static void BM_MlpEpoch(benchmark::State& state) {
  const Dataset train_set = random_set(4000, 1);
  Dataset val_set = random_set(1000, 2);
  val_set.role = Role::Val;
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(train_set, val_set, cfg));
  state.SetItemsProcessed(state.iterations() * 4000);
}
BENCHMARK(BM_MlpEpoch)->Unit(benchmark::kMillisecond);

static void BM_OracleLabel(benchmark::State& state) {
  std::mt19937_64 rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(ground_truth_label(uniform_input(rng)));
}
BENCHMARK(BM_OracleLabel);

BENCHMARK_MAIN();
