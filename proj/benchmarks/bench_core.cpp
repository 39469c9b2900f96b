#include <benchmark/benchmark.h>

#include "intact/point_reach.hpp"
#include "intact/sac.hpp"
#include "intact/volt_var.hpp"

using namespace intact;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, RngStream& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  }
  return m;
}

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  RngStream rng(1);
  Mlp net({8, 64, 64, 1}, Activation::kRelu, Activation::kIdentity, rng);
  const Mat x = random_mat(batch, 8, rng);
  for (auto _ : state) {
    Var loss = mean(square(net.forward(Var::constant(x))));
    loss.backward();
    for (Var& p : net.params()) p.zero_grad();
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(1)->Arg(64)->Arg(256);

void BM_StgsSample(benchmark::State& state) {
  const auto bins = static_cast<Eigen::Index>(state.range(0));
  RngStream rng(2);
  const Mat logits = random_mat(64, bins, rng);
  const Var l = Var::leaf(logits, true);
  for (auto _ : state) {
    const StgsSample s = stgs(l, 1.0, rng);
    benchmark::DoNotOptimize(s.index.front());
  }
}
BENCHMARK(BM_StgsSample)->Arg(9)->Arg(33);

void BM_SacUpdateStep(benchmark::State& state) {
  SacConfig cfg;
  cfg.hidden = {64, 64};
  cfg.batch = static_cast<int>(state.range(0));
  cfg.buffer_capacity = 4096;
  RngStream arng(3);
  SacAgent agent(6, IntegerActionSpec({9, 9}, true), cfg, arng);

  ReplayBuffer buffer(cfg.buffer_capacity);
  RngStream rng(4);
  for (int i = 0; i < 1024; ++i) {
    Transition t;
    for (int j = 0; j < 6; ++j) t.state.push_back(rng.normal());
    for (int j = 0; j < 6; ++j) t.next_state.push_back(rng.normal());
    t.indices = {rng.uniform_int(9), rng.uniform_int(9)};
    t.action = {embed_index(t.indices[0], 9), embed_index(t.indices[1], 9)};
    t.reward = rng.normal();
    t.done = rng.uniform() < 0.1;
    buffer.push(std::move(t));
  }
  RngStream brng(5), urng(6);
  for (auto _ : state) {
    const auto batch = buffer.sample(static_cast<std::size_t>(cfg.batch), brng);
    agent.critic_update(batch, urng);
    agent.actor_update(batch, urng);
    agent.polyak_update();
  }
}
BENCHMARK(BM_SacUpdateStep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_PointReachStep(benchmark::State& state) {
  PointReachEnv env;
  env.reset(1);
  RngStream rng(7);
  int t = 0;
  for (auto _ : state) {
    if (t++ % PointReachEnv::kHorizon == 0) env.reset(rng.next_u64());
    benchmark::DoNotOptimize(env.step(std::vector<double>{rng.uniform(-1, 1), rng.uniform(-1, 1)}));
  }
}
BENCHMARK(BM_PointReachStep);

void BM_VoltVarStep(benchmark::State& state) {
  VoltVarToyEnv env;
  env.reset(1);
  RngStream rng(8);
  int t = 0;
  const auto& spec = env.action_spec();
  std::vector<int> action(static_cast<std::size_t>(spec.dims()));
  for (auto _ : state) {
    if (t++ % VoltVarToyEnv::kHorizon == 0) env.reset(rng.next_u64());
    for (std::size_t k = 0; k < action.size(); ++k) action[k] = rng.uniform_int(spec.bins[k]);
    benchmark::DoNotOptimize(env.step(action));
  }
}
BENCHMARK(BM_VoltVarStep);

}  // namespace

BENCHMARK_MAIN();
