#include <benchmark/benchmark.h>

#include <random>

#include "advkit/attack.hpp"
#include "advkit/toy_models.hpp"
#include "advkit/virtual_sample.hpp"

using namespace advkit;

namespace {

Tensor random_image(uint64_t seed) {
  Tensor t(32, 32, 3);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (double& v : t.data()) v = u(rng);
  return t;
}

void BM_ForwardPass(benchmark::State& state) {
  auto model = make_toy_classifier(1, 8, 4);
  Tensor x = random_image(3);
  for (auto _ : state) benchmark::DoNotOptimize(model->predict_logits(x));
}
BENCHMARK(BM_ForwardPass);

void BM_InputGradientCE(benchmark::State& state) {
  auto model = make_toy_classifier(1, 8, 4);
  Tensor x = random_image(4);
  LossSpec ce;
  Label y = Label::of_class(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(model->input_gradient(ce, x, y, nullptr));
}
BENCHMARK(BM_InputGradientCE);

void BM_InputGradientTotal(benchmark::State& state) {
  auto model = make_toy_classifier(1, 8, 4);
  Dataset ds = make_synthetic(4, 3, 32, 5);
  VirtualSampleSpec vs;
  vs.n_mix = 4;
  Tensor vf = model->extract_features(build_virtual_sample(ds, vs, 32, 32));
  Tensor x = random_image(5);
  LossSpec total{LossKind::kTotal, 0.0005, 1e-12};
  Label y = Label::of_class(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(model->input_gradient(total, x, y, &vf));
}
BENCHMARK(BM_InputGradientTotal);

void BM_IfgsmAttack(benchmark::State& state) {
  auto model = make_toy_classifier(1, 8, 4);
  Tensor x = random_image(6);
  Label y = Label::of_class(0);
  for (auto _ : state) benchmark::DoNotOptimize(ifgsm(*model, x, y, 1.0, 5));
}
BENCHMARK(BM_IfgsmAttack);

void BM_MixAttack(benchmark::State& state) {
  auto model = make_toy_classifier(1, 8, 4);
  Dataset ds = make_synthetic(4, 3, 32, 7);
  VirtualSampleSpec vs;
  vs.n_mix = 4;
  Tensor virt = build_virtual_sample(ds, vs, 32, 32);
  Tensor x = random_image(8);
  AttackConfig cfg;
  cfg.method = AttackMethod::kMixup;
  cfg.n_mix = 4;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mix_attack(*model, x, Label::of_class(0), virt, cfg));
}
BENCHMARK(BM_MixAttack);

void BM_VirtualSampleBuild(benchmark::State& state) {
  Dataset ds = make_synthetic(4, 10, 32, 9);
  VirtualSampleSpec vs;
  vs.n_mix = 4;
  for (auto _ : state)
    benchmark::DoNotOptimize(build_virtual_sample(ds, vs, 32, 32));
}
BENCHMARK(BM_VirtualSampleBuild);

}  // namespace

BENCHMARK_MAIN();
