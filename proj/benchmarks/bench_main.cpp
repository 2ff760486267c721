#include <random>

#include <benchmark/benchmark.h>

#include "kgan/density.hpp"
#include "kgan/generator.hpp"
#include "kgan/objective.hpp"
#include "kgan/training.hpp"

namespace {

using kgan::diff::Tensor;

Tensor points(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Tensor t = Tensor::matrix(n, k);
  for (double& v : t.data()) v = d(rng);
  return t;
}

void BM_KdeBatch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor x = points(n, 2, 1), g = points(n, 2, 2);
  kgan::kernels::KernelSpec spec;
  spec.dim = 2;
  spec.bandwidths = {0.2};
  for (auto _ : state) benchmark::DoNotOptimize(kgan::density::kde_batch(x, g, spec));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KdeBatch)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oNSquared);

void BM_ObjectiveBackward(benchmark::State& state) {
  using namespace kgan::training;
  TrainConfig c;
  c.generator = {{100, 128, 128, 128, 2},
                 {kgan::generator::Activation::Relu, kgan::generator::Activation::Relu,
                  kgan::generator::Activation::Tanh, kgan::generator::Activation::Tanh}};
  c.latent = {100, kgan::generator::LatentFamily::StandardNormal, 0, 1, 0};
  c.kernel.dim = 2;
  c.kernel.bandwidths = {0.1};
  c.batch_size = static_cast<std::size_t>(state.range(0));
  c.iterations = 1;
  const auto s = make_state(c, c.batch_size);
  const Tensor batch = points(c.batch_size, 2, 3);
  const Tensor z = kgan::generator::sample_latent(c.latent, c.batch_size, 0);
  const auto spec = current_kernel(s, 2);
  for (auto _ : state) benchmark::DoNotOptimize(generator_gradient(s, batch, z, spec));
}
BENCHMARK(BM_ObjectiveBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MlpForward(benchmark::State& state) {
  const kgan::generator::MlpSpec spec{{100, 128, 128, 128, 2},
                                      {kgan::generator::Activation::Relu, kgan::generator::Activation::Relu,
                                       kgan::generator::Activation::Tanh, kgan::generator::Activation::Tanh}};
  const auto p = kgan::generator::init_params(spec, 0);
  const Tensor z = points(static_cast<std::size_t>(state.range(0)), 100, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kgan::generator::generate(p, z));
}
BENCHMARK(BM_MlpForward)->Arg(256)->Arg(2000);

}  // namespace
BENCHMARK_MAIN();
