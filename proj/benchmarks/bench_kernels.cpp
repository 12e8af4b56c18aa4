#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "isocl/encoder.hpp"
#include "isocl/isotropy.hpp"
#include "isocl/objectives.hpp"
#include "isocl/spectral.hpp"

namespace {

isocl::Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  isocl::Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

void BM_CovarianceEig(benchmark::State& state) {
  const auto d = state.range(0);
  const isocl::FeatureMatrix x(gaussian(d, 10 * d, 1));
  for (auto _ : state) {
    auto spec = isocl::eig_spectrum(isocl::covariance(x));
    benchmark::DoNotOptimize(spec.gammas.data());
  }
}
BENCHMARK(BM_CovarianceEig)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

isocl::EmbeddingBatch batch(Eigen::Index d, Eigen::Index b) {
  std::vector<int> labels(static_cast<std::size_t>(b));
  std::vector<bool> current(static_cast<std::size_t>(b));
  for (Eigen::Index i = 0; i < b; ++i) {
    labels[static_cast<std::size_t>(i)] = static_cast<int>(i % 10);
    current[static_cast<std::size_t>(i)] = i % 3 != 0;
  }
  return isocl::EmbeddingBatch::normalized(gaussian(d, b, 2), labels, current);
}

void BM_SupConAsym(benchmark::State& state) {
  const auto b = batch(128, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(isocl::supcon_asym(b, 0.5).value);
}
BENCHMARK(BM_SupConAsym)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Ird(benchmark::State& state) {
  const auto b = batch(128, state.range(0));
  const isocl::Matrix past = gaussian(128, state.range(0), 3).colwise().normalized();
  const isocl::LossConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(isocl::ird(b, past, cfg).value);
}
BENCHMARK(BM_Ird)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_IsoScoreStar(benchmark::State& state) {
  const isocl::Matrix z = gaussian(state.range(0), 512, 4);
  for (auto _ : state) benchmark::DoNotOptimize(isocl::iso_score_star(z).value);
}
BENCHMARK(BM_IsoScoreStar)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EncoderStep(benchmark::State& state) {
  const isocl::Encoder e({16, 64, 64, 128}, 0);
  const isocl::Matrix x = gaussian(16, state.range(0), 5);
  const isocl::Matrix g = gaussian(128, state.range(0), 6);
  for (auto _ : state) {
    isocl::Encoder::ForwardCache cache;
    e.forward(x, cache);
    auto grads = e.backward(cache, g);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_EncoderStep)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
