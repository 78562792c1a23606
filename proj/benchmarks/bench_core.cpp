#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dta/denoiser.hpp"
#include "dta/metrics.hpp"
#include "dta/rng.hpp"
#include "dta/sweep.hpp"
#include "dta/synthetic.hpp"
#include "dta/trend.hpp"

namespace {

dta::DenoiserModel perturbed_model(dta::Precision precision = dta::Precision::f64) {
  dta::DenoiserModel model = dta::init_model(dta::Architecture{}, 1, precision);
  std::vector<double> params(model.parameters().begin(), model.parameters().end());
  std::mt19937_64 engine(2);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (double& p : params) p += noise(engine);
  if (precision == dta::Precision::f32) {
    for (double& p : params) p = static_cast<float>(p);
  }
  model.set_parameters(std::move(params));
  return model;
}

dta::Image grating(std::size_t side) {
  dta::SyntheticSpec spec;
  spec.geometry = {side, side, 1};
  return dta::make_train_image(spec, 0);
}

void BM_Predict(benchmark::State& state) {
  const auto precision = state.range(1) ? dta::Precision::f32 : dta::Precision::f64;
  dta::DenoiserSession session(perturbed_model(precision));
  const dta::Image x = grating(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(session.predict_x0(x, 0.2));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_Predict)->ArgsProduct({{32, 64, 128}, {0, 1}})->Unit(benchmark::kMicrosecond);

void BM_InputGradient(benchmark::State& state) {
  dta::DenoiserSession session(perturbed_model());
  const dta::Image x = grating(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(session.input_gradient(x, 0.4));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_InputGradient)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_Sweep(benchmark::State& state) {
  const dta::DenoiserModel model = perturbed_model();
  const dta::Image x = grating(64);
  const auto schedule = dta::NoiseSchedule::linear(0.4, static_cast<std::size_t>(state.range(0)));
  const dta::SeedStream stream(3);
  for (auto _ : state) benchmark::DoNotOptimize(dta::sweep(model, x, schedule, stream));
}
BENCHMARK(BM_Sweep)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_TrendMap(benchmark::State& state) {
  dta::TrendStack stack;
  stack.geometry = {64, 64, 1};
  std::mt19937_64 engine(4);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (std::int64_t k = 0; k < state.range(0); ++k) {
    dta::Image frame(stack.geometry);
    for (double& v : frame.data()) v = dist(engine);
    stack.intensity.push_back(frame);
    stack.uncertainty.push_back(frame);
  }
  for (auto _ : state) benchmark::DoNotOptimize(dta::trend_map(stack, dta::TrendKind::intensity));
}
BENCHMARK(BM_TrendMap)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_SecondFourier(benchmark::State& state) {
  std::vector<double> seq(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 engine(5);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& v : seq) v = dist(engine);
  for (auto _ : state) benchmark::DoNotOptimize(dta::second_fourier_magnitude(seq));
}
BENCHMARK(BM_SecondFourier)->RangeMultiplier(4)->Range(4, 256);

dta::LabeledScores pooled_pixels(std::size_t n) {
  dta::LabeledScores data;
  std::mt19937_64 engine(6);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::bernoulli_distribution label(0.02);
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = label(engine);
    data.add(std::round((dist(engine) + (positive ? 0.3 : 0.0)) * 65535.0) / 65535.0, positive);
  }
  return data;
}

void BM_Auroc(benchmark::State& state) {
  const dta::LabeledScores data = pooled_pixels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dta::auroc(data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auroc)->Arg(1 << 12)->Arg(20 * 4096)->Unit(benchmark::kMillisecond);

void BM_AveragePrecision(benchmark::State& state) {
  const dta::LabeledScores data = pooled_pixels(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dta::average_precision(data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AveragePrecision)->Arg(1 << 12)->Arg(20 * 4096)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const std::vector<dta::Image> normals{grating(64)};
  dta::TrainingConfig config;
  config.steps = 1;
  config.batch_size = static_cast<std::size_t>(state.range(0));
  config.seed = 7;
  const dta::DenoiserModel model = perturbed_model();
  for (auto _ : state) benchmark::DoNotOptimize(dta::train(model, normals, config));
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
