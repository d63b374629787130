#include "terrasense/ekf.hpp"
#include "terrasense/observability.hpp"
#include "terrasense/road_profile.hpp"
#include "terrasense/sckf.hpp"
#include "terrasense/simulation.hpp"

#include <benchmark/benchmark.h>

namespace ts = terrasense;

namespace {

const ts::TerrainEntry kGraneville{"Graneville loam", 651.1e3};

ts::Scenario reference_scenario(double duration = 10.0) {
  return ts::Scenario::offroad(kGraneville, ts::IsoClass::D, 10.0, duration, 1);
}

ts::VehicleFilterModel reference_model() {
  return ts::VehicleFilterModel(ts::VehicleParams::offroad_reference(),
                                ts::NoiseConfig::reference(ts::ModelOrder::TwoDof), 0.01);
}

void BM_SckfStep(benchmark::State& state) {
  const auto s = reference_scenario(1.0);
  const auto truth = ts::simulate_truth(s);
  const auto model = reference_model();
  const auto start = ts::FilterEstimate::from_diagonal(s.initial_mean(), s.initial_covariance_diagonal());
  const Eigen::VectorXd z = truth.measurements.row(1).transpose();
  for (auto _ : state) {
    auto est = ts::sckf_correct(ts::sckf_predict(start, model, 0.01), z, model, 0.02);
    benchmark::DoNotOptimize(est.mean.data());
  }
}
BENCHMARK(BM_SckfStep);

void BM_EkfStep(benchmark::State& state) {
  const auto s = reference_scenario(1.0);
  const auto truth = ts::simulate_truth(s);
  const auto model = reference_model();
  const ts::GaussianEstimate start{s.initial_mean(),
                                   s.initial_covariance_diagonal().asDiagonal().toDenseMatrix()};
  const Eigen::VectorXd z = truth.measurements.row(1).transpose();
  for (auto _ : state) {
    auto est = ts::ekf_step(start, z, 0.01, 0.02, model);
    benchmark::DoNotOptimize(est.mean.data());
  }
}
BENCHMARK(BM_EkfStep);

void BM_GenerateProfile(benchmark::State& state) {
  const auto spec = ts::ProfileSpec::iso(ts::IsoClass::D);
  const double duration = static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto profile = ts::generate_profile(spec, 10.0, duration, 0.01);
    benchmark::DoNotOptimize(profile.h.data());
  }
}
BENCHMARK(BM_GenerateProfile)->Arg(10)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_ObservabilityRank(benchmark::State& state) {
  const auto params = ts::VehicleParams::offroad_reference();
  Eigen::VectorXd x(5);
  x << 0.01, 0.1, 0.005, 0.1, 137.93e3;
  for (auto _ : state) benchmark::DoNotOptimize(ts::lie_observability(params, x, 0.1).rank);
}
BENCHMARK(BM_ObservabilityRank);

void BM_FullRun(benchmark::State& state) {
  auto s = reference_scenario();
  s.filter = state.range(0) == 0 ? ts::FilterKind::SCKF : ts::FilterKind::EKF;
  for (auto _ : state) benchmark::DoNotOptimize(ts::run_estimation(s).rmse_pct);
}
BENCHMARK(BM_FullRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
