#include <benchmark/benchmark.h>

#include <random>

#include "ppcdom/controller.hpp"
#include "ppcdom/estimator.hpp"
#include "ppcdom/plant.hpp"
#include "ppcdom/runner.hpp"
#include "ppcdom/scenario.hpp"

using namespace ppcdom;

namespace {

const Scenario& task_a() {
  static const Scenario s = load_scenario("task_a");
  return s;
}

const ScenarioSetup& setup_a() {
  static const ScenarioSetup s = prepare(task_a());
  return s;
}

Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

static void BM_PlantStep(benchmark::State& state) {
  Plant plant = setup_a().initial;
  Twist u = Twist::Zero();
  double sign = 1.0;
  for (auto _ : state) {
    u[0] = 0.03 * sign;
    u[6] = -0.03 * sign;
    plant.step(u, task_a().dt);
    sign = -sign;
  }
}
BENCHMARK(BM_PlantStep)->Unit(benchmark::kMicrosecond);

static void BM_FiniteDifferenceJacobian(benchmark::State& state) {
  const Plant& plant = setup_a().initial;
  for (auto _ : state) benchmark::DoNotOptimize(finite_difference_jacobian(plant, setup_a().keypoints.indices));
}
BENCHMARK(BM_FiniteDifferenceJacobian)->Unit(benchmark::kMillisecond);

static void BM_PredictJacobian(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  RbfBasis basis = RbfBasis::from_centers(gaussian(30, m, 1), 3.0);
  JacobianWeights w(m, 6);
  w.data() = gaussian(m, static_cast<int>(w.data().cols()), 2);
  const Eigen::VectorXd x = gaussian(30, 1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(w.predict(rbf_features(x, basis)));
}
BENCHMARK(BM_PredictJacobian)->Arg(16)->Arg(64)->Arg(256);

static void BM_Adapt(benchmark::State& state) {
  JacobianWeights w(64, 6);
  const Eigen::VectorXd theta = gaussian(64, 1, 4).cwiseAbs();
  const Twist u = gaussian(kControlDim, 1, 5);
  const Eigen::VectorXd z = gaussian(18, 1, 6);
  for (auto _ : state) benchmark::DoNotOptimize(w.adapt(theta, u, z, 0.0, 0.01, 1e-6));
}
BENCHMARK(BM_Adapt);

static void BM_Control(benchmark::State& state) {
  const Eigen::MatrixXd j = gaussian(18, kControlDim, 7);
  const ControllerGains g = ControllerGains::uniform(18, 2.0, 1.0, 0.5, 0.03);
  const Eigen::VectorXd e = 0.01 * gaussian(18, 1, 8);
  const Eigen::VectorXd z = gaussian(18, 1, 9);
  const Eigen::VectorXd eta = Eigen::VectorXd::Constant(18, 0.75);
  for (auto _ : state) benchmark::DoNotOptimize(control(j, e, z, eta, g));
}
BENCHMARK(BM_Control);

static void BM_Babble(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(babble(setup_a().initial, setup_a().keypoints, task_a(), seed++));
}
BENCHMARK(BM_Babble)->Unit(benchmark::kMillisecond);

static void BM_FitRbf(benchmark::State& state) {
  const std::vector<BabbleSample> samples = babble(setup_a().initial, setup_a().keypoints, task_a(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_rbf(samples, task_a().estimator, 1));
}
BENCHMARK(BM_FitRbf)->Unit(benchmark::kMillisecond);

static void BM_RunPpcRbf(benchmark::State& state) {
  Scenario s = task_a();
  s.stages[0].duration = 5.0;
  for (auto _ : state) benchmark::DoNotOptimize(run(s, setup_a(), Method::kPpcRbf, 1));
}
BENCHMARK(BM_RunPpcRbf)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
