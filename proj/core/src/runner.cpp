#include "ppcdom/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "ppcdom/controller.hpp"
#include "ppcdom/error.hpp"

namespace ppcdom {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent random streams derived from one run seed.
enum class Stream : std::uint64_t { kBabble = 1, kKmeans = 2, kNoise = 3 };

std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(s));
}

int step_count(double duration, double dt) { return static_cast<int>(std::llround(duration / dt)); }

double babble_dt(const Scenario& s) { return s.estimator.babble_dt > 0.0 ? s.estimator.babble_dt : s.dt; }
double babble_speed(const Scenario& s) {
  return s.estimator.babble_speed > 0.0 ? s.estimator.babble_speed : s.controller.speed_limit;
}

double mean_keypoint_distance(const Eigen::VectorXd& e) {
  const Eigen::Index n = e.size() / 3;
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) sum += e.segment<3>(3 * k).norm();
  return sum / static_cast<double>(n);
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "ppc-rbf") return Method::kPpcRbf;
  if (name == "baseline-rbf") return Method::kBaselineRbf;
  if (name == "ppc-broyden") return Method::kPpcBroyden;
  if (name == "baseline-broyden") return Method::kBaselineBroyden;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kPpcRbf:
      return "ppc-rbf";
    case Method::kBaselineRbf:
      return "baseline-rbf";
    case Method::kPpcBroyden:
      return "ppc-broyden";
    case Method::kBaselineBroyden:
      return "baseline-broyden";
  }
  return "unknown";
}

bool uses_barrier(Method method) { return method == Method::kPpcRbf || method == Method::kPpcBroyden; }
bool uses_rbf(Method method) { return method == Method::kPpcRbf || method == Method::kBaselineRbf; }

Eigen::VectorXd estimator_input(const Configuration& c, const Eigen::VectorXd& p) {
  Eigen::VectorXd x(kControlDim + p.size());
  x << c, p;
  return x;
}

std::vector<Eigen::VectorXd> record_target(const Scenario& scenario, const Plant& initial,
                                           const KeypointSet& keypoints) {
  Plant plant = initial;
  std::vector<Eigen::VectorXd> targets;
  for (const StageSpec& stage : scenario.stages) {
    for (const DemoSegment& seg : stage.demo) {
      const int whole = static_cast<int>(std::floor(seg.duration / scenario.dt + 1e-9));
      for (int k = 0; k < whole; ++k) plant.step(seg.twist, scenario.dt);
      const double rest = seg.duration - whole * scenario.dt;
      if (rest > 1e-12) plant.step(seg.twist, rest);
    }
    targets.push_back(extract_features(plant, keypoints));
  }
  return targets;
}

ScenarioSetup prepare(const Scenario& scenario) {
  Plant plant = attach_grippers(build_mesh(scenario.mesh), scenario.left_nodes, scenario.right_nodes, scenario.solver);
  plant.solve_equilibrium();

  Eigen::Matrix3Xd roi(3, static_cast<Eigen::Index>(scenario.roi_nodes.size()));
  for (std::size_t i = 0; i < scenario.roi_nodes.size(); ++i) {
    roi.col(static_cast<Eigen::Index>(i)) = plant.positions().col(scenario.roi_nodes[i]);
  }
  const KeypointSet local = farthest_point_sample(roi, scenario.keypoint_count, scenario.keypoint_start);
  KeypointSet keypoints;
  for (int i : local.indices) keypoints.indices.push_back(scenario.roi_nodes[static_cast<std::size_t>(i)]);

  std::vector<Eigen::VectorXd> targets = record_target(scenario, plant, keypoints);
  return ScenarioSetup{std::move(plant), std::move(keypoints), std::move(targets)};
}

std::vector<BabbleSample> babble(Plant plant, const KeypointSet& keypoints, const Scenario& scenario,
                                 std::uint64_t seed) {
  std::mt19937_64 twist_rng(stream_seed(seed, Stream::kBabble));
  std::mt19937_64 noise_rng(splitmix64(stream_seed(seed, Stream::kNoise)));
  const double dt = babble_dt(scenario);
  std::uniform_real_distribution<double> draw(-babble_speed(scenario), babble_speed(scenario));

  std::vector<BabbleSample> log;
  log.reserve(static_cast<std::size_t>(scenario.estimator.babble_samples));
  Eigen::VectorXd p = extract_features(plant, keypoints, scenario.noise_std, noise_rng);
  for (int s = 0; s < scenario.estimator.babble_samples; ++s) {
    BabbleSample sample;
    for (int j = 0; j < kControlDim; ++j) sample.u[j] = draw(twist_rng);
    sample.x = estimator_input(plant.configuration(), p);
    plant.step(sample.u, dt);
    const Eigen::VectorXd next = extract_features(plant, keypoints, scenario.noise_std, noise_rng);
    sample.pdot = (next - p) / dt;
    p = next;
    log.push_back(std::move(sample));
  }
  return log;
}

RbfModel fit_rbf(const std::vector<BabbleSample>& samples, const EstimatorSpec& spec, std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("fit_rbf: empty babbling log");
  Eigen::MatrixXd inputs(samples.front().x.size(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s) inputs.col(static_cast<Eigen::Index>(s)) = samples[s].x;
  RbfModel model;
  model.basis = RbfBasis::from_centers(
      kmeans_centers(inputs, spec.basis_size, stream_seed(seed, Stream::kKmeans), spec.kmeans_iterations),
      spec.width_scale);
  model.weights = prefit(samples, model.basis, spec.ridge);
  return model;
}

RunResult run(const Scenario& scenario, Method method, std::uint64_t seed) {
  return run(scenario, prepare(scenario), method, seed);
}

RunResult run(const Scenario& scenario, const ScenarioSetup& setup, Method method, std::uint64_t seed) {
  RunResult result;
  result.method = method;
  result.seed = seed;

  const KeypointSet& keypoints = setup.keypoints;
  const int channels = 3 * keypoints.size();
  const ControllerGains gains = scenario.controller.gains(channels);
  const bool barrier = uses_barrier(method);
  const bool rbf = uses_rbf(method);

  // Estimator initialisation from motor babbling.
  std::vector<BabbleSample> samples;
  try {
    samples = babble(setup.initial, keypoints, scenario, seed);
  } catch (const SolverDivergence& e) {
    result.completed = false;
    result.failure = std::string("babbling: ") + e.what();
    return result;
  }
  RbfBasis basis;
  JacobianWeights weights;
  BroydenState broyden;
  if (rbf) {
    RbfModel model = fit_rbf(samples, scenario.estimator, seed);
    basis = std::move(model.basis);
    weights = std::move(model.weights);
  } else {
    broyden.jacobian = fit_linear_jacobian(samples, scenario.estimator.ridge);
    broyden.damping = scenario.estimator.broyden_damping;
  }

  Plant plant = setup.initial;
  std::mt19937_64 noise_rng(stream_seed(seed, Stream::kNoise));
  const auto measure = [&] { return extract_features(plant, keypoints, scenario.noise_std, noise_rng); };

  RunLog& log = result.log;
  log.channels = channels;
  log.dt = scenario.dt;

  std::vector<PerformanceEnvelope> envelopes;
  double t = 0.0;
  Eigen::VectorXd p = measure();
  std::vector<int> stage_begin;
  std::vector<int> stage_end;

  const auto record = [&](int stage, bool holding, const Eigen::VectorXd& e, const Eigen::VectorXd& e_true,
                          const TransferState& transfer, bool clamped) {
    StepRecord r;
    r.stage = stage;
    r.holding = holding;
    r.e = e;
    r.e_true = e_true;
    r.xi = transfer.xi;
    r.lower = transfer.lower;
    r.upper = transfer.upper;
    r.mu0.resize(channels);
    r.t0.resize(channels);
    for (int i = 0; i < channels; ++i) {
      r.mu0[i] = envelopes[static_cast<std::size_t>(i)].mu0;
      r.t0[i] = envelopes[static_cast<std::size_t>(i)].t0;
    }
    r.norm_e = e.norm();
    r.stability = log_step(t, e, transfer, rbf ? weights.squared_norm() : 0.0, clamped);
    result.violation_count += r.stability.violations;
    if (r.stability.violations == 0) {
      if (!r.stability.appendix_ok) ++result.appendix_failures;
      if (r.stability.min_ze < 0.0) ++result.negative_ze;
    }
    result.max_weight_norm_sq = std::max(result.max_weight_norm_sq, r.stability.weight_norm_sq);
    log.steps.push_back(std::move(r));
  };

  bool clamped = false;
  bool stopped = false;
  for (std::size_t s = 0; s < scenario.stages.size() && !stopped; ++s) {
    const StageSpec& stage = scenario.stages[s];
    const int stage_index = static_cast<int>(s);

    if (s > 0) {
      // Inter-stage pause: zero control, clocks and adaptation leak running.
      const Eigen::VectorXd& previous = setup.targets[s - 1];
      const Eigen::VectorXd true_features = extract_features(plant, keypoints);
      for (int k = 0; k < step_count(scenario.stage_pause, scenario.dt); ++k) {
        const Eigen::VectorXd e = p - previous;
        const TransferState transfer = evaluate_transfer(e, envelopes, t, gains.k_eta);
        record(stage_index - 1, true, e, true_features - previous, transfer, clamped);
        if (barrier && !transfer.inside) {
          result.failure = "barrier violation during pause at t = " + std::to_string(t);
          stopped = true;
          break;
        }
        if (rbf && gains.gamma > 0.0) {
          const Eigen::VectorXd theta = rbf_features(estimator_input(plant.configuration(), p), basis);
          clamped = weights.adapt(theta, Twist::Zero(), Eigen::VectorXd::Zero(channels), gains.gamma, scenario.dt,
                                  gains.adaptation_rate) || clamped;
        }
        p = measure();
        t += scenario.dt;
      }
      if (stopped) break;
    }

    const Eigen::VectorXd& target = setup.targets[s];
    envelopes = stage.envelope.expand(keypoints.size());
    std::vector<double> configured_mu0;
    for (const PerformanceEnvelope& env : envelopes) configured_mu0.push_back(env.mu0);
    reset_stage(envelopes, p - target, t, configured_mu0);

    stage_begin.push_back(static_cast<int>(log.steps.size()));
    const int steps = step_count(stage.duration, scenario.dt);
    for (int k = 0; k < steps; ++k) {
      const Eigen::VectorXd e = p - target;
      const Eigen::VectorXd e_true = extract_features(plant, keypoints) - target;
      const TransferState transfer = evaluate_transfer(e, envelopes, t, gains.k_eta);
      record(stage_index, false, e, e_true, transfer, clamped);
      if (barrier && !transfer.inside) {
        result.failure = "barrier violation at t = " + std::to_string(t);
        stopped = true;
        break;
      }

      const Eigen::VectorXd x = estimator_input(plant.configuration(), p);
      Eigen::VectorXd theta;
      Eigen::MatrixXd jac;
      if (rbf) {
        theta = rbf_features(x, basis);
        jac = weights.predict(theta);
      } else {
        jac = broyden.jacobian;
      }

      const Twist u = barrier ? control(jac, e, transfer.z, transfer.eta, gains) : baseline_control(jac, e, gains);
      log.steps.back().u = u;

      try {
        plant.step(u, scenario.dt);
      } catch (const SolverDivergence& err) {
        result.failure = std::string("plant: ") + err.what();
        stopped = true;
        break;
      }
      const Eigen::VectorXd next = measure();

      if (rbf) {
        // The barrier-free ablation adapts on the raw error instead of z.
        const Eigen::VectorXd& drive = barrier ? transfer.z : e;
        clamped = weights.adapt(theta, u, drive, gains.gamma, scenario.dt, gains.adaptation_rate) || clamped;
      } else {
        broyden.update(next - p, u * scenario.dt);
      }
      p = next;
      t += scenario.dt;
    }
    stage_end.push_back(static_cast<int>(log.steps.size()));
  }

  result.completed = !stopped;
  result.weights_clamped = clamped;

  const Eigen::VectorXd final_error = extract_features(plant, keypoints) - setup.targets[stage_end.size() - 1];
  result.final_error_inf = inf_norm(final_error);

  // Steady-state error over the final window of the last stage reached.
  {
    const int begin = stage_begin.back();
    const int end = stage_end.back();
    const int window = std::max(1, step_count(scenario.steady_window, scenario.dt));
    double sum = mean_keypoint_distance(final_error);
    int count = 1;
    for (int i = std::max(begin, end - window + 1); i < end; ++i) {
      sum += mean_keypoint_distance(log.steps[static_cast<std::size_t>(i)].e_true);
      ++count;
    }
    result.steady_state_error = sum / count;
  }

  // Per-stage convergence: time from stage start until |e|_inf stays inside the band.
  const double band = scenario.resolved_convergence_band();
  for (std::size_t s = 0; s < stage_begin.size(); ++s) {
    const int begin = stage_begin[s];
    const int end = stage_end[s];
    const bool last = s + 1 == stage_begin.size();
    const double stage_duration = scenario.stages[s].duration;
    int last_outside = -1;
    for (int i = begin; i < end; ++i) {
      if (inf_norm(log.steps[static_cast<std::size_t>(i)].e_true) > band) last_outside = i;
    }
    double tc = 0.0;
    if (last_outside >= 0) tc = (last_outside + 1 - begin) * scenario.dt;
    const bool end_inside = last ? inf_norm(final_error) <= band : last_outside < end - 1;
    if (!end_inside || (last && stopped)) tc = stage_duration;
    result.stage_convergence.push_back(std::min(tc, stage_duration));
  }
  result.convergence_time = 0.0;
  for (double tc : result.stage_convergence) result.convergence_time += tc;

  if (!result.completed) {
    result.success = false;
  } else if (result.violation_count > 0) {
    result.success = false;
    result.failure = "funnel violated at " + std::to_string(result.violation_count) + " channel-steps";
  } else if (result.final_error_inf > scenario.resolved_success_threshold()) {
    result.success = false;
    result.failure = "final error above the success threshold";
  } else {
    result.success = true;
  }
  return result;
}

Statistics describe(std::vector<double> values) {
  Statistics s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  return s;
}

ComparisonSummary compare(const Scenario& scenario, const std::vector<Method>& methods,
                          const std::vector<std::uint64_t>& seeds, unsigned threads) {
  ComparisonSummary summary;
  summary.scenario = scenario.name;
  summary.success_threshold = scenario.resolved_success_threshold();
  summary.convergence_band = scenario.resolved_convergence_band();
  summary.seeds = seeds;
  std::sort(summary.seeds.begin(), summary.seeds.end());

  const ScenarioSetup setup = prepare(scenario);
  const std::size_t jobs = methods.size() * summary.seeds.size();
  std::vector<RunResult> results(jobs);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      RunResult r = run(scenario, setup, methods[i / summary.seeds.size()], summary.seeds[i % summary.seeds.size()]);
      r.log.steps.clear();
      results[i] = std::move(r);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
  std::vector<std::future<void>> pool;
  for (unsigned k = 1; k < threads; ++k) pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();

  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary ms;
    ms.method = methods[m];
    std::vector<double> errors;
    std::vector<double> times;
    int successes = 0;
    for (std::size_t k = 0; k < summary.seeds.size(); ++k) {
      RunResult& r = results[m * summary.seeds.size() + k];
      errors.push_back(r.steady_state_error);
      times.push_back(r.convergence_time);
      successes += r.success ? 1 : 0;
      ms.total_violations += r.violation_count;
      ms.results.push_back(std::move(r));
    }
    ms.runs = static_cast<int>(summary.seeds.size());
    ms.success_rate = ms.runs > 0 ? static_cast<double>(successes) / ms.runs : 0.0;
    ms.steady_state_error = describe(errors);
    ms.convergence_time = describe(times);
    summary.methods.push_back(std::move(ms));
  }
  return summary;
}

}  // namespace ppcdom
