// Command line front end: babble, run, compare, envelope, demo-target.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppcdom/error.hpp"
#include "ppcdom/io.hpp"
#include "ppcdom/runner.hpp"
#include "ppcdom/scenario.hpp"

namespace fs = std::filesystem;
using namespace ppcdom;

namespace {

Scenario load(const std::string& name, int stages) {
  Scenario s = load_scenario(name);
  if (stages > 0) {
    if (stages > static_cast<int>(s.stages.size())) {
      throw ConfigError("--stages " + std::to_string(stages) + " exceeds the " +
                        std::to_string(s.stages.size()) + " stages of " + s.name);
    }
    s.stages.resize(static_cast<std::size_t>(stages));
  }
  return s;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

void print_result(const RunResult& r) {
  std::printf("%-16s seed=%-4llu %s  ss=%.5f m  final_inf=%.5f m  conv=%.2f s  violations=%d%s%s\n",
              to_string(r.method).c_str(), static_cast<unsigned long long>(r.seed),
              r.success ? "ok  " : "FAIL", r.steady_state_error, r.final_error_inf, r.convergence_time,
              r.violation_count, r.failure.empty() ? "" : "  ", r.failure.c_str());
}

std::string envelope_csv(const Scenario& s, double step) {
  std::string out = "stage,t,axis,mu,mu_dot,phi_a,phi_b\n";
  static constexpr const char* kAxis[] = {"x", "y", "z"};
  char buf[160];
  double offset = 0.0;
  for (std::size_t i = 0; i < s.stages.size(); ++i) {
    if (i > 0) offset += s.stage_pause;
    for (int a = 0; a < 3; ++a) {
      PerformanceEnvelope env = s.stages[i].envelope.axis[static_cast<std::size_t>(a)];
      env.t0 = offset;
      const int n = static_cast<int>(s.stages[i].duration / step + 0.5);
      for (int k = 0; k <= n; ++k) {
        const double t = offset + k * step;
        const EnvelopeValue v = env.value(t);
        const Boundaries b = env.boundaries(t);
        std::snprintf(buf, sizeof buf, "%zu,%.10g,%s,%.17g,%.17g,%.17g,%.17g\n", i + 1, t, kAxis[a], v.mu,
                      v.mu_dot, b.lower, b.upper);
        out += buf;
      }
    }
    offset += s.stages[i].duration;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescribed-performance shape servoing on a simulated deformable sheet"};
  app.require_subcommand(1);

  std::string scenario_name = "task_a";
  std::string method_name = "ppc-rbf";
  std::uint64_t seed = 1;
  std::string out;
  int stages = 0;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_name, "Scenario file or builtin name (" + [] {
      std::string names;
      for (const std::string& n : builtin_scenario_names()) names += (names.empty() ? "" : ", ") + n;
      return names;
    }() + ")")->capture_default_str();
    sub->add_option("--stages", stages, "Use only the first N stages");
  };

  CLI::App* babble_cmd = app.add_subcommand("babble", "Collect a motor babbling log as CSV");
  common(babble_cmd);
  babble_cmd->add_option("--seed", seed)->capture_default_str();
  babble_cmd->add_option("--out", out, "CSV path")->required();

  CLI::App* run_cmd = app.add_subcommand("run", "Run one closed-loop trial");
  common(run_cmd);
  run_cmd->add_option("--method", method_name, "ppc-rbf | baseline-rbf | ppc-broyden | baseline-broyden")
      ->capture_default_str();
  run_cmd->add_option("--seed", seed)->capture_default_str();
  run_cmd->add_option("--out", out, "Output directory for run.csv and result.json");

  CLI::App* compare_cmd = app.add_subcommand("compare", "Compare methods over a range of seeds");
  common(compare_cmd);
  std::vector<std::string> methods{"ppc-rbf", "baseline-rbf", "ppc-broyden", "baseline-broyden"};
  int seed_count = 10;
  unsigned threads = 0;
  compare_cmd->add_option("--methods", methods, "Methods to compare")->delimiter(',')->capture_default_str();
  compare_cmd->add_option("--seed", seed, "First seed")->capture_default_str();
  compare_cmd->add_option("--seeds", seed_count, "Number of consecutive seeds")->capture_default_str()
      ->check(CLI::PositiveNumber);
  compare_cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
  compare_cmd->add_option("--out", out, "Summary JSON path");

  CLI::App* env_cmd = app.add_subcommand("envelope", "Dump the prescribed boundary curves as CSV");
  common(env_cmd);
  double env_step = 0.05;
  env_cmd->add_option("--step", env_step, "Sampling step (s)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  env_cmd->add_option("--out", out, "CSV path (stdout when omitted)");

  CLI::App* demo_cmd = app.add_subcommand("demo-target", "Record the per-stage target keypoints");
  common(demo_cmd);
  demo_cmd->add_option("--out", out, "JSON path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    const Scenario scenario = load(scenario_name, stages);

    if (*babble_cmd) {
      const ScenarioSetup setup = prepare(scenario);
      const auto log = babble(setup.initial, setup.keypoints, scenario, seed);
      write_babble_csv(log, out);
      std::printf("%zu babbling samples written to %s\n", log.size(), out.c_str());
    } else if (*run_cmd) {
      const RunResult r = run(scenario, parse_method(method_name), seed);
      print_result(r);
      if (!out.empty()) {
        write_csv(r.log, fs::path(out) / "run.csv");
        write_text(fs::path(out) / "result.json", result_json(r) + "\n");
      }
    } else if (*compare_cmd) {
      std::vector<Method> parsed;
      for (const std::string& m : methods) parsed.push_back(parse_method(m));
      const ComparisonSummary summary = compare(scenario, parsed, seed_range(seed, seed_count), threads);
      for (const MethodSummary& m : summary.methods) {
        std::printf("%-16s success=%5.1f%%  ss median=%.5f m (IQR %.5f)  conv median=%.2f s (IQR %.2f)  violations=%d\n",
                    to_string(m.method).c_str(), 100.0 * m.success_rate, m.steady_state_error.median,
                    m.steady_state_error.iqr(), m.convergence_time.median, m.convergence_time.iqr(),
                    m.total_violations);
      }
      if (!out.empty()) write_summary(summary, out);
    } else if (*env_cmd) {
      const std::string csv = envelope_csv(scenario, env_step);
      if (out.empty()) {
        std::cout << csv;
      } else {
        write_text(out, csv);
      }
    } else if (*demo_cmd) {
      const ScenarioSetup setup = prepare(scenario);
      nlohmann::json doc;
      doc["scenario"] = scenario.name;
      doc["keypoint_nodes"] = setup.keypoints.indices;
      const Eigen::VectorXd p0 = extract_features(setup.initial, setup.keypoints);
      doc["initial"] = std::vector<double>(p0.data(), p0.data() + p0.size());
      nlohmann::json targets = nlohmann::json::array();
      for (const Eigen::VectorXd& t : setup.targets) targets.push_back(std::vector<double>(t.data(), t.data() + t.size()));
      doc["targets"] = targets;
      if (out.empty()) {
        std::cout << doc.dump(2) << '\n';
      } else {
        write_text(out, doc.dump(2) + "\n");
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
