#pragma once

#include <string>

// Fast 5x5 slit sheet used by the runner and I/O tests.
inline std::string small_scenario_json(const std::string& demo = R"([{"twist": [-0.01,0,0,0,0,0, 0.01,0,0,0,0,0], "duration": 1.0}])",
                                       double duration = 4.0) {
  return R"({
  "name": "small",
  "mesh": {"shape": "slit-sheet", "nx": 5, "ny": 5, "spacing": 0.02, "stiffness": 40.0},
  "physics": {"force_tolerance": 1e-7},
  "grippers": {"left": {"columns": [0]}, "right": {"columns": [-1]}},
  "keypoints": {"roi": {"columns": [1, 2, 3]}, "count": 4},
  "controller": {"adaptation_rate": 0.001, "pinv_damping": 0.03},
  "estimator": {"basis_size": 8, "babble_samples": 30, "babble_dt": 0.2, "width_scale": 3.0, "ridge": 0.001},
  "stages": [{"envelope": "task_a", "duration": )" +
         std::to_string(duration) + R"(, "demo": )" + demo + R"(}],
  "dt": 0.05,
  "noise_std": 0.0001
})";
}
