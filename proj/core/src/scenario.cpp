#include "ppcdom/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "builtin_scenarios.hpp"
#include "ppcdom/error.hpp"

namespace ppcdom {

using nlohmann::json;

AxisEnvelopes AxisEnvelopes::preset(std::string_view name) {
  // mu0, mu_inf, alpha per axis.
  const auto make = [](std::array<std::array<double, 3>, 3> rows) {
    AxisEnvelopes a;
    for (int k = 0; k < 3; ++k) {
      a.axis[k].mu0 = rows[k][0];
      a.axis[k].mu_inf = rows[k][1];
      a.axis[k].alpha = rows[k][2];
      a.axis[k].delta = 1.0;
    }
    return a;
  };
  if (name == "task_a") return make({{{0.1, 0.01, 0.2}, {0.1, 0.01, 0.2}, {0.1, 0.01, 0.2}}});
  if (name == "task_b") return make({{{0.1, 0.015, 0.05}, {0.15, 0.015, 0.05}, {0.15, 0.015, 0.02}}});
  if (name == "task_c") return make({{{0.15, 0.015, 0.02}, {0.15, 0.015, 0.02}, {0.05, 0.01, 0.02}}});
  throw ConfigError("unknown envelope preset '" + std::string(name) + "'");
}

std::vector<PerformanceEnvelope> AxisEnvelopes::expand(int keypoints) const {
  std::vector<PerformanceEnvelope> out;
  out.reserve(static_cast<std::size_t>(3 * keypoints));
  for (int k = 0; k < keypoints; ++k) {
    for (int a = 0; a < 3; ++a) out.push_back(axis[static_cast<std::size_t>(a)]);
  }
  return out;
}

double AxisEnvelopes::max_mu_inf() const {
  return std::max({axis[0].mu_inf, axis[1].mu_inf, axis[2].mu_inf});
}

double AxisEnvelopes::min_mu_inf() const {
  return std::min({axis[0].mu_inf, axis[1].mu_inf, axis[2].mu_inf});
}

ControllerGains ControllerSpec::gains(int channels) const {
  ControllerGains g = ControllerGains::uniform(channels, k1, kz, k_eta, speed_limit);
  g.gamma = gamma;
  g.adaptation_rate = adaptation_rate;
  g.pinv_damping = pinv_damping;
  return g;
}

double Scenario::resolved_success_threshold() const {
  if (success_threshold > 0.0) return success_threshold;
  double m = 0.0;
  for (const StageSpec& s : stages) m = std::max(m, s.envelope.max_mu_inf());
  return 1.5 * m;
}

double Scenario::resolved_convergence_band() const {
  if (convergence_band > 0.0) return convergence_band;
  double m = std::numeric_limits<double>::infinity();
  for (const StageSpec& s : stages) m = std::min(m, s.envelope.min_mu_inf());
  return 0.5 * m;
}

void Scenario::validate() const {
  const auto fail = [&](const std::string& field, const std::string& why) {
    throw ConfigError(name + "." + field + ": " + why);
  };
  if (stages.empty()) fail("stages", "at least one stage is required");
  if (!(dt > 0.0)) fail("dt", "must be positive");
  if (!(noise_std >= 0.0)) fail("noise_std", "must be non-negative");
  if (!(stage_pause >= 0.0)) fail("stage_pause", "must be non-negative");
  if (keypoint_count < 1) fail("keypoints.count", "must be at least 1");
  if (static_cast<int>(roi_nodes.size()) < keypoint_count) fail("keypoints.roi", "has fewer nodes than keypoints");
  if (keypoint_start < 0 || keypoint_start >= static_cast<int>(roi_nodes.size())) {
    fail("keypoints.start", "outside the region of interest");
  }
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const std::string prefix = "stages[" + std::to_string(s) + "]";
    if (!(stages[s].duration > 0.0)) fail(prefix + ".duration", "must be positive");
    static constexpr const char* kAxis[] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
      const PerformanceEnvelope& e = stages[s].envelope.axis[static_cast<std::size_t>(a)];
      const std::string field = prefix + ".envelope." + kAxis[a];
      if (!(e.mu_inf > 0.0)) fail(field + ".mu_inf", "must be positive");
      if (!(e.mu0 > e.mu_inf)) fail(field + ".mu0", "must exceed mu_inf");
      if (!(e.alpha > 0.0)) fail(field + ".alpha", "must be positive");
      if (!(e.delta > 0.0)) fail(field + ".delta", "must be positive");
    }
    for (std::size_t d = 0; d < stages[s].demo.size(); ++d) {
      const DemoSegment& seg = stages[s].demo[d];
      if (!(seg.duration >= 0.0) || !seg.twist.allFinite()) {
        fail(prefix + ".demo[" + std::to_string(d) + "]", "needs a finite twist and non-negative duration");
      }
    }
  }
  try {
    controller.gains(3 * keypoint_count).validate(3 * keypoint_count);
  } catch (const ConfigError& e) {
    fail("controller", e.what());
  }
  if (estimator.basis_size < 1) fail("estimator.basis_size", "must be positive");
  if (estimator.babble_samples < estimator.basis_size) fail("estimator.babble_samples", "must be at least basis_size");
  if (!(estimator.width_scale > 0.0)) fail("estimator.width_scale", "must be positive");
  if (!(estimator.ridge >= 0.0)) fail("estimator.ridge", "must be non-negative");
  if (!(estimator.broyden_damping > 0.0 && estimator.broyden_damping <= 1.0)) {
    fail("estimator.broyden_damping", "must lie in (0, 1]");
  }
}

namespace {

// JSON reader that tracks the field path for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& why) const { throw ConfigError(path_ + ": " + why); }

  bool has(const char* key) const { return value_.is_object() && value_.contains(key); }

  Node at(const char* key) const {
    if (!value_.is_object()) fail("expected an object");
    if (!value_.contains(key)) throw ConfigError(path_ + "." + key + ": missing required field");
    return Node(value_.at(key), path_ + "." + key);
  }

  Node at(std::size_t i) const { return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::size_t size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    return value_.get<double>();
  }

  int integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    return value_.get<int>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }

  bool is_string() const { return value_.is_string(); }
  bool is_array() const { return value_.is_array(); }

  double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }
  int integer_or(const char* key, int fallback) const { return has(key) ? at(key).integer() : fallback; }

  std::vector<int> integers() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).integer());
    return out;
  }

  const std::string& path() const { return path_; }

 private:
  const json& value_;
  std::string path_;
};

int wrap_index(int i, int count) { return i < 0 ? count + i : i; }

// Selects mesh nodes by grid columns, rows, explicit cells or node indices.
// Negative column/row values count from the far side of the grid.
std::vector<int> select_nodes(const Node& n, const Mesh& mesh, const MeshSpec& spec) {
  std::vector<int> out;
  if (n.has("nodes")) {
    out = n.at("nodes").integers();
    for (int i : out) {
      if (i < 0 || i >= mesh.node_count()) n.at("nodes").fail("node index out of range");
    }
    return out;
  }
  if (n.has("cells")) {
    const Node cells = n.at("cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::vector<int> cr = cells.at(i).integers();
      if (cr.size() != 2) cells.at(i).fail("expected [column, row]");
      const int node = mesh.node_at(wrap_index(cr[0], spec.nx), wrap_index(cr[1], spec.ny));
      if (node < 0) cells.at(i).fail("no mesh node at this cell");
      out.push_back(node);
    }
    return out;
  }
  std::set<int> columns;
  std::set<int> rows;
  if (n.has("columns")) {
    for (int c : n.at("columns").integers()) columns.insert(wrap_index(c, spec.nx));
  }
  if (n.has("rows")) {
    for (int r : n.at("rows").integers()) rows.insert(wrap_index(r, spec.ny));
  }
  if (columns.empty() && rows.empty()) n.fail("expected one of nodes, cells, columns, rows");
  for (int i = 0; i < mesh.node_count(); ++i) {
    const Eigen::Vector2i g = mesh.grid[static_cast<std::size_t>(i)];
    const bool col_ok = columns.empty() || columns.count(g.x()) > 0;
    const bool row_ok = rows.empty() || rows.count(g.y()) > 0;
    if (col_ok && row_ok) out.push_back(i);
  }
  if (out.empty()) n.fail("selection matched no mesh nodes");
  return out;
}

PerformanceEnvelope parse_axis(const Node& n, double delta) {
  PerformanceEnvelope e;
  e.mu0 = n.at("mu0").number();
  e.mu_inf = n.at("mu_inf").number();
  e.alpha = n.at("alpha").number();
  e.delta = n.number_or("delta", delta);
  if (!(e.mu_inf > 0.0)) n.at("mu_inf").fail("must be positive");
  if (!(e.mu0 > e.mu_inf)) n.at("mu_inf").fail("must be smaller than mu0");
  if (!(e.alpha > 0.0)) n.at("alpha").fail("must be positive");
  if (!(e.delta > 0.0)) n.fail("delta must be positive");
  return e;
}

AxisEnvelopes parse_envelope(const Node& n) {
  if (n.is_string()) {
    try {
      return AxisEnvelopes::preset(n.string());
    } catch (const ConfigError& e) {
      n.fail(e.what());
    }
  }
  AxisEnvelopes out;
  if (n.has("preset")) out = AxisEnvelopes::preset(n.at("preset").string());
  const double delta = n.number_or("delta", 1.0);
  static constexpr const char* kAxis[] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    if (n.has(kAxis[a])) {
      out.axis[static_cast<std::size_t>(a)] = parse_axis(n.at(kAxis[a]), delta);
    } else if (!n.has("preset")) {
      n.at(kAxis[a]);  // throws "missing required field"
    } else {
      out.axis[static_cast<std::size_t>(a)].delta = delta;
    }
  }
  return out;
}

Twist parse_twist(const Node& n) {
  if (n.size() != kControlDim) n.fail("twist needs 12 entries");
  Twist t;
  for (int j = 0; j < kControlDim; ++j) t[j] = n.at(static_cast<std::size_t>(j)).number();
  return t;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": JSON parse error: " + e.what());
  }
  const Node root(doc, origin);

  Scenario s;
  s.name = root.has("name") ? root.at("name").string() : origin;

  const Node mesh = root.at("mesh");
  s.mesh.shape = [&] {
    try {
      return parse_mesh_shape(mesh.at("shape").string());
    } catch (const ConfigError& e) {
      mesh.at("shape").fail(e.what());
    }
  }();
  s.mesh.nx = mesh.at("nx").integer();
  s.mesh.ny = mesh.at("ny").integer();
  s.mesh.spacing = mesh.at("spacing").number();
  s.mesh.stiffness = mesh.at("stiffness").number();
  s.mesh.shear_stiffness = mesh.number_or("shear_stiffness", -1.0);
  s.mesh.slit_column = mesh.integer_or("slit_column", -1);
  s.mesh.slit_begin = mesh.integer_or("slit_begin", -1);
  s.mesh.slit_end = mesh.integer_or("slit_end", -1);
  s.mesh.hole_nx = mesh.integer_or("hole_nx", -1);
  s.mesh.hole_ny = mesh.integer_or("hole_ny", -1);
  s.mesh.leg_width = mesh.integer_or("leg_width", -1);
  Mesh built;
  try {
    built = build_mesh(s.mesh);
  } catch (const ConfigError& e) {
    mesh.fail(e.what());
  }

  if (root.has("physics")) {
    const Node phys = root.at("physics");
    s.solver.force_tolerance = phys.number_or("force_tolerance", s.solver.force_tolerance);
    s.solver.max_iterations = phys.integer_or("max_iterations", s.solver.max_iterations);
    s.solver.node_mass = phys.number_or("node_mass", 0.0);
    if (phys.has("gravity") && phys.at("gravity").boolean()) s.solver.gravity = Vec3(0.0, 0.0, -9.81);
  }

  const Node grippers = root.at("grippers");
  s.left_nodes = select_nodes(grippers.at("left"), built, s.mesh);
  s.right_nodes = select_nodes(grippers.at("right"), built, s.mesh);

  const Node kp = root.at("keypoints");
  {
    const std::vector<int> roi = select_nodes(kp.at("roi"), built, s.mesh);
    const std::set<int> held(s.left_nodes.begin(), s.left_nodes.end());
    const std::set<int> held_right(s.right_nodes.begin(), s.right_nodes.end());
    for (int i : roi) {
      if (!held.count(i) && !held_right.count(i)) s.roi_nodes.push_back(i);
    }
  }
  s.keypoint_count = kp.integer_or("count", 6);
  s.keypoint_start = kp.integer_or("start", 0);

  if (root.has("controller")) {
    const Node c = root.at("controller");
    s.controller.k1 = c.number_or("k1", s.controller.k1);
    s.controller.kz = c.number_or("kz", s.controller.kz);
    s.controller.k_eta = c.number_or("k_eta", s.controller.k_eta);
    s.controller.gamma = c.number_or("gamma", s.controller.gamma);
    s.controller.adaptation_rate = c.number_or("adaptation_rate", s.controller.adaptation_rate);
    s.controller.pinv_damping = c.number_or("pinv_damping", s.controller.pinv_damping);
    s.controller.speed_limit = c.number_or("speed_limit", s.controller.speed_limit);
  }
  if (root.has("estimator")) {
    const Node e = root.at("estimator");
    s.estimator.basis_size = e.integer_or("basis_size", s.estimator.basis_size);
    s.estimator.width_scale = e.number_or("width_scale", s.estimator.width_scale);
    s.estimator.ridge = e.number_or("ridge", s.estimator.ridge);
    s.estimator.babble_samples = e.integer_or("babble_samples", s.estimator.babble_samples);
    s.estimator.babble_dt = e.number_or("babble_dt", s.estimator.babble_dt);
    s.estimator.babble_speed = e.number_or("babble_speed", s.estimator.babble_speed);
    s.estimator.kmeans_iterations = e.integer_or("kmeans_iterations", s.estimator.kmeans_iterations);
    s.estimator.broyden_damping = e.number_or("broyden_damping", s.estimator.broyden_damping);
  }

  const Node stages = root.at("stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const Node st = stages.at(i);
    StageSpec stage;
    stage.envelope = parse_envelope(st.at("envelope"));
    stage.duration = st.at("duration").number();
    if (st.has("demo")) {
      const Node demo = st.at("demo");
      for (std::size_t d = 0; d < demo.size(); ++d) {
        DemoSegment seg;
        seg.twist = parse_twist(demo.at(d).at("twist"));
        seg.duration = demo.at(d).at("duration").number();
        stage.demo.push_back(seg);
      }
    }
    s.stages.push_back(std::move(stage));
  }

  s.stage_pause = root.number_or("stage_pause", s.stage_pause);
  s.dt = root.number_or("dt", s.dt);
  s.noise_std = root.number_or("noise_std", s.noise_std);
  if (root.has("metrics")) {
    const Node m = root.at("metrics");
    s.success_threshold = m.number_or("success_threshold", s.success_threshold);
    s.convergence_band = m.number_or("convergence_band", s.convergence_band);
    s.steady_window = m.number_or("steady_window", s.steady_window);
  }

  s.validate();
  return s;
}

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> names;
  for (const auto& entry : detail::kBuiltinScenarios) names.emplace_back(entry.name);
  return names;
}

std::string builtin_scenario_text(std::string_view name) {
  for (const auto& entry : detail::kBuiltinScenarios) {
    if (entry.name == name) return std::string(entry.text);
  }
  throw ConfigError("unknown scenario preset '" + std::string(name) + "'");
}

Scenario load_scenario(const std::string& path_or_name) {
  const std::filesystem::path path(path_or_name);
  if (std::filesystem::is_regular_file(path)) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path_or_name + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.stem().string());
  }
  std::string stem = path.stem().string();
  for (const std::string& name : builtin_scenario_names()) {
    if (name == path_or_name || name == stem) return parse_scenario(builtin_scenario_text(name), name);
  }
  throw ConfigError(path_or_name + ": no such scenario file or preset");
}

}  // namespace ppcdom
