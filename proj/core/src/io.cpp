#include "ppcdom/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ppcdom {

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

void append_names(std::ostringstream& h, const char* prefix, int count) {
  for (int i = 1; i <= count; ++i) h << ',' << prefix << i;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error("csv: not a number: '" + s + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

nlohmann::json stats_json(const Statistics& s) {
  return {{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}, {"iqr", s.iqr()}};
}

nlohmann::json result_object(const RunResult& r) {
  return {{"method", to_string(r.method)},
          {"seed", r.seed},
          {"success", r.success},
          {"completed", r.completed},
          {"failure", r.failure},
          {"steady_state_error", r.steady_state_error},
          {"final_error_inf", r.final_error_inf},
          {"convergence_time", r.convergence_time},
          {"stage_convergence", r.stage_convergence},
          {"violation_count", r.violation_count},
          {"appendix_failures", r.appendix_failures},
          {"negative_ze", r.negative_ze},
          {"weights_clamped", r.weights_clamped},
          {"max_weight_norm_sq", r.max_weight_norm_sq}};
}

}  // namespace

std::string csv_header(int channels) {
  std::ostringstream h;
  h << 't';
  append_names(h, "e_", channels);
  append_names(h, "xi_", channels);
  append_names(h, "phi_a_", channels);
  append_names(h, "phi_b_", channels);
  append_names(h, "u_", kControlDim);
  h << ",norm_e,V1,violations";
  return h.str();
}

void write_csv(const RunLog& log, std::ostream& out) {
  out << csv_header(log.channels) << '\n';
  for (const StepRecord& r : log.steps) {
    put(out, r.stability.t);
    for (const Eigen::VectorXd* v : {&r.e, &r.xi, &r.lower, &r.upper}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        out << ',';
        put(out, (*v)[i]);
      }
    }
    for (int j = 0; j < kControlDim; ++j) {
      out << ',';
      put(out, r.u[j]);
    }
    out << ',';
    put(out, r.norm_e);
    out << ',';
    put(out, r.stability.v1);
    out << ',' << r.stability.violations << '\n';
  }
}

void write_csv(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_csv(log, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : split(line)) row.push_back(parse_double(cell));
    if (row.size() != table.header.size()) throw std::runtime_error("csv: row width differs from header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

std::string result_json(const RunResult& result, int indent) { return result_object(result).dump(indent); }

std::string summary_json(const ComparisonSummary& summary, int indent) {
  nlohmann::json doc;
  doc["scenario"] = summary.scenario;
  doc["seeds"] = summary.seeds;
  doc["success_definition"] = {
      {"threshold_inf_norm_m", summary.success_threshold},
      {"requires_zero_violations", true},
      {"convergence_band_inf_norm_m", summary.convergence_band},
  };
  nlohmann::json methods = nlohmann::json::array();
  for (const MethodSummary& m : summary.methods) {
    nlohmann::json runs = nlohmann::json::array();
    for (const RunResult& r : m.results) runs.push_back(result_object(r));
    methods.push_back({{"method", to_string(m.method)},
                       {"runs", m.runs},
                       {"success_rate", m.success_rate},
                       {"steady_state_error", stats_json(m.steady_state_error)},
                       {"convergence_time", stats_json(m.convergence_time)},
                       {"total_violations", m.total_violations},
                       {"results", runs}});
  }
  doc["methods"] = methods;
  return doc.dump(indent);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_summary(const ComparisonSummary& summary, const std::filesystem::path& path) {
  write_text(path, summary_json(summary) + "\n");
}

void write_babble_csv(const std::vector<BabbleSample>& log, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  const int xdim = log.empty() ? 0 : static_cast<int>(log.front().x.size());
  const int pdim = log.empty() ? 0 : static_cast<int>(log.front().pdot.size());
  std::ostringstream h;
  bool first = true;
  for (int i = 1; i <= xdim; ++i, first = false) h << (first ? "" : ",") << "x_" << i;
  for (int i = 1; i <= kControlDim; ++i, first = false) h << (first ? "" : ",") << "u_" << i;
  for (int i = 1; i <= pdim; ++i, first = false) h << (first ? "" : ",") << "pdot_" << i;
  out << h.str() << '\n';
  for (const BabbleSample& s : log) {
    bool lead = true;
    const auto cell = [&](double v) {
      if (!lead) out << ',';
      lead = false;
      put(out, v);
    };
    for (Eigen::Index i = 0; i < s.x.size(); ++i) cell(s.x[i]);
    for (int j = 0; j < kControlDim; ++j) cell(s.u[j]);
    for (Eigen::Index i = 0; i < s.pdot.size(); ++i) cell(s.pdot[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<BabbleSample> read_babble_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  int xdim = 0;
  int pdim = 0;
  for (const std::string& name : table.header) {
    if (name.rfind("x_", 0) == 0) ++xdim;
    if (name.rfind("pdot_", 0) == 0) ++pdim;
  }
  if (static_cast<int>(table.header.size()) != xdim + kControlDim + pdim) {
    throw std::runtime_error("babble csv: unexpected columns in " + path.string());
  }
  std::vector<BabbleSample> log;
  for (const auto& row : table.rows) {
    BabbleSample s;
    s.x = Eigen::Map<const Eigen::VectorXd>(row.data(), xdim);
    s.u = Eigen::Map<const Twist>(row.data() + xdim);
    s.pdot = Eigen::Map<const Eigen::VectorXd>(row.data() + xdim + kControlDim, pdim);
    log.push_back(std::move(s));
  }
  return log;
}

}  // namespace ppcdom
