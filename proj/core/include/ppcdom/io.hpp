#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppcdom/estimator.hpp"
#include "ppcdom/runner.hpp"

namespace ppcdom {

/// Header: t,e_1..e_3n,xi_1..,phi_a_1..,phi_b_1..,u_1..u_12,norm_e,V1,violations
std::string csv_header(int channels);

/// One row per logged step; doubles are written with 17 significant digits.
void write_csv(const RunLog& log, std::ostream& out);
void write_csv(const RunLog& log, const std::filesystem::path& path);

/// Parsed numeric table (header plus rows) for consumers of the run CSV.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);
CsvTable read_csv(std::istream& in);

std::string summary_json(const ComparisonSummary& summary, int indent = 2);
std::string result_json(const RunResult& result, int indent = 2);
void write_summary(const ComparisonSummary& summary, const std::filesystem::path& path);

/// Babbling log as CSV: x_1..x_d, u_1..u_12, pdot_1..pdot_3n.
void write_babble_csv(const std::vector<BabbleSample>& log, const std::filesystem::path& path);
std::vector<BabbleSample> read_babble_csv(const std::filesystem::path& path);

/// Writes text to a file, throwing std::runtime_error on I/O failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ppcdom
