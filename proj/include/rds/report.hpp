#pragma once

// Experiment output: CSV tables and a versioned summary JSON. Numbers are
// printed with 17 significant digits so equal runs give equal bytes.

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace rds {

using Json = nlohmann::ordered_json;

/// printf("%.17g"), with "inf", "-inf" and "nan" spelled out.
std::string format_double(double v);

/// JSON value for a double; non-finite values become strings.
Json json_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  void add_numbers(const std::vector<double>& values);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// One checked quantity: value compared with a target under a tolerance.
struct Statistic {
  enum class Rule { AbsDiff, AtMost, AtLeast, Info };

  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  Rule rule = Rule::Info;
  bool pass = true;

  /// |value - target| <= tolerance
  static Statistic within(std::string name, double value, double target, double tolerance);
  /// value <= bound (target and tolerance both record the bound)
  static Statistic at_most(std::string name, double value, double bound);
  /// value >= bound
  static Statistic at_least(std::string name, double value, double bound);
  /// reported without a pass/fail claim
  static Statistic info(std::string name, double value);
};

const char* to_string(Statistic::Rule r) noexcept;

class ExperimentReport {
 public:
  explicit ExperimentReport(std::string mode) : mode_(std::move(mode)) {}

  const std::string& mode() const noexcept { return mode_; }

  void set_config(std::vector<std::pair<std::string, std::string>> entries) {
    config_ = std::move(entries);
  }
  Json& info() noexcept { return info_; }
  const Json& info() const noexcept { return info_; }

  void add(Statistic s) { stats_.push_back(std::move(s)); }
  const std::vector<Statistic>& statistics() const noexcept { return stats_; }
  /// Throws std::out_of_range if absent.
  const Statistic& statistic(const std::string& name) const;

  void add_table(std::string file_name, CsvTable table) {
    tables_.emplace_back(std::move(file_name), std::move(table));
  }
  const std::vector<std::pair<std::string, CsvTable>>& tables() const noexcept { return tables_; }

  bool all_pass() const noexcept;

  Json summary() const;
  std::string summary_text() const { return summary().dump(2) + "\n"; }

  /// Writes summary.json and every table into dir (created if needed).
  void write(const std::string& dir) const;

 private:
  std::string mode_;
  std::vector<std::pair<std::string, std::string>> config_;
  Json info_ = Json::object();
  std::vector<Statistic> stats_;
  std::vector<std::pair<std::string, CsvTable>> tables_;
};

}  // namespace rds
