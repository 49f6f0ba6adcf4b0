#include "rds/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "rds/error.hpp"

namespace rds {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json json_number(double v) {
  if (std::isfinite(v)) return Json(v);
  return Json(format_double(v));
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CSV row width mismatch");
  rows_.push_back(std::move(cells));
}

void CsvTable::add_numbers(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

Statistic Statistic::within(std::string name, double value, double target, double tolerance) {
  return {std::move(name), value, target, tolerance, Rule::AbsDiff,
          std::abs(value - target) <= tolerance};
}

Statistic Statistic::at_most(std::string name, double value, double bound) {
  return {std::move(name), value, bound, bound, Rule::AtMost, value <= bound};
}

Statistic Statistic::at_least(std::string name, double value, double bound) {
  return {std::move(name), value, bound, bound, Rule::AtLeast, value >= bound};
}

Statistic Statistic::info(std::string name, double value) {
  return {std::move(name), value, 0.0, 0.0, Rule::Info, true};
}

const char* to_string(Statistic::Rule r) noexcept {
  switch (r) {
    case Statistic::Rule::AbsDiff: return "abs_diff_le";
    case Statistic::Rule::AtMost: return "at_most";
    case Statistic::Rule::AtLeast: return "at_least";
    case Statistic::Rule::Info: return "info";
  }
  return "unknown";
}

const Statistic& ExperimentReport::statistic(const std::string& name) const {
  for (const auto& s : stats_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no statistic named " + name);
}

bool ExperimentReport::all_pass() const noexcept {
  for (const auto& s : stats_) {
    if (!s.pass) return false;
  }
  return true;
}

Json ExperimentReport::summary() const {
  Json j;
  j["schema"] = 1;
  j["mode"] = mode_;
  Json cfg = Json::object();
  for (const auto& [k, v] : config_) cfg[k] = v;
  j["config"] = cfg;
  j["info"] = info_;
  Json stats = Json::array();
  for (const auto& s : stats_) {
    Json e;
    e["name"] = s.name;
    e["value"] = json_number(s.value);
    e["rule"] = to_string(s.rule);
    e["target"] = json_number(s.target);
    e["tolerance"] = json_number(s.tolerance);
    e["pass"] = s.pass;
    stats.push_back(e);
  }
  j["statistics"] = stats;
  j["pass"] = all_pass();
  return j;
}

void ExperimentReport::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  auto put = [&dir](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write " + name + " in '" + dir + "'");
    out << text;
  };
  put("summary.json", summary_text());
  for (const auto& [name, table] : tables_) put(name, table.str());
}

}  // namespace rds
