#include <CLI11.hpp>
#include <fmt/core.h>

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <thread>

#include "prequant/experiments.hpp"
#include "prequant/report.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

void print_summary(const std::string& experiment, const prequant::ReportSummary& summary) {
  fmt::print("{}: {} rows, {} pass, {} fail, {} info\n", experiment, summary.rows, summary.passed,
             summary.failed, summary.informational);
  if (summary.max_residual) {
    fmt::print("  residual min/median/max: {} / {} / {}\n",
               prequant::format_number(*summary.min_residual),
               prequant::format_number(*summary.median_residual),
               prequant::format_number(*summary.max_residual));
  }
  for (const auto& estimate : summary.convergence) {
    std::string orders;
    for (double order : estimate.orders) orders += " " + prequant::format_number(order);
    fmt::print("  orders{} [{}]\n", orders, estimate.series);
  }
  for (const auto& failure : summary.failures) fmt::print("  FAIL {}\n", failure);
  fmt::print("{}\n", summary.pass() ? "PASS" : "FAIL");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw prequant::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw prequant::ConfigError(path + ": " + e.what());
  }
}

int run_command(const std::string& config_path, const std::string& out_dir, int jobs) {
  const auto config = prequant::ExperimentConfig::from_json(read_json(config_path));
  const auto rows = prequant::run(config, jobs);
  const auto paths =
      prequant::write_reports(config, rows, out_dir.empty() ? config.output_dir : out_dir);
  const auto summary = prequant::summarize(rows);
  print_summary(prequant::to_string(config.experiment), summary);
  fmt::print("wrote {} and {}\n", paths.csv.string(), paths.json.string());
  return summary.pass() ? kExitPass : kExitFail;
}

int summarize_command(const std::string& report_path) {
  const auto report = read_json(report_path);
  if (!report.contains("rows") || !report["rows"].is_array()) {
    throw prequant::ConfigError(report_path + " has no 'rows' array");
  }
  std::vector<prequant::ReportRow> rows;
  for (const auto& row : report["rows"]) rows.push_back(prequant::row_from_json(row));
  const auto summary = prequant::summarize(rows);
  print_summary(report.value("experiment", std::string("report")), summary);
  return summary.pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for the prequantum line bundle over the affine-group parameter space"};
  app.require_subcommand(1);

  std::string config_path, out_dir, report_path;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* run = app.add_subcommand("run", "Run one experiment and write <id>.csv / <id>.json");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Output directory (overrides output_dir in the config)");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* summarize = app.add_subcommand("summarize", "Summarize an existing JSON report");
  summarize->add_option("report", report_path, "Report written by 'run'")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (*run) return run_command(config_path, out_dir, jobs);
    return summarize_command(report_path);
  } catch (const prequant::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
