#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace prequant {

enum class Verdict { pass, fail, info };

std::string to_string(Verdict verdict);
Verdict verdict_from_string(const std::string& text);

using Params = std::vector<std::pair<std::string, std::string>>;

struct ReportRow {
  std::string experiment;
  Params params;  // kept in insertion order
  double measured = 0.0;
  std::optional<double> oracle;
  std::optional<double> residual;
  Verdict verdict = Verdict::info;
  std::string note;

  /// "key=value;key=value" in insertion order.
  std::string canonical_params() const;
  const std::string* param(const std::string& key) const;
};

/// |measured - oracle| <= tolerance.
ReportRow compare_row(std::string experiment, Params params, double measured, double oracle,
                      double tolerance);
/// measured <= bound (adds a "bound" parameter, no oracle).
ReportRow at_most_row(std::string experiment, Params params, double measured, double bound);
/// measured >= bound.
ReportRow at_least_row(std::string experiment, Params params, double measured, double bound);
/// Recorded value, no verdict.
ReportRow info_row(std::string experiment, Params params, double measured,
                   std::optional<double> oracle = std::nullopt);
/// A row whose probe raised (e.g. a support-margin violation); counts as a failure.
ReportRow error_row(std::string experiment, Params params, const std::string& message);

/// Shortest round-trip decimal representation used everywhere in reports.
std::string format_number(double x);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct ConvergenceEstimate {
  std::string series;        // experiment plus the non-resolution parameters
  std::vector<double> spacings;
  std::vector<double> orders;  // between successive spacings
};

struct ReportSummary {
  std::size_t rows = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t informational = 0;
  std::optional<double> min_residual;
  std::optional<double> median_residual;
  std::optional<double> max_residual;
  std::vector<ConvergenceEstimate> convergence;
  std::vector<std::string> failures;  // canonical descriptions of failing rows
  bool pass() const { return failed == 0; }
};

/// Convergence series are built from rows carrying an "h" parameter (a grid spacing or step):
/// rows sharing experiment and all other parameters form one series, ordered by decreasing h.
ReportSummary summarize(std::span<const ReportRow> rows);

void write_csv(std::ostream& out, std::span<const ReportRow> rows);

nlohmann::json to_json(const ReportRow& row);
ReportRow row_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReportSummary& summary);

}  // namespace prequant
