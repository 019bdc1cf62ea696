#include "prequant/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>

namespace prequant {

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "info";
  }
}

Verdict verdict_from_string(const std::string& text) {
  if (text == "pass") return Verdict::pass;
  if (text == "fail") return Verdict::fail;
  if (text == "info") return Verdict::info;
  throw std::invalid_argument("unknown verdict '" + text + "'");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

std::string ReportRow::canonical_params() const {
  std::string text;
  for (const auto& [key, value] : params) {
    if (!text.empty()) text += ';';
    text += key + '=' + value;
  }
  return text;
}

const std::string* ReportRow::param(const std::string& key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return &v;
  }
  return nullptr;
}

ReportRow compare_row(std::string experiment, Params params, double measured, double oracle,
                      double tolerance) {
  const double residual = std::abs(measured - oracle);
  params.emplace_back("tol", format_number(tolerance));
  return {std::move(experiment), std::move(params), measured, oracle, residual,
          residual <= tolerance ? Verdict::pass : Verdict::fail, {}};
}

ReportRow at_most_row(std::string experiment, Params params, double measured, double bound) {
  params.emplace_back("bound", "<=" + format_number(bound));
  return {std::move(experiment), std::move(params), measured, std::nullopt, std::nullopt,
          measured <= bound ? Verdict::pass : Verdict::fail, {}};
}

ReportRow at_least_row(std::string experiment, Params params, double measured, double bound) {
  params.emplace_back("bound", ">=" + format_number(bound));
  return {std::move(experiment), std::move(params), measured, std::nullopt, std::nullopt,
          measured >= bound ? Verdict::pass : Verdict::fail, {}};
}

ReportRow info_row(std::string experiment, Params params, double measured,
                   std::optional<double> oracle) {
  std::optional<double> residual;
  if (oracle) residual = std::abs(measured - *oracle);
  return {std::move(experiment), std::move(params), measured, oracle, residual, Verdict::info, {}};
}

ReportRow error_row(std::string experiment, Params params, const std::string& message) {
  return {std::move(experiment), std::move(params), std::nan(""), std::nullopt, std::nullopt,
          Verdict::fail, message};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("slope fit needs at least two matching points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ReportSummary summarize(std::span<const ReportRow> rows) {
  ReportSummary summary;
  summary.rows = rows.size();
  std::vector<double> residuals;
  // series key -> (h, measured) in first-seen order of keys
  std::vector<std::string> series_order;
  std::map<std::string, std::vector<std::pair<double, double>>> series;

  for (const auto& row : rows) {
    switch (row.verdict) {
      case Verdict::pass: ++summary.passed; break;
      case Verdict::fail:
        ++summary.failed;
        summary.failures.push_back(row.experiment + " [" + row.canonical_params() + "] " +
                                   (row.note.empty() ? "measured=" + format_number(row.measured)
                                                     : row.note));
        break;
      case Verdict::info: ++summary.informational; break;
    }
    if (row.residual && std::isfinite(*row.residual)) residuals.push_back(*row.residual);

    const std::string* h = row.param("h");
    if (h == nullptr || !(row.measured > 0.0)) continue;
    std::string key = row.experiment;
    for (const auto& [k, v] : row.params) {
      if (k != "h" && k != "n_v" && k != "n_q" && k != "u") key += ";" + k + "=" + v;
    }
    if (!series.contains(key)) series_order.push_back(key);
    series[key].emplace_back(std::stod(*h), row.measured);
  }

  if (!residuals.empty()) {
    std::sort(residuals.begin(), residuals.end());
    summary.min_residual = residuals.front();
    summary.max_residual = residuals.back();
    const std::size_t mid = residuals.size() / 2;
    summary.median_residual = residuals.size() % 2 == 1
                                  ? residuals[mid]
                                  : 0.5 * (residuals[mid - 1] + residuals[mid]);
  }

  for (const auto& key : series_order) {
    auto points = series[key];
    if (points.size() < 2) continue;
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    ConvergenceEstimate estimate{key, {}, {}};
    for (std::size_t i = 0; i < points.size(); ++i) {
      estimate.spacings.push_back(points[i].first);
      if (i == 0) continue;
      estimate.orders.push_back(std::log(points[i - 1].second / points[i].second) /
                                std::log(points[i - 1].first / points[i].first));
    }
    summary.convergence.push_back(std::move(estimate));
  }
  return summary;
}

namespace {

std::string optional_number(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

nlohmann::json number_or_null(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

}  // namespace

void write_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << "experiment,params,measured,oracle,residual,verdict\n";
  for (const auto& row : rows) {
    out << csv_field(row.experiment) << ',' << csv_field(row.canonical_params()) << ','
        << format_number(row.measured) << ',' << optional_number(row.oracle) << ','
        << optional_number(row.residual) << ',' << to_string(row.verdict) << '\n';
  }
}

nlohmann::json to_json(const ReportRow& row) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [k, v] : row.params) params.push_back({k, v});
  nlohmann::json j = {{"experiment", row.experiment},
                      {"params", params},
                      {"measured", number_or_null(row.measured)},
                      {"oracle", number_or_null(row.oracle)},
                      {"residual", number_or_null(row.residual)},
                      {"verdict", to_string(row.verdict)}};
  if (!row.note.empty()) j["note"] = row.note;
  return j;
}

ReportRow row_from_json(const nlohmann::json& j) {
  ReportRow row;
  row.experiment = j.at("experiment").get<std::string>();
  for (const auto& pair : j.at("params")) {
    row.params.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  }
  row.measured = j.at("measured").is_null() ? std::nan("") : j.at("measured").get<double>();
  if (!j.at("oracle").is_null()) row.oracle = j.at("oracle").get<double>();
  if (!j.at("residual").is_null()) row.residual = j.at("residual").get<double>();
  row.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  if (j.contains("note")) row.note = j.at("note").get<std::string>();
  return row;
}

nlohmann::json to_json(const ReportSummary& summary) {
  nlohmann::json convergence = nlohmann::json::array();
  for (const auto& c : summary.convergence) {
    convergence.push_back({{"series", c.series}, {"spacings", c.spacings}, {"orders", c.orders}});
  }
  return {{"rows", summary.rows},
          {"passed", summary.passed},
          {"failed", summary.failed},
          {"informational", summary.informational},
          {"min_residual", number_or_null(summary.min_residual)},
          {"median_residual", number_or_null(summary.median_residual)},
          {"max_residual", number_or_null(summary.max_residual)},
          {"convergence", convergence},
          {"failures", summary.failures},
          {"verdict", summary.pass() ? "pass" : "fail"}};
}

}  // namespace prequant
