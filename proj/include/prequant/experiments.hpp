#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prequant/affine.hpp"
#include "prequant/grid_function.hpp"
#include "prequant/report.hpp"

namespace prequant {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class ExperimentId {
  verify_unitarity,
  verify_homomorphism,
  verify_prop32,
  verify_curvature,
  probe_derivative,
  probe_nondiff,
  transition_smoothness,
  norm_identity,
};

std::string to_string(ExperimentId id);
ExperimentId experiment_from_string(const std::string& text);
const std::vector<ExperimentId>& all_experiments();

enum class Backend { analytic, grid };

/// One experiment run. Parsed from a JSON document; see configs/ and README for the schema.
/// Optional lists left unset take per-experiment defaults; lists given explicitly empty
/// suppress the corresponding sweep.
struct ExperimentConfig {
  ExperimentId experiment = ExperimentId::verify_unitarity;
  Backend backend = Backend::analytic;
  GridSpec grid;  // grid.config is the torus
  std::optional<std::uint64_t> seed;
  int samples = 100;
  std::optional<std::vector<double>> u_values;
  std::optional<std::vector<double>> rough_u_values;
  std::optional<std::vector<double>> radii;
  std::optional<std::vector<int>> resolutions;
  std::optional<std::vector<int>> dimensions;
  std::optional<AffineElement> sigma;
  UpperHalfPlanePoint base_point{0.0, 1.0};
  double grid_tolerance = 1e-6;
  std::string output_dir = ".";

  /// Throws ConfigError on unknown keys, wrong types or out-of-range values.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const TorusConfig& torus() const { return grid.config; }
};

/// Executes the configured probe. Rows are deterministic given (config, seed) and are
/// returned in a fixed order regardless of `jobs`.
std::vector<ReportRow> run(const ExperimentConfig& config, int jobs = 1);

struct ReportPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
};

/// Writes <output_dir>/<experiment>.csv and <experiment>.json (config, rows, summary).
ReportPaths write_reports(const ExperimentConfig& config, const std::vector<ReportRow>& rows,
                          const std::filesystem::path& output_dir);

/// Closed-form difference quotient of the indicator 1_[0,1](v) on the circle of length
/// 2 pi along the dilation subgroup.
double indicator_dilation_quotient(double u);

}  // namespace prequant
