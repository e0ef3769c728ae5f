#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ngl/drivers.hpp"
#include "ngl/errors.hpp"
#include "ngl/oracles.hpp"

namespace ngl::harness {

using Json = nlohmann::ordered_json;

// Malformed or inconsistent configuration. line() is 0 when the offending
// field has no source line (JSON input or a cross-field check).
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

// Parsed configuration text plus the source line of every dotted key.
struct ConfigDocument {
  Json root = Json::object();
  std::map<std::string, int> lines;

  int line_of(const std::string& key) const;
};

// Accepts either a JSON object or flat "dotted.key = value" lines, with
// optional "[section]" headers and full-line '#' comments. Values are JSON
// literals; anything that does not parse as JSON is taken as a bare string.
ConfigDocument parse_config_text(const std::string& text);
ConfigDocument load_config_file(const std::string& path);

struct ProblemSpec {
  std::string family = "nesterov_strongly_convex";
  int n = 100;
  int k = 100;  // chain length of the convex family; n when absent
  double mu = 1.0;
  double L = 100.0;
  // Quadratic family only: eigenvalues of the diagonal matrix (linearly
  // spaced from mu to L when empty) and the linear term (-A 1 when empty).
  std::vector<double> diag;
  std::vector<double> b;
};

struct OracleSpec {
  std::string kind = "noisy";
  NoiseMode mode = NoiseMode::none;
  double alpha = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::string compressor = "top_k";
  int compressor_param = 0;
  double fd_h = 1e-6;
  double fd_value_noise = 0.0;
  int precision = 52;
  // l1 radius used to declare the floating-point delta; derived when absent.
  std::optional<double> x_l1_radius;
};

struct SolverSpec {
  SolverKind kind = SolverKind::gd;
  std::int64_t N = 1000;
  // Relative level the method is configured with; the oracle's declared
  // alpha when absent.
  std::optional<double> alpha;
  // Adaptive method: initial L estimate (L when absent) and whether L adapts.
  std::optional<double> L0;
  bool adapt_L = false;
  std::int64_t record_stride = 1;
  double step_scale = 1.0;
  // Early exit once the gap reaches target_gap, or target_rel times the
  // initial gap.
  std::optional<double> target_gap;
  std::optional<double> target_rel;
};

enum class DriverKind { none, regularize, stopping, restart, combined };

DriverKind parse_driver(const std::string& text);
std::string to_string(DriverKind kind);

struct DriverSpec {
  DriverKind kind = DriverKind::none;
  double epsilon = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  double K = 0.0;
  // Distance bound |x0 - x*|; taken from the analytic minimizer when absent.
  std::optional<double> R;
};

struct ExperimentConfig {
  std::string name = "run";
  ProblemSpec problem;
  OracleSpec oracle;
  SolverSpec solver;
  DriverSpec driver;
  // Every coordinate of x0.
  double x0_fill = 0.0;
  std::string out_dir = "out";
};

// Reads and validates an experiment from the document root, ignoring the
// "sweep" section. Unknown keys and type errors raise ConfigError.
ExperimentConfig experiment_from(const ConfigDocument& doc);

// Cross-field checks that do not need a built problem.
void validate(const ExperimentConfig& cfg);

struct SweepAxis {
  std::string key;
  std::vector<Json> values;
};

struct SweepRun {
  ExperimentConfig config;
  // Value of every axis for this run, in axis order.
  std::vector<Json> point;
};

struct SweepPlan {
  std::vector<SweepAxis> axes;
  std::vector<SweepRun> runs;
};

// Expands the cross product of every "sweep.<dotted key> = [values]" axis.
// Without axes the plan holds the single base experiment. Each run writes to
// <out_dir>/run_<index> when there are axes.
SweepPlan plan_sweep(const ConfigDocument& doc);

// Replaces the oracle seed with NGL_SEED when that variable is set.
void apply_environment(ExperimentConfig& cfg);

}  // namespace ngl::harness
