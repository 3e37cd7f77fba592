#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "plemelj/common.hpp"

namespace plemelj::cli {

enum class Operation { pv, transform, boundary, converge, classify, exists, verify_jump };
const char* to_string(Operation op);
Operation operation_from_string(const std::string& s);

/// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;    ///< usage, IO, schema or library error
inline constexpr int exit_verdict = 2;  ///< not converged / fails / jump above tolerance

struct CurveSpec {
  std::string builtin;  ///< empty when points_file is used
  std::vector<double> params;
  std::string points_file;
  std::optional<bool> closed;
};

struct DensitySpec {
  std::string builtin;
  std::vector<double> params;
  std::string table;
};

struct Settings {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_subdivisions = 2000;
  int excision_first = 4;
  int excision_last = 40;
  std::string method = "automatic";  ///< automatic | subtraction | excision | disk
  int depth = 30;                    ///< sequence length (converge) or existence depth
  std::string side = "left";
  std::string shape = "normal";
  double ratio = 0.5;
  double tol = 1e-6;
  double near_distance = 1e-3;
  int n_pairs = 4096;
  int bootstrap = 16;
};

struct ExperimentConfig {
  Operation operation = Operation::pv;
  std::optional<CurveSpec> curve;
  std::optional<DensitySpec> density;
  std::vector<double> targets;
  std::vector<Complex> points;
  Settings settings;
  std::string out = ".";
  std::uint64_t seed = 1;
  bool depth_set = false;  ///< depth given explicitly (otherwise per-operation default)
};

/// JSON pointer of every value in `text` mapped to its 1-based line.
std::map<std::string, int> json_value_lines(const std::string& text);

/// Parses and schema-checks a config. Errors are ErrorKind::schema with
/// "<source>:<line>: <pointer>: <message>".
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              std::optional<Operation> operation = std::nullopt);

/// Runs one experiment, writing report files under cfg.out.
int run(const ExperimentConfig& cfg, std::ostream& log);

/// Full front end: argv parsing, config loading, dispatch, error mapping.
int main(int argc, char** argv);

}  // namespace plemelj::cli
