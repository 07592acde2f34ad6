#pragma once

// Run configuration, batch execution and result files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teleqcp/scan.hpp"

namespace teleqcp {

/// Malformed, out-of-range or unknown configuration entries.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<SweepSpec> sweeps;
  std::string output_dir = "results";
  int workers = 1;
  bool validation = false;  // evaluate the full protocol and cross-check the closed forms
  bool plot_scripts = true;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Strict YAML reader: unknown keys, bad types and range violations raise
/// ConfigError with the file position and the field path.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Canonical text; parse_config_text(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// FNV-1a of the canonical text with workers and output_dir left out, since
/// neither changes any table.
std::uint64_t config_hash(const RunConfig& config);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Name of the environment variable that overrides the worker count.
inline constexpr const char* kWorkersVariable = "TELEQCP_WORKERS";

/// Parsed value of kWorkersVariable; nullopt when unset or empty. Throws
/// ConfigError on anything but a positive integer.
std::optional<int> workers_from_environment();

struct SweepReport {
  std::string name;
  bool ok = false;
  bool numerical_failure = false;
  std::string message;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Files written for one finished sweep, relative to the bundle directory.
struct SweepTables {
  std::string sweep;
  TuningParameter parameter = TuningParameter::Delta;
  std::vector<std::filesystem::path> curves;  // one per (detector, kT)
  std::filesystem::path estimates;            // empty when no estimate was made
};

struct ResultBundle {
  std::filesystem::path directory;
  std::vector<SweepTables> tables;
  std::vector<SweepReport> reports;

  /// 0 if every sweep succeeded, 2 if any failed a numerical-consistency
  /// check, 3 for other per-sweep failures.
  int exit_code() const;
};

/// Runs every sweep, writes the tables and the manifest. A failing sweep does
/// not stop the others; tables keep the rows of the sweeps that finished.
ResultBundle run(const RunConfig& config, std::ostream* log = nullptr);

/// One gnuplot script per sweep and table family, written under plots/.
/// Scripts only reference tables by relative path. Throws std::runtime_error
/// naming a missing table.
std::vector<std::filesystem::path> emit_plot_scripts(const ResultBundle& bundle);

/// Figure analogues understood by `reproduce`, plus "all".
std::vector<std::string> figure_ids();
RunConfig figure_config(const std::string& id);

/// Small-L, coarse-grid protocol copy of a config, used by `validate`.
RunConfig validation_config(const RunConfig& config, int max_length = 6, int max_points = 11);

}  // namespace teleqcp
