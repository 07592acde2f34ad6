// teleqcp: run detector sweeps from a YAML config, cross-check a config with
// the full teleportation protocol, or regenerate one of the figure analogues.
//
// Exit codes: 0 ok, 1 config error, 2 numerical-consistency failure,
// 3 some sweeps failed.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "teleqcp/errors.hpp"
#include "teleqcp/io.hpp"

#ifndef TELEQCP_VERSION
#define TELEQCP_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace teleqcp;

namespace {

constexpr int kConfigError = 1;

struct Overrides {
  std::optional<int> workers;
  std::string out;
  bool quiet = false;
};

// Flag beats environment beats config file.
void apply(RunConfig& c, const Overrides& o) {
  if (auto env = workers_from_environment()) c.workers = *env;
  if (o.workers) c.workers = *o.workers;
  if (!o.out.empty()) c.output_dir = o.out;
}

int execute(const RunConfig& c, const Overrides& o) {
  auto bundle = run(c, o.quiet ? nullptr : &std::cerr);
  const int code = bundle.exit_code();
  if (!o.quiet) {
    int failed = 0;
    for (const auto& r : bundle.reports) failed += !r.ok;
    std::cerr << bundle.reports.size() - failed << "/" << bundle.reports.size() << " sweeps ok, results in "
              << bundle.directory.string() << "\n";
  }
  return code;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-w,--workers", o.workers, "worker threads (overrides the config and TELEQCP_WORKERS)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out", o.out, "output directory (overrides output_dir)");
  cmd->add_flag("-q,--quiet", o.quiet, "no progress on stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleportation-based detection of quantum critical points in spin chains"};
  app.set_version_flag("--version", TELEQCP_VERSION);
  app.require_subcommand(1);

  Overrides run_o, val_o, rep_o;
  std::string config_path, validate_path, figure;
  bool protocol = false, emit_config = false;
  int max_length = 6, max_points = 11;

  auto* run_cmd = app.add_subcommand("run", "run every sweep in a config");
  run_cmd->add_option("config", config_path, "YAML config")->required();
  run_cmd->add_flag("--protocol", protocol, "evaluate the full protocol and cross-check the closed forms");
  add_common(run_cmd, run_o);

  auto* val_cmd = app.add_subcommand(
      "validate", "check a config, then run a small-L protocol copy of it against the closed forms");
  val_cmd->add_option("config", validate_path, "YAML config")->required();
  val_cmd->add_option("--max-length", max_length, "chain length cap")->check(CLI::Range(2, 12));
  val_cmd->add_option("--max-points", max_points, "grid points per sweep cap")->check(CLI::Range(4, 1000));
  add_common(val_cmd, val_o);

  auto* rep_cmd = app.add_subcommand("reproduce", "run a figure analogue");
  rep_cmd->add_option("figure", figure, "figure id")
      ->required()
      ->check(CLI::IsMember(figure_ids()));
  rep_cmd->add_flag("--print-config", emit_config, "print the config as YAML and exit");
  add_common(rep_cmd, rep_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) {
      auto c = parse_config(config_path);
      if (protocol) c.validation = true;
      apply(c, run_o);
      return execute(c, run_o);
    }
    if (*val_cmd) {
      auto c = parse_config(validate_path);
      for (const auto& s : c.sweeps) s.validate();
      apply(c, val_o);
      auto v = validation_config(c, max_length, max_points);
      if (val_o.out.empty()) v.output_dir = (fs::temp_directory_path() / "teleqcp-validate").string();
      if (!val_o.quiet) std::cerr << "config ok: " << c.sweeps.size() << " sweeps\n";
      return execute(v, val_o);
    }
    auto c = figure_config(figure);
    if (emit_config) {
      std::cout << serialize(c);
      return 0;
    }
    apply(c, rep_o);
    return execute(c, rep_o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalConsistencyError& e) {
    std::cerr << "numerical consistency failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
