#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "teleqcp/io.hpp"

using namespace teleqcp;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(output_dir: unused
workers: 2
sweeps:
  - name: xx-small
    model: {family: xy, L: 4, gamma: 0.0}
    parameter: lambda
    range: [0.0, 2.0]
    step: 0.05
    temperatures: [0.05, 0.5]
  - name: xxz-small
    model: {family: xxz, L: [4, 5], h: 12}
    parameter: delta
    range: [0, 6]
    step: 0.1
    temperatures: [0.1, 0.5]
    detectors: [D_int]
    windows: [{lo: 1.5, hi: 2.5}, {lo: 4, hi: 5.5, order: 2}]
    filter: {radius: 0.1, drift: 0.5}
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("teleqcp-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(TELEQCP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value) setenv(kWorkersVariable, value, 1);
    else unsetenv(kWorkersVariable);
  }
  ~EnvGuard() { unsetenv(kWorkersVariable); }
};

}  // namespace

TEST_CASE("config round trip") {
  const auto c = parse_config_text(kSmall);
  REQUIRE(c.sweeps.size() == 3);
  CHECK(c.sweeps[1].name == "xxz-small-L4");
  CHECK(c.sweeps[2].base.length == 5);
  CHECK(c.sweeps[2].base.field == 12.0);
  CHECK(c.sweeps[2].windows[1] == Window{4.0, 5.5, 2});
  CHECK(c.sweeps[2].filter.radius == 0.1);
  CHECK(c.sweeps[2].filter.high_kT == 0.5);
  CHECK(c.workers == 2);
  const auto again = parse_config_text(serialize(c));
  CHECK(again == c);
  CHECK(serialize(again) == serialize(c));

  const auto fig = figure_config("fig5");
  CHECK(parse_config_text(serialize(fig)) == fig);
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("config hash ignores workers and output directory") {
  auto c = parse_config_text(kSmall);
  const auto h = config_hash(c);
  c.workers = 7;
  c.output_dir = "elsewhere";
  CHECK(config_hash(c) == h);
  c.sweeps[0].temperatures.push_back(1.0);
  CHECK(config_hash(c) != h);
}

TEST_CASE("config errors name the field") {
  auto bad = [](const std::string& text) -> std::string {
    try {
      parse_config_text(text, "t.yaml");
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  const std::string base = "sweeps:\n  - name: a\n    model: {family: xy, L: 4}\n    parameter: lambda\n"
                           "    range: [0, 2]\n";
  CHECK(bad(base + "    temperatures: [0.1]\n").empty());

  const auto neg = bad(base + "    temperatures: [0.1, -0.5]\n");
  CHECK(neg.find("sweeps[0].temperatures[1]") != std::string::npos);
  CHECK(neg.find("t.yaml:") == 0);

  CHECK(bad(base + "    temperatures: [0.1]\n    colour: red\n").find("sweeps[0].colour: unknown key") !=
        std::string::npos);
  CHECK(bad(base).find("temperatures") != std::string::npos);
  CHECK(bad("workers: 0\n").find("workers") != std::string::npos);
  CHECK(bad("sweeps: [\n").find("malformed YAML") != std::string::npos);
  CHECK(bad("sweeps:\n  - name: a\n    model: {family: xxz, L: 40}\n    parameter: delta\n    range: [0, 2]\n"
            "    temperatures: [1]\n")
            .find("model.L") != std::string::npos);
  CHECK(bad(base + "    temperatures: [0.1]\n    windows: [{lo: 1.5, hi: 2.5}]\n").find("window") !=
        std::string::npos);
  CHECK(bad(base + "    temperatures: [0.1]\n  - name: a\n    model: {family: xy, L: 4}\n"
                   "    parameter: lambda\n    range: [0, 2]\n    temperatures: [0.1]\n")
            .find("duplicate") != std::string::npos);
  CHECK_THROWS_AS(parse_config("/nonexistent/teleqcp.yaml"), ConfigError);
}

TEST_CASE("figure configs") {
  const auto ids = figure_ids();
  CHECK(std::find(ids.begin(), ids.end(), "all") != ids.end());
  const auto all = figure_config("all");
  CHECK(all.sweeps.size() >= 30);
  for (const auto& s : all.sweeps) CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS(figure_config("fig99"), ConfigError);
  const auto v = validation_config(figure_config("fig1"), 6, 11);
  CHECK(v.validation);
  for (const auto& s : v.sweeps) {
    CHECK(s.base.length <= 6);
    CHECK(s.grid().size() <= 11);
  }
}

TEST_CASE("empty config runs and exits cleanly") {
  auto c = parse_config_text("");
  CHECK(c.sweeps.empty());
  c.output_dir = scratch("empty").string();
  const auto bundle = run(c);
  CHECK(bundle.exit_code() == 0);
  CHECK(fs::exists(bundle.directory / "manifest.yaml"));
  CHECK(slurp(bundle.directory / "estimates.csv").find("sweep,model") == 0);
}

TEST_CASE("small run writes complete, deterministic tables") {
  auto c = parse_config_text(kSmall);
  c.output_dir = scratch("run-a").string();
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = run(c);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 5.0);
  CHECK(a.exit_code() == 0);
  REQUIRE(a.tables.size() == 3);
  CHECK(a.tables[0].curves.size() == 4);
  CHECK(a.tables[1].curves.size() == 2);

  const auto curve = slurp(a.directory / a.tables[0].curves[0]);
  CHECK(curve.find("model,L,parameter,kT,detector,x,value,d1,d2,branch") == 0);
  CHECK(std::count(curve.begin(), curve.end(), '\n') == 42);

  const auto manifest = slurp(a.directory / "manifest.yaml");
  CHECK(manifest.find("config_hash:") != std::string::npos);
  CHECK(manifest.find("eigen_version:") != std::string::npos);
  CHECK(manifest.find("status: ok") != std::string::npos);
  CHECK(parse_config(a.directory / "config.yaml") == c);

  auto c2 = c;
  c2.output_dir = scratch("run-b").string();
  c2.workers = 1;
  const auto b = run(c2);
  for (const auto& t : a.tables)
    for (const auto& rel : t.curves) CHECK(slurp(a.directory / rel) == slurp(b.directory / rel));
  for (const char* f : {"estimates.csv", "extrapolations.csv", "coincidence.csv"})
    CHECK(slurp(a.directory / f) == slurp(b.directory / f));
  for (const auto& t : a.tables) {
    const auto rel = fs::path("plots") / (t.sweep + ".gp");
    CHECK(fs::exists(a.directory / rel));
    CHECK(slurp(a.directory / rel) == slurp(b.directory / rel));
    // Scripts only refer to tables by relative path.
    CHECK(slurp(a.directory / rel).find(a.directory.string()) == std::string::npos);
  }
}

TEST_CASE("plot scripts need their tables") {
  auto c = parse_config_text(kSmall);
  c.sweeps.resize(1);
  c.plot_scripts = false;
  c.output_dir = scratch("plots").string();
  const auto bundle = run(c);
  CHECK_FALSE(fs::exists(bundle.directory / "plots"));
  CHECK(emit_plot_scripts(bundle).size() == 1);
  fs::remove(bundle.directory / bundle.tables[0].curves[1]);
  CHECK_THROWS_WITH_AS(emit_plot_scripts(bundle), doctest::Contains("missing table"), std::runtime_error);
}

TEST_CASE("exit codes of a result bundle") {
  ResultBundle b;
  CHECK(b.exit_code() == 0);
  b.reports.push_back({"a", true});
  CHECK(b.exit_code() == 0);
  b.reports.push_back({"b", false, false, "boom"});
  CHECK(b.exit_code() == 3);
  b.reports.push_back({"c", false, true, "mismatch"});
  CHECK(b.exit_code() == 2);
}

TEST_CASE("worker count from the environment") {
  {
    EnvGuard g(nullptr);
    CHECK_FALSE(workers_from_environment().has_value());
  }
  {
    EnvGuard g("");
    CHECK_FALSE(workers_from_environment().has_value());
  }
  {
    EnvGuard g("6");
    CHECK(workers_from_environment() == 6);
  }
  for (const char* junk : {"0", "-2", "four", "3x"}) {
    EnvGuard g(junk);
    CHECK_THROWS_AS(workers_from_environment(), ConfigError);
  }
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  const auto good = write_file(dir / "good.yaml", kSmall);
  const auto bad = write_file(dir / "bad.yaml", "sweeps:\n  - name: a\n    temperatures: [-1]\n");
  const std::string out = " -q -o " + (dir / "out").string();

  CHECK(cli("run " + good.string() + out) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.yaml"));
  CHECK(cli("run " + bad.string() + out) == 1);
  CHECK(cli("run " + (dir / "missing.yaml").string() + out) == 1);
  CHECK(cli("validate " + good.string() + out) == 0);
  CHECK(cli("validate " + bad.string() + out) == 1);
  CHECK(cli("reproduce fig99" + out) == 1);
  CHECK(cli("reproduce fig5 --print-config") == 0);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("--help") == 0);
  CHECK(cli("run " + good.string() + out + " --workers 0") == 1);
  {
    EnvGuard g("zero");
    CHECK(cli("run " + good.string() + out) == 1);
    // The flag takes precedence, but a malformed variable is still reported.
    CHECK(cli("run " + good.string() + out + " -w 2") == 1);
  }
  {
    EnvGuard g("3");
    CHECK(cli("run " + good.string() + out) == 0);
    CHECK(slurp(dir / "out" / "manifest.yaml").find("workers: 3") != std::string::npos);
    CHECK(cli("run " + good.string() + out + " -w 1") == 0);
    CHECK(slurp(dir / "out" / "manifest.yaml").find("workers: 1") != std::string::npos);
  }
  CHECK(cli(std::string("run ") + TELEQCP_CONFIGS + "/xx-minimal.yaml" + out) == 0);
}
