#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "teleqcp/io.hpp"

#ifndef TELEQCP_VERSION
#define TELEQCP_VERSION "unknown"
#endif

namespace teleqcp {

namespace fs = std::filesystem;

int ResultBundle::exit_code() const {
  int code = 0;
  for (const auto& r : reports) {
    if (r.ok) continue;
    if (r.numerical_failure) return 2;
    code = 3;
  }
  return code;
}

namespace {

std::string model_label(const SweepSpec& s) {
  const auto& m = s.base;
  if (m.family == ModelFamily::XXZ) return "xxz(h=" + format_double(m.field) + ")";
  if (s.parameter == TuningParameter::Gamma) return "xy(lambda=" + format_double(m.lambda) + ")";
  return "xy(gamma=" + format_double(m.gamma) + ")";
}

std::ofstream open_table(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

const char* kCurveHeader =
    "model,L,parameter,kT,detector,x,value,d1,d2,branch,masked_d1,masked_d2,z,xx,yy,zz\n";
const char* kEstimateHeader =
    "sweep,model,L,parameter,detector,kT,window_lo,window_hi,order,value,error,on_branch_change\n";
const char* kExtrapolationHeader =
    "sweep,model,L,parameter,detector,window_lo,window_hi,order,points,slope,intercept,intercept_stderr,"
    "max_abs_residual,intercept_in_window\n";
const char* kCoincidenceHeader =
    "sweep,model,L,parameter,kT,F_value,F_error,F_order,D_value,D_error,D_order,verdict,"
    "F_on_branch_change,D_on_branch_change\n";

fs::path curve_path(const SweepSpec& s, Detector d, double kT) {
  return fs::path("curves") / s.name / (detector_name(d) + "_kT" + format_double(kT) + ".csv");
}

bool mask_at(const Mask& m, Index i) { return !m.empty() && m[static_cast<std::size_t>(i)]; }

struct Tables {
  std::ostringstream estimates, extrapolations, coincidences;
};

SweepTables write_sweep(const fs::path& dir, const SweepSpec& s, const SweepAnalysis& analysis, Tables& all) {
  SweepTables written;
  written.sweep = s.name;
  written.parameter = s.parameter;
  const std::string model = model_label(s);
  const std::string L = std::to_string(s.base.length);
  const std::string par = parameter_name(s.parameter);

  for (std::size_t t = 0; t < s.temperatures.size(); ++t) {
    for (const auto& a : analysis.detectors) {
      const auto& c = a.curves[t];
      const fs::path rel = curve_path(s, a.detector, c.kT);
      auto out = open_table(dir / rel);
      out << kCurveHeader;
      for (Index i = 0; i < c.size(); ++i) {
        out << model << ',' << L << ',' << par << ',' << format_double(c.kT) << ','
            << detector_name(c.detector) << ',' << format_double(c.grid(i)) << ','
            << format_double(c.values(i)) << ',' << format_double(a.first[t].values(i)) << ','
            << format_double(a.second[t].values(i)) << ',' << c.branches[i] << ','
            << mask_at(a.filter1.masks[t], i) << ',' << mask_at(a.filter2.masks[t], i);
        for (int k = 0; k < 4; ++k) out << ',' << format_double(c.correlators(i, k));
        out << '\n';
      }
      written.curves.push_back(rel);
    }
  }

  std::ostringstream est;
  for (const auto& a : analysis.detectors) {
    for (std::size_t w = 0; w < a.windows.size(); ++w) {
      for (std::size_t t = 0; t < a.estimates[w].size(); ++t) {
        const auto& e = a.estimates[w][t];
        if (!e) continue;
        est << s.name << ',' << model << ',' << L << ',' << par << ',' << detector_name(e->detector) << ','
            << format_double(e->kT) << ',' << format_double(e->window.lo) << ','
            << format_double(e->window.hi) << ',' << e->order << ',' << format_double(e->value) << ','
            << format_double(e->error) << ',' << near_branch_change(a.curves[t], e->grid_index) << '\n';
      }
      if (const auto& x = a.extrapolations[w]) {
        all.extrapolations << s.name << ',' << model << ',' << L << ',' << par << ','
                           << detector_name(a.detector) << ',' << format_double(a.windows[w].lo) << ','
                           << format_double(a.windows[w].hi) << ',' << a.windows[w].order << ','
                           << x->estimates.size() << ',' << format_double(x->slope) << ','
                           << format_double(x->intercept) << ',' << format_double(x->intercept_stderr)
                           << ',' << format_double(x->residuals.cwiseAbs().maxCoeff()) << ','
                           << x->intercept_in_window << '\n';
      }
    }
  }
  all.estimates << est.str();
  if (!est.str().empty()) {
    written.estimates = fs::path("estimates") / (s.name + ".csv");
    auto out = open_table(dir / written.estimates);
    out << kEstimateHeader << est.str();
  }

  for (const auto& r : analysis.coincidences) {
    all.coincidences << s.name << ',' << model << ',' << L << ',' << par << ',' << format_double(r.kT) << ','
                     << format_double(r.fidelity.value) << ',' << format_double(r.fidelity.error) << ','
                     << r.fidelity.order << ',' << format_double(r.trace_distance.value) << ','
                     << format_double(r.trace_distance.error) << ',' << r.trace_distance.order << ','
                     << r.verdict.label << ',' << r.verdict.a_on_branch_change << ','
                     << r.verdict.b_on_branch_change << '\n';
  }
  return written;
}

std::string yaml_text(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string compiler_id() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

}  // namespace

ResultBundle run(const RunConfig& config, std::ostream* log) {
  for (const auto& s : config.sweeps) s.validate();
  if (config.workers < 1) throw std::invalid_argument("run: workers must be at least 1");

  ResultBundle bundle;
  bundle.directory = config.output_dir;
  fs::create_directories(bundle.directory);
  {
    auto out = open_table(bundle.directory / "config.yaml");
    out << serialize(config);
  }

  Tables all;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& s : config.sweeps) {
    SweepReport report;
    report.name = s.name;
    const auto t0 = std::chrono::steady_clock::now();
    if (log) *log << "sweep " << s.name << " (" << s.base.describe() << ", " << s.grid().size() << " points x "
                  << s.temperatures.size() << " kT)" << std::endl;
    try {
      const auto curves =
          sweep(s, config.validation ? Evaluation::Protocol : Evaluation::ClosedForm, config.workers);
      const auto analysis = analyze_sweep(s, curves);
      bundle.tables.push_back(write_sweep(bundle.directory, s, analysis, all));
      report.warnings = analysis.warnings;
      report.ok = true;
    } catch (const NumericalConsistencyError& e) {
      report.numerical_failure = true;
      report.message = e.what();
    } catch (const std::exception& e) {
      report.message = e.what();
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) {
      for (const auto& w : report.warnings) *log << "  warning: " << w << "\n";
      if (!report.ok) *log << "  FAILED: " << report.message << "\n";
    }
    bundle.reports.push_back(std::move(report));
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  open_table(bundle.directory / "estimates.csv") << kEstimateHeader << all.estimates.str();
  open_table(bundle.directory / "extrapolations.csv") << kExtrapolationHeader << all.extrapolations.str();
  open_table(bundle.directory / "coincidence.csv") << kCoincidenceHeader << all.coincidences.str();

  // Wall times live here only, so the tables stay byte-identical across reruns.
  auto man = open_table(bundle.directory / "manifest.yaml");
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(config);
  man << "config_hash: \"" << hash.str() << "\"\n";
  man << "teleqcp_version: \"" << TELEQCP_VERSION << "\"\n";
  man << "eigen_version: \"" << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
      << "\"\n";
  man << "compiler: " << yaml_text(compiler_id()) << "\n";
  man << "workers: " << config.workers << "\n";
  man << "evaluation: " << (config.validation ? "protocol" : "closed-form") << "\n";
  man << "total_wall_seconds: " << format_double(total) << "\n";
  man << "exit_code: " << bundle.exit_code() << "\n";
  if (bundle.reports.empty()) man << "sweeps: []\n";
  else man << "sweeps:\n";
  for (const auto& r : bundle.reports) {
    man << "  - name: " << yaml_text(r.name) << "\n";
    man << "    status: " << (r.ok ? "ok" : r.numerical_failure ? "numerical-failure" : "failed") << "\n";
    man << "    wall_seconds: " << format_double(r.wall_seconds) << "\n";
    if (!r.message.empty()) man << "    message: " << yaml_text(r.message) << "\n";
    if (!r.warnings.empty()) {
      man << "    warnings:\n";
      for (const auto& w : r.warnings) man << "      - " << yaml_text(w) << "\n";
    }
  }
  man.close();

  if (config.plot_scripts) emit_plot_scripts(bundle);
  return bundle;
}

std::vector<fs::path> emit_plot_scripts(const ResultBundle& bundle) {
  std::vector<fs::path> scripts;
  for (const auto& t : bundle.tables) {
    for (const auto& c : t.curves)
      if (!fs::exists(bundle.directory / c)) throw std::runtime_error("missing table " + c.string());
    if (!t.estimates.empty() && !fs::exists(bundle.directory / t.estimates))
      throw std::runtime_error("missing table " + t.estimates.string());

    const std::string xlabel = parameter_name(t.parameter);
    std::vector<fs::path> f_tables, d_tables;
    for (const auto& c : t.curves)
      (c.filename().string().starts_with("F_ext") ? f_tables : d_tables).push_back(c);

    std::ostringstream gp;
    gp << "# " << t.sweep << "\n";
    gp << "# run from the bundle directory: gnuplot plots/" << t.sweep << ".gp\n";
    gp << "set datafile separator ','\n";
    gp << "set terminal pngcairo size 1400,1000\n";
    gp << "set output 'plots/" << t.sweep << ".png'\n";
    gp << "set key outside right\n";
    gp << "set xlabel '" << xlabel << "'\n";
    gp << "set multiplot layout 2,2 title '" << t.sweep << "'\n";
    auto panel = [&](const std::string& ylabel, const std::vector<fs::path>& files, int column) {
      if (files.empty()) return;
      gp << "set ylabel '" << ylabel << "'\n";
      gp << "plot ";
      for (std::size_t i = 0; i < files.size(); ++i)
        gp << (i ? ", \\\n     " : "") << "'" << files[i].generic_string() << "' using 6:" << column
           << " with lines title '" << files[i].stem().string() << "'";
      gp << "\n";
    };
    panel("F_ext", f_tables, 7);
    panel("D_int", d_tables, 7);
    const auto& any = f_tables.empty() ? d_tables : f_tables;
    panel("<x_j x_j+1>", any, 14);
    if (!t.estimates.empty()) {
      gp << "set xlabel 'kT'\n";
      gp << "set ylabel 'estimated " << xlabel << "_c'\n";
      gp << "plot '" << t.estimates.generic_string()
         << "' using 6:10:11 with yerrorbars title 'extremum (+/- 1 or 2 grid steps)'\n";
    } else {
      panel("d/d" + xlabel + " F_ext", f_tables, 8);
    }
    gp << "unset multiplot\n";

    const fs::path rel = fs::path("plots") / (t.sweep + ".gp");
    auto out = open_table(bundle.directory / rel);
    out << gp.str();
    scripts.push_back(rel);
  }
  return scripts;
}

namespace {

SweepSpec make_sweep(const std::string& name, ModelSpec base, TuningParameter p, double a, double b,
                     std::vector<double> temps, std::vector<Window> windows = {}) {
  SweepSpec s;
  s.name = name;
  s.base = base;
  s.parameter = p;
  s.start = a;
  s.stop = b;
  s.temperatures = std::move(temps);
  s.windows = std::move(windows);
  return s;
}

const std::vector<double> kLowT{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1, 0.5};
const std::vector<double> kXxzT{0.01, 0.1, 0.2, 0.3, 0.4, 0.5};

void add_lambda_family(RunConfig& c, const std::string& fig, double gamma) {
  for (int L : {6, 8, 10, 12}) {
    std::vector<Window> w{{0.5, 1.5, 1}};
    if (gamma == 1.0) w.push_back({0.5, 1.5, 2});
    c.sweeps.push_back(make_sweep(fig + "-L" + std::to_string(L), ModelSpec::xy(L, 0.0, gamma),
                                  TuningParameter::Lambda, 0.0, 2.0, kLowT, w));
  }
}

}  // namespace

std::vector<std::string> figure_ids() {
  return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "all"};
}

RunConfig figure_config(const std::string& id) {
  RunConfig c;
  c.output_dir = "reproduce-" + id;
  if (id == "all") {
    for (const auto& f : figure_ids()) {
      if (f == "all") continue;
      auto part = figure_config(f);
      c.sweeps.insert(c.sweeps.end(), part.sweeps.begin(), part.sweeps.end());
    }
    return c;
  }
  const auto delta = TuningParameter::Delta;
  if (id == "fig1") {
    c.sweeps.push_back(make_sweep("fig1-h0", ModelSpec::xxz(12, 0, 0), delta, -2, 2, {0.01, 0.1, 0.5, 1.0}));
    c.sweeps.push_back(make_sweep("fig1-h12", ModelSpec::xxz(12, 0, 12), delta, 0, 6, {0.01, 0.1, 0.5, 1.0}));
  } else if (id == "fig2") {
    for (int L = 4; L <= 12; ++L) {
      c.sweeps.push_back(make_sweep("fig2-h0-L" + std::to_string(L), ModelSpec::xxz(L, 0, 0), delta, -2, 2, {1.0}));
      c.sweeps.push_back(make_sweep("fig2-h12-L" + std::to_string(L), ModelSpec::xxz(L, 0, 12), delta, 0, 6, {1.0}));
    }
  } else if (id == "fig3") {
    c.sweeps.push_back(make_sweep("fig3-h0", ModelSpec::xxz(12, 0, 0), delta, -2, 2, {0.01, 0.5}));
    c.sweeps.push_back(make_sweep("fig3-h12", ModelSpec::xxz(12, 0, 12), delta, 0, 6, {0.01, 0.5}));
  } else if (id == "fig4") {
    for (int L : {6, 8, 10, 12})
      c.sweeps.push_back(make_sweep("fig4-L" + std::to_string(L), ModelSpec::xxz(L, 0, 12), delta, 0, 6, {0.01, 0.5}));
  } else if (id == "fig5") {
    for (int L : {6, 8, 10, 12})
      c.sweeps.push_back(make_sweep("fig5-L" + std::to_string(L), ModelSpec::xxz(L, 0, 12), delta, 0, 6, kXxzT,
                                    {{1.5, 2.5, 1}, {4.0, 5.5, 2}}));
  } else if (id == "fig6") {
    add_lambda_family(c, "fig6", 0.0);
  } else if (id == "fig7") {
    add_lambda_family(c, "fig7", 0.5);
  } else if (id == "fig8") {
    add_lambda_family(c, "fig8", 1.0);
  } else if (id == "fig9") {
    for (int L : {6, 8, 10, 12})
      c.sweeps.push_back(make_sweep("fig9-L" + std::to_string(L), ModelSpec::xy(L, 1.5, 0.0),
                                    TuningParameter::Gamma, -1, 1, {0.05, 0.5}, {{-0.5, 0.5, 0}}));
  } else {
    throw ConfigError("unknown figure id '" + id + "'");
  }
  return c;
}

RunConfig validation_config(const RunConfig& config, int max_length, int max_points) {
  RunConfig v = config;
  v.validation = true;
  v.plot_scripts = false;
  for (auto& s : v.sweeps) {
    s.base.length = std::min(s.base.length, max_length);
    const double span = s.stop - s.start;
    s.step = std::max(s.step, span / (max_points - 1));
    // Windows are irrelevant to the cross-check; auto-seeding keeps analysis valid.
    s.windows.clear();
  }
  return v;
}

}  // namespace teleqcp
