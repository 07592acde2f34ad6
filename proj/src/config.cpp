#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "teleqcp/io.hpp"

namespace teleqcp {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

/// A YAML node together with its field path, for diagnostics.
class Field {
public:
  Field(YAML::Node node, std::string path, const std::string& origin, YAML::Mark mark)
      : node_(std::move(node)), path_(std::move(path)), origin_(origin), mark_(mark) {
    if (node_.IsDefined() && !node_.IsNull()) mark_ = node_.Mark();
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << origin_;
    if (mark_.line >= 0) os << ":" << mark_.line + 1 << ":" << mark_.column + 1;
    os << ": " << (path_.empty() ? "<root>" : path_) << ": " << what;
    throw ConfigError(os.str());
  }

  bool present() const { return node_.IsDefined() && !node_.IsNull(); }
  const std::string& path() const { return path_; }

  Field operator[](const std::string& key) const {
    return Field(node_.IsMap() ? node_[key] : YAML::Node(YAML::NodeType::Undefined),
                 path_.empty() ? key : path_ + "." + key, origin_, mark_);
  }

  void require_map(std::initializer_list<const char*> allowed) const {
    if (!node_.IsMap()) fail("expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) Field(kv.first, path_.empty() ? key : path_ + "." + key, origin_, mark_).fail("unknown key");
    }
  }

  void require(const char* key) const {
    if (!(*this)[key].present()) fail(std::string("missing required key '") + key + "'");
  }

  std::size_t size() const {
    if (!node_.IsSequence()) fail("expected a list");
    return node_.size();
  }
  bool is_sequence() const { return node_.IsSequence(); }
  Field at(std::size_t i) const {
    return Field(node_[i], path_ + "[" + std::to_string(i) + "]", origin_, mark_);
  }

  std::string text() const {
    if (!node_.IsScalar()) fail("expected a scalar");
    return node_.Scalar();
  }

  double number() const {
    const std::string s = text();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
      fail("'" + s + "' is not a finite number");
    return v;
  }

  int integer() const {
    const std::string s = text();
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("'" + s + "' is not an integer");
    return v;
  }

  bool boolean() const {
    const std::string s = text();
    if (s == "true") return true;
    if (s == "false") return false;
    fail("'" + s + "' is not true/false");
  }

private:
  YAML::Node node_;
  std::string path_;
  const std::string& origin_;
  YAML::Mark mark_;
};

double number_or(const Field& f, double fallback) { return f.present() ? f.number() : fallback; }

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
  return s != "." && s != "..";
}

Detector parse_detector(const Field& f) {
  const auto s = f.text();
  if (s == "F_ext") return Detector::ExternalFidelity;
  if (s == "D_int") return Detector::InternalTraceDistance;
  f.fail("unknown detector '" + s + "' (expected F_ext or D_int)");
}

TuningParameter parse_parameter(const Field& f) {
  const auto s = f.text();
  if (s == "delta") return TuningParameter::Delta;
  if (s == "lambda") return TuningParameter::Lambda;
  if (s == "gamma") return TuningParameter::Gamma;
  f.fail("unknown parameter '" + s + "' (expected delta, lambda or gamma)");
}

/// One config entry may list several chain lengths; each becomes its own sweep.
std::vector<SweepSpec> parse_sweep(const Field& f) {
  f.require_map({"name", "model", "parameter", "range", "step", "temperatures", "detectors", "windows",
                 "auto_windows", "filter"});
  for (const char* key : {"name", "model", "parameter", "range", "temperatures"}) f.require(key);

  SweepSpec s;
  s.name = f["name"].text();
  if (!valid_name(s.name)) f["name"].fail("names may only use letters, digits, '-', '_' and '.'");

  const Field model = f["model"];
  model.require("family");
  model.require("L");
  const std::string family = model["family"].text();
  ModelFamily fam;
  if (family == "xxz") {
    model.require_map({"family", "L", "delta", "h"});
    fam = ModelFamily::XXZ;
  } else if (family == "xy") {
    model.require_map({"family", "L", "lambda", "gamma"});
    fam = ModelFamily::XYTransverse;
  } else {
    model["family"].fail("unknown family '" + family + "' (expected xxz or xy)");
  }

  std::vector<int> lengths;
  const Field lf = model["L"];
  if (lf.is_sequence()) {
    if (lf.size() == 0) lf.fail("needs at least one chain length");
    for (std::size_t i = 0; i < lf.size(); ++i) lengths.push_back(lf.at(i).integer());
  } else {
    lengths.push_back(lf.integer());
  }
  for (std::size_t i = 0; i < lengths.size(); ++i)
    if (lengths[i] < 2 || lengths[i] > kMaxSites)
      (lf.is_sequence() ? lf.at(i) : lf).fail("chain length must lie in [2, " + std::to_string(kMaxSites) + "]");

  s.parameter = parse_parameter(f["parameter"]);
  if ((s.parameter == TuningParameter::Delta) != (fam == ModelFamily::XXZ))
    f["parameter"].fail("parameter does not belong to family '" + family + "'");

  const Field range = f["range"];
  if (range.size() != 2) range.fail("expected [start, stop]");
  s.start = range.at(0).number();
  s.stop = range.at(1).number();
  if (!(s.start < s.stop)) range.fail("start must be below stop");
  s.step = number_or(f["step"], 0.01);
  if (!(s.step > 0.0)) f["step"].fail("must be positive");

  const Field temps = f["temperatures"];
  if (temps.size() == 0) temps.fail("needs at least one temperature");
  for (std::size_t i = 0; i < temps.size(); ++i) {
    const double t = temps.at(i).number();
    if (!(t > 0.0)) temps.at(i).fail("kT must be positive");
    s.temperatures.push_back(t);
  }

  if (f["detectors"].present()) {
    const Field dets = f["detectors"];
    if (dets.size() == 0) dets.fail("needs at least one detector");
    s.detectors.clear();
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const Detector d = parse_detector(dets.at(i));
      if (std::find(s.detectors.begin(), s.detectors.end(), d) != s.detectors.end())
        dets.at(i).fail("duplicate detector");
      s.detectors.push_back(d);
    }
  }

  if (f["windows"].present()) {
    const Field ws = f["windows"];
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const Field w = ws.at(i);
      w.require_map({"lo", "hi", "order"});
      w.require("lo");
      w.require("hi");
      Window win{w["lo"].number(), w["hi"].number(), w["order"].present() ? w["order"].integer() : 1};
      if (!(win.lo < win.hi)) w.fail("lo must be below hi");
      if (win.lo < s.start - 1e-9 || win.hi > s.stop + 1e-9) w.fail("window must lie inside the range");
      if (win.order < 0 || win.order > 2) w["order"].fail("order must be 0, 1 or 2");
      s.windows.push_back(win);
    }
  }
  if (f["auto_windows"].present()) {
    s.auto_windows = f["auto_windows"].integer();
    if (s.auto_windows < 1) f["auto_windows"].fail("must be at least 1");
  }
  if (f["filter"].present()) {
    const Field flt = f["filter"];
    flt.require_map({"radius", "drift", "high_kT", "min_relative"});
    s.filter.radius = number_or(flt["radius"], s.filter.radius);
    s.filter.drift = number_or(flt["drift"], s.filter.drift);
    s.filter.high_kT = number_or(flt["high_kT"], s.filter.high_kT);
    s.filter.min_relative = number_or(flt["min_relative"], s.filter.min_relative);
    if (!(s.filter.radius > 0.0)) flt["radius"].fail("must be positive");
    if (!(s.filter.drift >= 0.0)) flt["drift"].fail("must be non-negative");
    if (!(s.filter.high_kT > 0.0)) flt["high_kT"].fail("must be positive");
    if (!(s.filter.min_relative >= 0.0 && s.filter.min_relative < 1.0))
      flt["min_relative"].fail("must lie in [0, 1)");
  }

  std::vector<SweepSpec> out;
  for (int L : lengths) {
    SweepSpec copy = s;
    if (fam == ModelFamily::XXZ)
      copy.base = ModelSpec::xxz(L, number_or(model["delta"], 0.0), number_or(model["h"], 0.0));
    else
      copy.base = ModelSpec::xy(L, number_or(model["lambda"], 0.0), number_or(model["gamma"], 0.0));
    if (lf.is_sequence()) copy.name = s.name + "-L" + std::to_string(L);
    try {
      copy.validate();
    } catch (const std::invalid_argument& e) {
      f.fail(e.what());
    }
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream os;
    os << origin << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": malformed YAML: " << e.msg;
    throw ConfigError(os.str());
  }
  RunConfig cfg;
  if (!root.IsDefined() || root.IsNull()) return cfg;
  const Field top(root, "", origin, root.Mark());
  top.require_map({"output_dir", "workers", "validation", "plot_scripts", "sweeps"});
  if (top["output_dir"].present()) cfg.output_dir = top["output_dir"].text();
  if (cfg.output_dir.empty()) top["output_dir"].fail("must not be empty");
  if (top["workers"].present()) {
    cfg.workers = top["workers"].integer();
    if (cfg.workers < 1) top["workers"].fail("must be at least 1");
  }
  if (top["validation"].present()) cfg.validation = top["validation"].boolean();
  if (top["plot_scripts"].present()) cfg.plot_scripts = top["plot_scripts"].boolean();
  if (top["sweeps"].present()) {
    const Field sweeps = top["sweeps"];
    std::set<std::string> names;
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
      for (auto& s : parse_sweep(sweeps.at(i))) {
        if (!names.insert(s.name).second) sweeps.at(i)["name"].fail("duplicate sweep name '" + s.name + "'");
        cfg.sweeps.push_back(std::move(s));
      }
    }
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out + "]";
}

}  // namespace

std::string serialize(const RunConfig& config) {
  std::ostringstream os;
  os << "output_dir: " << quoted(config.output_dir) << "\n";
  os << "workers: " << config.workers << "\n";
  os << "validation: " << (config.validation ? "true" : "false") << "\n";
  os << "plot_scripts: " << (config.plot_scripts ? "true" : "false") << "\n";
  if (config.sweeps.empty()) {
    os << "sweeps: []\n";
    return os.str();
  }
  os << "sweeps:\n";
  for (const auto& s : config.sweeps) {
    const auto& m = s.base;
    os << "  - name: " << quoted(s.name) << "\n";
    if (m.family == ModelFamily::XXZ)
      os << "    model: {family: xxz, L: " << m.length << ", delta: " << format_double(m.delta)
         << ", h: " << format_double(m.field) << "}\n";
    else
      os << "    model: {family: xy, L: " << m.length << ", lambda: " << format_double(m.lambda)
         << ", gamma: " << format_double(m.gamma) << "}\n";
    os << "    parameter: " << parameter_name(s.parameter) << "\n";
    os << "    range: [" << format_double(s.start) << ", " << format_double(s.stop) << "]\n";
    os << "    step: " << format_double(s.step) << "\n";
    os << "    temperatures: " << list(s.temperatures) << "\n";
    os << "    detectors: [";
    for (std::size_t i = 0; i < s.detectors.size(); ++i) os << (i ? ", " : "") << detector_name(s.detectors[i]);
    os << "]\n";
    os << "    windows: [";
    for (std::size_t i = 0; i < s.windows.size(); ++i)
      os << (i ? ", " : "") << "{lo: " << format_double(s.windows[i].lo)
         << ", hi: " << format_double(s.windows[i].hi) << ", order: " << s.windows[i].order << "}";
    os << "]\n";
    os << "    auto_windows: " << s.auto_windows << "\n";
    os << "    filter: {radius: " << format_double(s.filter.radius)
       << ", drift: " << format_double(s.filter.drift)
       << ", high_kT: " << format_double(s.filter.high_kT)
       << ", min_relative: " << format_double(s.filter.min_relative) << "}\n";
  }
  return os.str();
}

std::uint64_t config_hash(const RunConfig& config) {
  RunConfig c = config;
  c.workers = 1;
  c.output_dir = ".";
  const std::string text = serialize(c);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::optional<int> workers_from_environment() {
  const char* raw = std::getenv(kWorkersVariable);
  if (!raw || !*raw) return std::nullopt;
  const std::string s(raw);
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 1)
    throw ConfigError(std::string(kWorkersVariable) + "='" + s + "' is not a positive integer");
  return v;
}

}  // namespace teleqcp
