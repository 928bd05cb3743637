#include "hlent/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "hlent/errors.hpp"
#include "hlent/numeric.hpp"

namespace hlent {

namespace {

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream iss(s);
  std::vector<std::string> out;
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

struct KvFile {
  std::map<std::string, std::string> kv;  // "section.key" -> value
  std::string origin;

  std::optional<std::string> get(const std::string& k) const {
    const auto it = kv.find(k);
    if (it == kv.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }
  int get_int(const std::string& k, int dflt) const {
    const auto v = get(k);
    if (!v) return dflt;
    try {
      size_t pos = 0;
      const int r = std::stoi(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return r;
    } catch (...) {
      throw ConfigError(fmt::format("{}: {} = {} is not an integer", origin, k, *v));
    }
  }
  double get_double(const std::string& k, double dflt) const {
    const auto v = get(k);
    if (!v) return dflt;
    try {
      size_t pos = 0;
      const double r = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return r;
    } catch (...) {
      throw ConfigError(fmt::format("{}: {} = {} is not a number", origin, k, *v));
    }
  }
  bool get_bool(const std::string& k, bool dflt) const {
    const auto v = get(k);
    if (!v) return dflt;
    if (*v == "true" || *v == "on" || *v == "1") return true;
    if (*v == "false" || *v == "off" || *v == "0") return false;
    throw ConfigError(fmt::format("{}: {} = {} is not a boolean", origin, k, *v));
  }
};

KvFile parse_kv(const std::string& text, const std::string& origin) {
  KvFile f;
  f.origin = origin;
  std::istringstream iss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(iss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("{}:{}: unterminated section", origin, lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key = value", origin, lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || section.empty()) {
      throw ConfigError(fmt::format("{}:{}: key outside a [section] or empty", origin, lineno));
    }
    f.kv[section + "." + key] = trim(line.substr(eq + 1));
  }
  return f;
}

const std::map<std::string, std::string> kKnownKeys = {
    {"lattice.dims", "1 | 2 | 3"},
    {"lattice.sizes", "per-axis mode counts L_a (fixed ends: L_a-1 dynamical sites per axis)"},
    {"lattice.bc", "pbc | fbc"},
    {"lattice.sampling", "integer | half (default: half for pbc, integer for fbc)"},
    {"lattice.omega", "oscillator mass / IR cutoff (default 0; 1e-3 for pbc+integer)"},
    {"window.extent", "D window extent per axis (default: tightest fit of the largest region)"},
    {"window.anchors", "semicolon-separated centroid coordinates, e.g. 149.5,149.5 ; 45.5,45.5"},
    {"experiment.shapes", "square triangle trapezoid parallelogram | cube prism"},
    {"experiment.l_min", "smallest region scale (>= 2)"},
    {"experiment.l_max", "largest region scale"},
    {"experiment.measures", "ln mi renyi entropy (2D: ln/mi; 3D: renyi)"},
    {"experiment.renyi_order", "Renyi order for mi/renyi series (default 0.5)"},
    {"experiment.power_order", "auto | 0..4 inverse-power terms in the fits"},
    {"experiment.p_min_l", "fit window starts at P_B of this scale (default 6 in 2D, 4 in 3D)"},
    {"execution.workers", "worker threads (default: hardware)"},
    {"execution.cache_dir", "correlator cache directory"},
    {"execution.fbc_fast", "staged sine-transform evaluation for fixed-end windows (default off)"},
    {"output.out_dir", "output directory"},
    {"output.plots", "emit gnuplot scripts (default on)"},
};

}  // namespace

int RunConfig::effective_workers() const {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

double RunConfig::p_min_for(Shape s) const {
  const int l0 = p_min_l ? *p_min_l : (shape_dims(s) == 3 ? 4 : 6);
  return boundary_metrics(s, std::max(2, l0)).perimeter;
}

std::array<int, 3> RunConfig::effective_window_extent() const {
  std::array<int, 3> ext = window_extent;
  for (int a = 0; a < lattice.dims; ++a) {
    if (ext[a] > 0) continue;
    int need = 1;
    for (Shape s : shapes) need = std::max(need, enclosure_extent(s, l_max)[a]);
    ext[a] = need;
  }
  for (int a = lattice.dims; a < 3; ++a) ext[a] = 1;
  return ext;
}

Box RunConfig::window_box(const Anchor& anchor) const {
  const auto ext = effective_window_extent();
  Box b;
  for (int a = 0; a < lattice.dims; ++a) {
    b.lo[a] = static_cast<int>(std::floor(anchor.c[a] - (ext[a] - 1) / 2.0 + 1e-9));
    b.extent[a] = ext[a];
  }
  return b;
}

void RunConfig::validate() const {
  try {
    lattice.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("lattice: ") + e.what());
  }
  if (shapes.empty()) throw ConfigError("experiment.shapes is empty");
  if (measures.empty()) throw ConfigError("experiment.measures is empty");
  if (l_min < 2 || l_max < l_min) throw ConfigError("experiment scale range is empty or l_min < 2");
  for (Shape s : shapes) {
    if (shape_dims(s) != lattice.dims) {
      throw ConfigError(fmt::format("shape {} needs a {}d lattice (config has {}d)", to_string(s),
                                    shape_dims(s), lattice.dims));
    }
    if (lattice.dims == 3) {
      for (const MeasureSpec& m : measures) {
        if (m.kind == MeasureKind::LogNegativity || m.kind == MeasureKind::MutualInfo) {
          throw ConfigError("3d shapes have no enclosed partner; use renyi or entropy measures");
        }
      }
    }
  }
  if (anchors.empty()) throw ConfigError("window.anchors is empty");
  const auto ext = effective_window_extent();
  for (const Anchor& anchor : anchors) {
    const Box dbox = window_box(anchor);
    for (int a = 0; a < lattice.dims; ++a) {
      if (dbox.lo[a] < lattice.site_lo(a) || dbox.lo[a] + dbox.extent[a] - 1 > lattice.site_hi(a)) {
        throw ConfigError(fmt::format(
            "D window (extent {}) at anchor ({},{},{}) escapes the dynamical lattice on axis {}",
            ext[a], anchor.c[0], anchor.c[1], anchor.c[2], a));
      }
    }
    for (Shape s : shapes) {
      const Box abox = region_bbox(s, l_max, anchor, lattice.dims);
      for (int a = 0; a < lattice.dims; ++a) {
        if (abox.lo[a] < dbox.lo[a] || abox.lo[a] + abox.extent[a] > dbox.lo[a] + dbox.extent[a]) {
          throw ConfigError(fmt::format(
              "{} at l={} anchored at ({},{},{}) escapes its D window; enlarge window.extent",
              to_string(s), l_max, anchor.c[0], anchor.c[1], anchor.c[2]));
        }
      }
    }
  }
  if (power_order && (*power_order < 0 || *power_order > 8)) {
    throw ConfigError("experiment.power_order outside 0..8");
  }
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  const KvFile f = parse_kv(text, origin);
  for (const auto& [k, v] : f.kv) {
    if (!kKnownKeys.count(k)) throw ConfigError(fmt::format("{}: unknown key '{}'", origin, k));
  }
  RunConfig cfg;

  cfg.lattice.dims = f.get_int("lattice.dims", 2);
  if (const auto v = f.get("lattice.sizes")) {
    const auto toks = split_ws(*v);
    if (toks.empty() || toks.size() > 3) throw ConfigError(origin + ": lattice.sizes needs 1..3 entries");
    for (size_t a = 0; a < toks.size(); ++a) cfg.lattice.sizes[a] = std::stoi(toks[a]);
    if (static_cast<int>(toks.size()) != cfg.lattice.dims) {
      throw ConfigError(origin + ": lattice.sizes entry count must equal dims");
    }
  } else {
    throw ConfigError(origin + ": lattice.sizes is required");
  }
  if (const auto v = f.get("lattice.bc")) {
    if (*v == "pbc") cfg.lattice.bc = Bc::Periodic;
    else if (*v == "fbc") cfg.lattice.bc = Bc::Fixed;
    else throw ConfigError(origin + ": lattice.bc must be pbc or fbc");
  }
  if (const auto v = f.get("lattice.sampling")) {
    if (*v == "integer") cfg.lattice.sampling = Sampling::IntegerK;
    else if (*v == "half") cfg.lattice.sampling = Sampling::HalfShiftK;
    else throw ConfigError(origin + ": lattice.sampling must be integer or half");
  } else {
    cfg.lattice.sampling = cfg.lattice.bc == Bc::Periodic ? Sampling::HalfShiftK : Sampling::IntegerK;
  }
  cfg.lattice.omega =
      f.get_double("lattice.omega", default_omega(cfg.lattice.bc, cfg.lattice.sampling));

  if (const auto v = f.get("window.extent")) {
    const auto toks = split_ws(*v);
    if (static_cast<int>(toks.size()) != cfg.lattice.dims) {
      throw ConfigError(origin + ": window.extent entry count must equal dims");
    }
    for (size_t a = 0; a < toks.size(); ++a) cfg.window_extent[a] = std::stoi(toks[a]);
  }
  if (const auto v = f.get("window.anchors")) {
    for (const std::string& part : split(*v, ';')) {
      const auto cs = split(part, ',');
      if (static_cast<int>(cs.size()) != cfg.lattice.dims) {
        throw ConfigError(fmt::format("{}: anchor '{}' needs {} coordinates", origin, part, cfg.lattice.dims));
      }
      Anchor a;
      for (size_t i = 0; i < cs.size(); ++i) a.c[i] = std::stod(cs[i]);
      cfg.anchors.push_back(a);
    }
  }
  if (const auto v = f.get("experiment.shapes")) {
    for (const std::string& tok : split_ws(*v)) cfg.shapes.push_back(shape_from_string(tok));
  }
  cfg.l_min = f.get_int("experiment.l_min", cfg.l_min);
  cfg.l_max = f.get_int("experiment.l_max", cfg.l_max);
  cfg.renyi_order = f.get_double("experiment.renyi_order", cfg.renyi_order);
  if (const auto v = f.get("experiment.measures")) {
    for (const std::string& tok : split_ws(*v)) {
      if (tok == "ln") cfg.measures.push_back({MeasureKind::LogNegativity, 0.0});
      else if (tok == "mi") cfg.measures.push_back({MeasureKind::MutualInfo, cfg.renyi_order});
      else if (tok == "renyi") cfg.measures.push_back({MeasureKind::Renyi, cfg.renyi_order});
      else if (tok == "entropy") cfg.measures.push_back({MeasureKind::Entropy, 1.0});
      else throw ConfigError(origin + ": unknown measure " + tok);
    }
  }
  if (const auto v = f.get("experiment.power_order")) {
    if (*v != "auto") cfg.power_order = f.get_int("experiment.power_order", 0);
  }
  if (f.get("experiment.p_min_l")) cfg.p_min_l = f.get_int("experiment.p_min_l", 6);

  cfg.workers = f.get_int("execution.workers", 0);
  if (const auto v = f.get("execution.cache_dir")) cfg.cache_dir = *v;
  cfg.fbc_fast = f.get_bool("execution.fbc_fast", false);

  if (const auto v = f.get("output.out_dir")) cfg.out_dir = *v;
  cfg.plots = f.get_bool("output.plots", true);
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string config_reference() {
  std::string out = "config keys (key = value lines under [section] headers, '#' comments):\n";
  for (const auto& [k, doc] : kKnownKeys) out += fmt::format("  {:<24} {}\n", k, doc);
  return out;
}

std::string config_echo(const RunConfig& cfg) {
  std::string s;
  s += fmt::format("lattice.dims = {}\n", cfg.lattice.dims);
  s += "lattice.sizes =";
  for (int a = 0; a < cfg.lattice.dims; ++a) s += fmt::format(" {}", cfg.lattice.sizes[a]);
  s += fmt::format("\nlattice.bc = {}\n", to_string(cfg.lattice.bc));
  s += fmt::format("lattice.sampling = {}\n", to_string(cfg.lattice.sampling));
  s += fmt::format("lattice.omega = {}\n", num_str(cfg.lattice.omega));
  const auto ext = cfg.effective_window_extent();
  s += "window.extent =";
  for (int a = 0; a < cfg.lattice.dims; ++a) s += fmt::format(" {}", ext[a]);
  s += "\nwindow.anchors = ";
  for (size_t i = 0; i < cfg.anchors.size(); ++i) {
    if (i) s += " ; ";
    for (int a = 0; a < cfg.lattice.dims; ++a) {
      if (a) s += ",";
      s += num_str(cfg.anchors[i].c[a]);
    }
  }
  s += "\nexperiment.shapes =";
  for (Shape sh : cfg.shapes) s += " " + to_string(sh);
  s += fmt::format("\nexperiment.l_min = {}\nexperiment.l_max = {}\n", cfg.l_min, cfg.l_max);
  s += "experiment.measures =";
  for (const MeasureSpec& m : cfg.measures) s += " " + m.label();
  s += fmt::format("\nexperiment.renyi_order = {}\n", num_str(cfg.renyi_order));
  s += fmt::format("experiment.power_order = {}\n",
                   cfg.power_order ? std::to_string(*cfg.power_order) : std::string("auto"));
  s += fmt::format("experiment.p_min_l = {}\n",
                   cfg.p_min_l ? std::to_string(*cfg.p_min_l) : std::string("default"));
  s += fmt::format("execution.workers = {}\n", cfg.effective_workers());
  s += fmt::format("execution.fbc_fast = {}\n", cfg.fbc_fast);
  s += fmt::format("output.plots = {}\n", cfg.plots);
  return s;
}

}  // namespace hlent
