#include "hlent/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "hlent/errors.hpp"
#include "hlent/numeric.hpp"

namespace hlent {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SeriesRecord {
  int anchor = 0;
  Shape shape = Shape::Square;
  SweepSeries series;
  std::optional<int> order;
  std::optional<CoefficientStats> stats;
  std::optional<CoefficientStats> stats_no_edge;  // 3D comparison fit
  std::string fit_error;
};

std::string anchor_str(const RunConfig& cfg, int idx) {
  std::string s;
  for (int a = 0; a < cfg.lattice.dims; ++a) {
    if (a) s += ",";
    s += num_str(cfg.anchors[idx].c[a]);
  }
  return s;
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

std::string corner_csv_header(int dims) {
  return dims == 3 ? "anchor_x,anchor_y,anchor_z,angle,source,value,std,combination\n"
                   : "anchor_x,anchor_y,angle,source,value,std,combination\n";
}

}  // namespace

std::string angle_label(double angle) {
  constexpr double pi = std::numbers::pi;
  const struct {
    double v;
    const char* s;
  } named[] = {{pi / 4, "pi/4"}, {pi / 2, "pi/2"}, {3 * pi / 4, "3pi/4"}, {pi, "pi"}};
  for (const auto& n : named) {
    if (std::abs(angle - n.v) < 1e-12) return n.s;
  }
  return num_str(angle);
}

RunResult run(const RunConfig& config, const RunOptions& opt) {
  RunConfig cfg = config;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.pin_order) cfg.power_order = *opt.pin_order;
  if (opt.cache_dir) cfg.cache_dir = *opt.cache_dir;
  if (opt.out_dir) cfg.out_dir = *opt.out_dir;
  if (opt.no_plots) cfg.plots = false;
  cfg.validate();

  const int workers = cfg.effective_workers();
  const int dims = cfg.lattice.dims;
  auto note = [&](const std::string& msg) {
    if (!opt.quiet) std::cerr << "[hlent] " << msg << "\n";
  };

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_echo(cfg);
  manifest["admissibility"] = "fit windows need at least params+2 points; P_end sweeps need >= 3 windows";
  nlohmann::json stages;

  // --- correlators -----------------------------------------------------
  const auto t_corr = Clock::now();
  CorrelatorCache cache(cfg.cache_dir);
  CorrelatorOptions copt;
  copt.fbc_fast = cfg.fbc_fast;
  copt.workers = workers;
  std::vector<CorrelatorProvider> providers;
  int hits = 0, misses = 0;
  for (size_t i = 0; i < cfg.anchors.size(); ++i) {
    bool hit = false;
    providers.push_back(cache.load_or_compute(cfg.lattice, cfg.window_box(cfg.anchors[i]), copt, &hit));
    (hit ? hits : misses)++;
    note(fmt::format("correlators for anchor {} ({})", i, hit ? "cache hit" : "computed"));
  }
  stages["correlators_seconds"] = seconds_since(t_corr);
  manifest["cache"] = {{"dir", cfg.cache_dir.string()}, {"hits", hits}, {"misses", misses}};

  // --- sweeps ----------------------------------------------------------
  const auto t_sweep = Clock::now();
  std::vector<SeriesRecord> records;
  for (size_t ai = 0; ai < cfg.anchors.size(); ++ai) {
    for (Shape shape : cfg.shapes) {
      SweepPlan plan;
      plan.shape = shape;
      plan.anchor = cfg.anchors[ai];
      plan.l_min = cfg.l_min;
      plan.l_max = cfg.l_max;
      plan.measures = cfg.measures;
      note(fmt::format("sweep {} anchor {} l={}..{}", to_string(shape), ai, cfg.l_min, cfg.l_max));
      for (SweepSeries& s : run_sweep(plan, providers[ai], workers)) {
        SeriesRecord r;
        r.anchor = static_cast<int>(ai);
        r.shape = shape;
        r.series = std::move(s);
        records.push_back(std::move(r));
      }
    }
  }
  stages["sweeps_seconds"] = seconds_since(t_sweep);

  // --- fits ------------------------------------------------------------
  const auto t_fit = Clock::now();
  for (SeriesRecord& r : records) {
    const FitBasis basis = dims == 3 ? FitBasis::Area3dEdge : FitBasis::Area2d;
    const double p_min = cfg.p_min_for(r.shape);
    try {
      auto [order, stats] = select_power_order(r.series, basis, p_min, 0, 4, cfg.power_order);
      r.order = order;
      r.stats = stats;
      if (dims == 3) {
        r.stats_no_edge = coefficient_statistics(r.series, FitBasis::Area3dNoEdge, order, p_min);
      }
    } catch (const ContractError& e) {
      r.fit_error = e.what();
    }
  }
  stages["fits_seconds"] = seconds_since(t_fit);

  // --- extraction ------------------------------------------------------
  std::vector<std::string> corner_rows;  // pre-rendered CSV rows
  std::vector<std::string> edge_rows;
  nlohmann::json warnings = nlohmann::json::array();
  for (size_t ai = 0; ai < cfg.anchors.size(); ++ai) {
    const std::string apfx = anchor_str(cfg, static_cast<int>(ai));
    if (dims == 2) {
      for (const CornerSource source : {CornerSource::LogNegativity, CornerSource::MutualInfo}) {
        std::map<Shape, CoefficientStats> stats;
        for (const SeriesRecord& r : records) {
          const bool match = source == CornerSource::LogNegativity
                                 ? r.series.measure.kind == MeasureKind::LogNegativity
                                 : r.series.measure.kind == MeasureKind::MutualInfo;
          if (r.anchor == static_cast<int>(ai) && match && r.stats) stats[r.shape] = *r.stats;
        }
        if (!stats.count(Shape::Square)) continue;
        std::vector<CornerEstimate> ests = extract_corners_2d(stats, source);
        std::vector<const CornerEstimate*> threequarters;
        for (const CornerEstimate& e : ests) {
          corner_rows.push_back(fmt::format("{},{},{},{},{},{}", apfx, angle_label(e.angle),
                                            to_string(e.source), num_str(e.value), num_str(e.std),
                                            e.combination));
          if (angle_label(e.angle) == "3pi/4") threequarters.push_back(&e);
          if (source == CornerSource::MutualInfo && below_cft_bound(e)) {
            warnings.push_back(fmt::format("anchor {}: {}({}) = {} sits below the continuum bound {} - 2 std",
                                           ai, to_string(e.source), angle_label(e.angle), e.value,
                                           cft_lower_bound(e.angle)));
          }
        }
        if (threequarters.size() == 2) {
          const double d = std::abs(threequarters[0]->value - threequarters[1]->value);
          const double tol = std::hypot(threequarters[0]->std, threequarters[1]->std);
          if (d > tol) {
            warnings.push_back(fmt::format(
                "anchor {}: the two 3pi/4 combinations ({}) disagree beyond their joint std: {} vs {}", ai,
                to_string(source), threequarters[0]->value, threequarters[1]->value));
          }
        }
      }
    } else {
      std::optional<CoefficientStats> cube, prism;
      for (const SeriesRecord& r : records) {
        if (r.anchor != static_cast<int>(ai) || !r.stats) continue;
        if (r.shape == Shape::Cube) cube = r.stats;
        if (r.shape == Shape::IsoRightPrism) prism = r.stats;
      }
      if (!cube) continue;
      const Extraction3d ex = extract_corners_edges_3d(*cube, prism);
      for (const CornerEstimate& e : ex.corners) {
        corner_rows.push_back(fmt::format("{},{},{},{},{},{}", apfx, angle_label(e.angle),
                                          to_string(e.source), num_str(e.value), num_str(e.std),
                                          e.combination));
      }
      for (const EdgeEstimate& e : ex.edges) {
        edge_rows.push_back(fmt::format("{},{},{},{},{}", apfx, angle_label(e.dihedral),
                                        num_str(e.value), num_str(e.std), e.combination));
      }
    }
  }

  // --- export ----------------------------------------------------------
  const auto t_export = Clock::now();
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  nlohmann::json sweep_index = nlohmann::json::array();
  long total_points = 0;
  for (size_t ai = 0; ai < cfg.anchors.size(); ++ai) {
    for (Shape shape : cfg.shapes) {
      std::string csv = "shape,l,P_B,measure,value\n";
      long clamped = 0;
      for (const SeriesRecord& r : records) {
        if (r.anchor != static_cast<int>(ai) || r.shape != shape) continue;
        for (const SweepPoint& p : r.series.points) {
          csv += fmt::format("{},{},{},{},{}\n", to_string(shape), p.l, num_str(p.perimeter),
                             r.series.measure.label(), num_str(p.value));
          clamped += p.clamped;
          ++total_points;
        }
      }
      const std::string name = fmt::format("sweep_a{}_{}.csv", ai, to_string(shape));
      write_text_file(out / name, csv);
      sweep_index.push_back({{"anchor", ai}, {"shape", to_string(shape)}, {"file", name},
                             {"clamped_eigenvalues", clamped}});
    }
  }
  // Rows arrive ordered (anchor, shape, measure, l); re-sorting is a no-op
  // kept for the bit-stable ordering guarantee.
  {
    std::string csv = dims == 3 ? "anchor_x,anchor_y,anchor_z,shape,measure,basis,power_order,n_fits,"
                                  "log_mean,log_std,edge_mean,edge_std,error\n"
                                : "anchor_x,anchor_y,shape,measure,basis,power_order,n_fits,"
                                  "log_mean,log_std,edge_mean,edge_std,error\n";
    for (const SeriesRecord& r : records) {
      const std::string basis = !r.stats ? "" : (r.stats->basis == FitBasis::Area2d ? "2d" : "3d_edge");
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", anchor_str(cfg, r.anchor),
                         to_string(r.shape), r.series.measure.label(), basis,
                         r.order ? std::to_string(*r.order) : "",
                         r.stats ? std::to_string(r.stats->n_fits) : "",
                         r.stats ? num_str(r.stats->log_mean) : "", r.stats ? num_str(r.stats->log_std) : "",
                         r.stats ? num_str(r.stats->edge_mean) : "",
                         r.stats ? num_str(r.stats->edge_std) : "", r.fit_error);
      if (r.stats_no_edge) {
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", anchor_str(cfg, r.anchor),
                           to_string(r.shape), r.series.measure.label(), "3d_no_edge",
                           r.order ? std::to_string(*r.order) : "", std::to_string(r.stats_no_edge->n_fits),
                           num_str(r.stats_no_edge->log_mean), num_str(r.stats_no_edge->log_std), "", "",
                           "");
      }
    }
    write_text_file(out / "fits.csv", csv);
  }
  {
    std::string csv = corner_csv_header(dims);
    for (const std::string& row : corner_rows) csv += row + "\n";
    write_text_file(out / "corners.csv", csv);
  }
  if (dims == 3) {
    std::string csv = "anchor_x,anchor_y,anchor_z,dihedral,value,std,combination\n";
    for (const std::string& row : edge_rows) csv += row + "\n";
    write_text_file(out / "edges.csv", csv);
  }
  stages["export_seconds"] = seconds_since(t_export);

  // --- plots -----------------------------------------------------------
  const auto t_plots = Clock::now();
  nlohmann::json plot_index = nlohmann::json::array();
  if (cfg.plots) {
    const int acol = dims;  // columns before `angle` in corners.csv
    for (size_t ai = 0; ai < cfg.anchors.size(); ++ai) {
      for (Shape shape : cfg.shapes) {
        const std::string stem = fmt::format("series_a{}_{}", ai, to_string(shape));
        std::string gp;
        gp += "set datafile separator \",\"\n";
        gp += fmt::format("set terminal svg size 800,600\nset output \"{}.svg\"\n", stem);
        gp += fmt::format("set title \"{} anchor ({})\"\nset xlabel \"P_B\"\nset ylabel \"value\"\nset key left top\n",
                          to_string(shape), anchor_str(cfg, static_cast<int>(ai)));
        gp += "plot ";
        for (size_t m = 0; m < cfg.measures.size(); ++m) {
          if (m) gp += ", ";
          gp += fmt::format("\"../sweep_a{}_{}.csv\" every ::1 using 3:(strcol(4) eq \"{}\" ? $5 : 1/0) "
                            "with linespoints title \"{}\"",
                            ai, to_string(shape), cfg.measures[m].label(), cfg.measures[m].label());
        }
        gp += "\n";
        write_text_file(out / "plots" / (stem + ".gp"), gp);
        plot_index.push_back("plots/" + stem + ".gp");
      }
    }
    if (cfg.anchors.size() >= 2 && !corner_rows.empty()) {
      // One error-bar plot per corner angle, anchors on the abscissa.
      std::vector<std::string> angles;
      for (const std::string& row : corner_rows) {
        const auto cells = [&] {
          std::vector<std::string> c;
          std::stringstream ss(row);
          std::string tok;
          while (std::getline(ss, tok, ',')) c.push_back(tok);
          return c;
        }();
        const std::string& ang = cells[acol];
        if (std::find(angles.begin(), angles.end(), ang) == angles.end()) angles.push_back(ang);
      }
      for (const std::string& ang : angles) {
        std::string stem = "corners_" + ang;
        std::replace(stem.begin(), stem.end(), '/', '_');
        std::string gp;
        gp += "set datafile separator \",\"\n";
        gp += fmt::format("set terminal svg size 800,600\nset output \"{}.svg\"\n", stem);
        gp += fmt::format("set title \"corner function at {}\"\nset xlabel \"anchor x\"\nset ylabel \"value\"\n", ang);
        gp += fmt::format("plot \"../corners.csv\" every ::1 using 1:(strcol({}) eq \"{}\" ? ${} : 1/0):{} "
                          "with yerrorbars title \"{}\"\n",
                          acol + 1, ang, acol + 2, acol + 3, ang);
        write_text_file(out / "plots" / (stem + ".gp"), gp);
        plot_index.push_back("plots/" + stem + ".gp");
      }
    }
  }
  stages["plots_seconds"] = seconds_since(t_plots);

  // --- manifest --------------------------------------------------------
  nlohmann::json series_info = nlohmann::json::array();
  for (const SeriesRecord& r : records) {
    nlohmann::json j;
    j["anchor"] = r.anchor;
    j["shape"] = to_string(r.shape);
    j["measure"] = r.series.measure.label();
    j["points"] = r.series.points.size();
    long clamped = 0;
    for (const SweepPoint& p : r.series.points) clamped += p.clamped;
    j["clamped_eigenvalues"] = clamped;
    if (r.order) j["power_order"] = *r.order;
    if (r.stats) {
      j["log_mean"] = r.stats->log_mean;
      j["log_std"] = r.stats->log_std;
      j["n_fits"] = r.stats->n_fits;
      if (r.stats->basis == FitBasis::Area3dEdge) {
        j["edge_mean"] = r.stats->edge_mean;
        j["edge_std"] = r.stats->edge_std;
      }
    }
    if (r.stats_no_edge) {
      j["no_edge_log_mean"] = r.stats_no_edge->log_mean;
      j["no_edge_log_std"] = r.stats_no_edge->log_std;
    }
    if (!r.fit_error.empty()) j["fit_error"] = r.fit_error;
    series_info.push_back(j);
  }
  manifest["series"] = series_info;
  manifest["sweep_files"] = sweep_index;
  manifest["sweep_points_total"] = total_points;
  manifest["plots"] = plot_index;
  manifest["warnings"] = warnings;
  manifest["stages"] = stages;

  nlohmann::json files = nlohmann::json::array();
  std::vector<fs::path> paths;
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
      paths.push_back(fs::relative(entry.path(), out));
    }
  }
  std::sort(paths.begin(), paths.end());
  for (const fs::path& p : paths) {
    files.push_back({{"path", p.generic_string()}, {"fnv1a64", hex64(hash_file((out / p).string()))}});
  }
  manifest["files"] = files;
  write_text_file(out / "manifest.json", manifest.dump(2) + "\n");

  RunResult res;
  res.out_dir = out;
  res.manifest = std::move(manifest);
  return res;
}

std::filesystem::path refit_csv(const std::filesystem::path& sweep_csv,
                                std::optional<int> pin_order, std::optional<double> p_min,
                                bool quiet) {
  std::ifstream in(sweep_csv);
  if (!in) throw IoError("cannot open " + sweep_csv.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("shape,l,P_B,measure,value", 0) != 0) {
    throw IoError("not a sweep CSV (expected header shape,l,P_B,measure,value)");
  }
  std::map<std::string, SweepSeries> by_measure;
  std::map<std::string, Shape> shape_of;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (cells.size() != 5) throw IoError("malformed sweep CSV row: " + line);
    const Shape shape = shape_from_string(cells[0]);
    SweepSeries& s = by_measure[cells[3]];
    shape_of[cells[3]] = shape;
    s.shape = shape;
    s.points.push_back({std::stoi(cells[1]), std::stod(cells[2]), std::stod(cells[4]), 0});
  }
  std::string csv = "shape,measure,basis,power_order,n_fits,log_mean,log_std,edge_mean,edge_std,error\n";
  for (auto& [label, series] : by_measure) {
    std::sort(series.points.begin(), series.points.end(),
              [](const SweepPoint& a, const SweepPoint& b) { return a.l < b.l; });
    const Shape shape = shape_of[label];
    const FitBasis basis = shape_dims(shape) == 3 ? FitBasis::Area3dEdge : FitBasis::Area2d;
    const double pm = p_min ? *p_min : boundary_metrics(shape, shape_dims(shape) == 3 ? 4 : 6).perimeter;
    try {
      auto [order, stats] = select_power_order(series, basis, pm, 0, 4, pin_order);
      csv += fmt::format("{},{},{},{},{},{},{},{},{},\n", to_string(shape), label,
                         basis == FitBasis::Area2d ? "2d" : "3d_edge", order, stats.n_fits,
                         num_str(stats.log_mean), num_str(stats.log_std),
                         basis == FitBasis::Area3dEdge ? num_str(stats.edge_mean) : "",
                         basis == FitBasis::Area3dEdge ? num_str(stats.edge_std) : "");
      if (!quiet) {
        std::cerr << fmt::format("[hlent] {} {}: order {} log coeff {} +- {}\n", to_string(shape), label,
                                 order, stats.log_mean, stats.log_std);
      }
    } catch (const ContractError& e) {
      csv += fmt::format("{},{},{},,,,,,,{}\n", to_string(shape), label,
                         basis == FitBasis::Area2d ? "2d" : "3d_edge", e.what());
    }
  }
  fs::path out = sweep_csv;
  out.replace_filename(sweep_csv.stem().string() + "_fits.csv");
  write_text_file(out, csv);
  return out;
}

}  // namespace hlent
