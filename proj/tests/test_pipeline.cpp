#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hlent/errors.hpp"
#include "hlent/numeric.hpp"
#include "hlent/pipeline.hpp"

using namespace hlent;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kSmallConfig = R"(
# compact periodic run
[lattice]
dims = 2
sizes = 40 40
bc = pbc
sampling = half

[window]
extent = 14 14
anchors = 19.5,19.5

[experiment]
shapes = square triangle
l_min = 2
l_max = 4
measures = ln mi
renyi_order = 0.5

[execution]
workers = 2

[output]
plots = true
)";

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config_text(kSmallConfig);
  CHECK(cfg.lattice.dims == 2);
  CHECK(cfg.lattice.sizes[0] == 40);
  CHECK(cfg.lattice.bc == Bc::Periodic);
  CHECK(cfg.lattice.sampling == Sampling::HalfShiftK);
  CHECK(cfg.lattice.omega == 0.0);
  CHECK(cfg.anchors.size() == 1);
  CHECK(cfg.shapes.size() == 2);
  CHECK(cfg.measures.size() == 2);
  CHECK(cfg.measures[1].order == doctest::Approx(0.5));
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("defaults") {
    const RunConfig fbc = parse_config_text(
        "[lattice]\ndims=1\nsizes=12\nbc=fbc\n[window]\nanchors=6.0\n"
        "[experiment]\nshapes=square\nmeasures=ln\n");
    CHECK(fbc.lattice.sampling == Sampling::IntegerK);
    CHECK(fbc.lattice.omega == 0.0);
    const RunConfig pbc_int = parse_config_text(
        "[lattice]\ndims=2\nsizes=30 30\nbc=pbc\nsampling=integer\n[window]\nanchors=14.5,14.5\n"
        "[experiment]\nshapes=square\nmeasures=ln\n");
    CHECK(pbc_int.lattice.omega == doctest::Approx(1e-3));
  }
  SUBCASE("unknown keys and malformed lines are rejected") {
    CHECK_THROWS_AS(parse_config_text("[lattice]\ndims=2\ntypo=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("dims=2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[lattice\ndims=2\n"), ConfigError);
  }
  SUBCASE("validation names the offending anchor and shape") {
    RunConfig cfg2 = parse_config_text(kSmallConfig);
    cfg2.anchors[0] = Anchor{{5.0, 5.0, 0.0}};
    try {
      cfg2.validate();
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("5") != std::string::npos);
      CHECK(msg.find("escapes") != std::string::npos);
    }
  }
  SUBCASE("3d shapes reject partner measures") {
    CHECK_THROWS_AS(parse_config_text(
                        "[lattice]\ndims=3\nsizes=20 20 20\nbc=pbc\n[window]\nanchors=9.5,9.5,9.5\n"
                        "[experiment]\nshapes=cube\nmeasures=ln\nl_min=2\nl_max=4\n")
                        .validate(),
                    ConfigError);
  }
}

TEST_CASE("run produces a complete, reproducible output tree") {
  const fs::path out1 = fresh_dir("hlent_run1");
  const fs::path out2 = fresh_dir("hlent_run2");
  const fs::path cache = fresh_dir("hlent_run_cache");

  RunConfig cfg = parse_config_text(kSmallConfig);
  cfg.cache_dir = cache;
  cfg.out_dir = out1;
  const RunResult r1 = hlent::run(cfg);

  SUBCASE("manifest indexes every file with a matching hash") {
    CHECK(fs::exists(out1 / "manifest.json"));
    int checked = 0;
    for (const auto& f : r1.manifest["files"]) {
      const fs::path p = out1 / f["path"].get<std::string>();
      CHECK(fs::exists(p));
      CHECK(hex64(hash_file(p.string())) == f["fnv1a64"].get<std::string>());
      ++checked;
    }
    CHECK(checked >= 4);  // two sweeps, fits, corners, plots
    // every real file shows up in the manifest
    int on_disk = 0;
    for (const auto& entry : fs::recursive_directory_iterator(out1)) {
      if (entry.is_regular_file() && entry.path().filename() != "manifest.json") ++on_disk;
    }
    CHECK(on_disk == checked);
  }
  SUBCASE("sweep points and corner files") {
    CHECK(r1.manifest["sweep_points_total"].get<long>() == 2 * 3 * 2);  // shapes x scales x measures
    CHECK(fs::exists(out1 / "corners.csv"));
    CHECK(fs::exists(out1 / "sweep_a0_square.csv"));
    const std::string sweep = read_file(out1 / "sweep_a0_square.csv");
    CHECK(sweep.rfind("shape,l,P_B,measure,value\n", 0) == 0);
    CHECK(sweep.find("square,2,8,LN,") != std::string::npos);
  }
  SUBCASE("second run from the warm cache is byte identical") {
    RunConfig cfg2 = cfg;
    cfg2.out_dir = out2;
    const RunResult r2 = hlent::run(cfg2);
    CHECK(r2.manifest["cache"]["hits"].get<int>() == 1);
    CHECK(r2.manifest["cache"]["misses"].get<int>() == 0);
    for (const auto& f : r1.manifest["files"]) {
      const auto rel = f["path"].get<std::string>();
      CHECK(read_file(out1 / rel) == read_file(out2 / rel));
    }
  }
  SUBCASE("plot scripts reference the CSVs instead of recomputing") {
    const std::string gp = read_file(out1 / "plots" / "series_a0_square.gp");
    CHECK(gp.find("sweep_a0_square.csv") != std::string::npos);
    CHECK(gp.find("LN") != std::string::npos);
  }
}

TEST_CASE("multi-anchor runs emit corner estimates and per-angle position plots") {
  const fs::path out = fresh_dir("hlent_pos_out");
  const fs::path cache = fresh_dir("hlent_pos_cache");
  RunConfig cfg = parse_config_text(R"(
[lattice]
dims = 2
sizes = 40 40
bc = pbc
sampling = half
[window]
extent = 26 26
anchors = 19.5,19.5 ; 13.5,13.5
[experiment]
shapes = square triangle
l_min = 2
l_max = 8
measures = ln
p_min_l = 2
[execution]
workers = 2
)");
  cfg.out_dir = out;
  cfg.cache_dir = cache;
  const RunResult res = hlent::run(cfg);
  CHECK(fs::exists(out / "plots" / "corners_pi_2.gp"));
  CHECK(fs::exists(out / "plots" / "corners_pi_4.gp"));
  // one corner block per anchor in the corners file
  const std::string corners = read_file(out / "corners.csv");
  CHECK(corners.find("19.5,19.5,pi/2") != std::string::npos);
  CHECK(corners.find("13.5,13.5,pi/2") != std::string::npos);
  CHECK(corners.find("pi/4,LN") != std::string::npos);
  (void)res;
}

TEST_CASE("fit subcommand refits an existing sweep") {
  const fs::path dir = fresh_dir("hlent_refit");
  const fs::path csv = dir / "sweep.csv";
  {
    std::ofstream out(csv);
    out << "shape,l,P_B,measure,value\n";
    for (int l = 6; l <= 15; ++l) {
      const double P = 4.0 * l;
      out << "square," << l << "," << num_str(P) << ",LN," << num_str(0.5 * P - 0.1 * std::log(P) + 0.3)
          << "\n";
    }
  }
  const fs::path fits = refit_csv(csv, std::nullopt, std::nullopt);
  const std::string text = read_file(fits);
  const auto row = text.find("square,LN,2d,0,6,");
  REQUIRE(row != std::string::npos);
  // recovered log coefficient sits in the next cell
  const auto cell = text.substr(row + std::string("square,LN,2d,0,6,").size());
  CHECK(std::stod(cell) == doctest::Approx(0.1).epsilon(1e-8));
  CHECK_THROWS_AS(refit_csv(dir / "missing.csv", std::nullopt, std::nullopt), IoError);
}

TEST_CASE("command line contract") {
  const fs::path dir = fresh_dir("hlent_cli");
  const fs::path good_cfg = dir / "good.ini";
  const fs::path bad_cfg = dir / "bad.ini";
  {
    std::ofstream out(good_cfg);
    out << "[lattice]\ndims = 2\nsizes = 30 30\nbc = pbc\n[window]\nextent = 8 8\nanchors = 14.5,14.5\n"
        << "[experiment]\nshapes = square\nl_min = 2\nl_max = 2\nmeasures = ln\n"
        << "[execution]\nworkers = 2\ncache_dir = " << (dir / "cache").string() << "\n"
        << "[output]\nout_dir = " << (dir / "out").string() << "\n";
  }
  {
    std::ofstream out(bad_cfg);
    // anchor pushed against the edge: the largest region cannot fit
    out << "[lattice]\ndims = 2\nsizes = 30 30\nbc = pbc\n[window]\nextent = 8 8\nanchors = 2.5,2.5\n"
        << "[experiment]\nshapes = square\nl_min = 2\nl_max = 2\nmeasures = ln\n";
  }
  auto exit_code = [](const std::string& cmd) {
    const int raw = std::system(cmd.c_str());
    return WEXITSTATUS(raw);
  };
  const std::string cli = HLENT_CLI_PATH;
  CHECK(exit_code(cli + " run " + good_cfg.string() + " --quiet >/dev/null 2>&1") == 0);
  CHECK(exit_code(cli + " run " + bad_cfg.string() + " >/dev/null 2>&1") == 1);
  CHECK(exit_code(cli + " run " + (dir / "nonexistent.ini").string() + " >/dev/null 2>&1") == 1);
  // feeding `fit` a file with the wrong schema is a runtime failure, not a config error
  CHECK(exit_code(cli + " fit " + (dir / "out" / "corners.csv").string() + " >/dev/null 2>&1") == 2);
}
