#include <CLI11.hpp>

#include <iostream>

#include "hlent/errors.hpp"
#include "hlent/pipeline.hpp"

namespace {

// 0 success, 1 config/usage error, 2 numerical or runtime failure.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const hlent::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const hlent::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"harmonic-lattice entanglement sweeps, area-law fits and corner/edge extraction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("hlent ") + hlent::kVersion);

  std::string config_path;
  hlent::RunOptions opt;
  opt.quiet = false;
  int workers = 0;
  int pin_order = -1;
  std::string cache_dir, out_dir;
  bool no_plots = false;
  bool quiet = false;
  bool help_config = false;

  auto* run = app.add_subcommand("run", "execute a config-driven experiment");
  run->add_option("config,--config", config_path, "experiment config file")->required(false);
  run->add_option("--workers", workers, "worker threads (default: config / hardware)");
  run->add_option("--pin-order", pin_order, "fix the inverse-power fit order instead of auto-selecting");
  run->add_option("--cache", cache_dir, "correlator cache directory override");
  run->add_option("--out", out_dir, "output directory override");
  run->add_flag("--no-plots", no_plots, "skip plot script emission");
  run->add_flag("--quiet", quiet, "suppress progress notes");
  run->add_flag("--help-config", help_config, "print the config key reference and exit");

  auto* verify = app.add_subcommand("verify", "run the oracle-equivalence and invariant suite at small sizes");
  int verify_workers = 0;
  verify->add_option("--workers", verify_workers, "worker threads");

  auto* fit = app.add_subcommand("fit", "refit an existing sweep CSV without recomputation");
  std::string sweep_csv;
  int fit_pin = -1;
  double fit_pmin = -1.0;
  fit->add_option("csv", sweep_csv, "sweep CSV written by `run`")->required();
  fit->add_option("--pin-order", fit_pin, "fix the inverse-power fit order");
  fit->add_option("--p-min", fit_pmin, "fit window lower bound on P_B");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return guarded([&] {
      if (help_config) {
        std::cout << hlent::config_reference();
        return 0;
      }
      if (config_path.empty()) throw hlent::ConfigError("run needs a config file (see --help-config)");
      const hlent::RunConfig cfg = hlent::parse_config_file(config_path);
      if (workers > 0) opt.workers = workers;
      if (pin_order >= 0) opt.pin_order = pin_order;
      if (!cache_dir.empty()) opt.cache_dir = cache_dir;
      if (!out_dir.empty()) opt.out_dir = out_dir;
      opt.no_plots = no_plots;
      opt.quiet = quiet;
      const auto res = hlent::run(cfg, opt);
      std::cout << "wrote " << (res.out_dir / "manifest.json").string() << "\n";
      return 0;
    });
  }
  if (verify->parsed()) {
    return guarded([&] {
      const int w = verify_workers > 0 ? verify_workers : 2;
      return hlent::selfcheck(w, std::cout) ? 0 : 2;
    });
  }
  if (fit->parsed()) {
    return guarded([&] {
      std::optional<int> pin;
      if (fit_pin >= 0) pin = fit_pin;
      std::optional<double> pmin;
      if (fit_pmin >= 0) pmin = fit_pmin;
      const auto out = hlent::refit_csv(sweep_csv, pin, pmin, false);
      std::cout << "wrote " << out.string() << "\n";
      return 0;
    });
  }
  return 1;
}
