#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "hlent/cache.hpp"
#include "hlent/config.hpp"

namespace hlent {

inline constexpr const char* kVersion = "0.1.0";

/// Command-line overrides applied on top of a parsed config.
struct RunOptions {
  std::optional<int> workers;
  std::optional<int> pin_order;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> out_dir;
  bool no_plots = false;
  bool quiet = true;
};

struct RunResult {
  std::filesystem::path out_dir;
  nlohmann::json manifest;
};

/// Executes sweeps, fits, corner/edge extraction; writes CSVs, plot scripts
/// and a manifest (config echo, stage wall-clocks, file hashes). Re-running
/// with an unchanged config reuses cached correlators and reproduces the
/// CSVs byte for byte.
RunResult run(const RunConfig& cfg, const RunOptions& opt = {});

/// `fit` subcommand: refit an existing sweep CSV without recomputation.
/// Writes `<stem>_fits.csv` next to the input and returns its path.
std::filesystem::path refit_csv(const std::filesystem::path& sweep_csv,
                                std::optional<int> pin_order, std::optional<double> p_min,
                                bool quiet = true);

/// `verify` subcommand: oracle-equivalence and invariant suite at small
/// sizes. Prints one line per check; returns false on any failure.
bool selfcheck(int workers, std::ostream& out);

// Shared formatting helpers (CSV cells, angle labels).
std::string angle_label(double angle);

}  // namespace hlent
