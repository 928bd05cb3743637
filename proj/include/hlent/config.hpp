#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hlent/regions.hpp"
#include "hlent/scaling.hpp"

namespace hlent {

/// A full experiment description, parsed from a sectioned key=value file.
/// See docs in README / `--help config`.
struct RunConfig {
  LatticeSpec lattice;

  // D window: correlators are evaluated once per anchor over a box of this
  // extent and every region must fit inside it. Defaults to the tightest
  // box holding the largest region.
  std::array<int, 3> window_extent{0, 0, 0};  // 0 = auto
  std::vector<Anchor> anchors;

  std::vector<Shape> shapes;
  int l_min = 6;
  int l_max = 14;
  std::vector<MeasureSpec> measures;
  double renyi_order = 0.5;
  std::optional<int> power_order;  // empty = pick by smallest std
  std::optional<int> p_min_l;     // fit window starts at P_B(p_min_l); default 6 (2D) / 4 (3D)

  int workers = 0;  // 0 = hardware
  std::filesystem::path cache_dir = "cache";
  bool fbc_fast = false;

  std::filesystem::path out_dir = "out";
  bool plots = true;

  int effective_workers() const;
  double p_min_for(Shape s) const;
  std::array<int, 3> effective_window_extent() const;
  Box window_box(const Anchor& anchor) const;

  /// Cross-field checks: shapes match dims, every anchor's largest region
  /// fits its D window, D windows sit on dynamical sites. ConfigError on
  /// violation, with the anchor and shape named.
  void validate() const;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config_file(const std::filesystem::path& path);

/// Key-by-key reference for the config format (shown by `--help-config`).
std::string config_reference();

/// Canonical echo of a config (every effective value, one per line).
std::string config_echo(const RunConfig& cfg);

}  // namespace hlent
