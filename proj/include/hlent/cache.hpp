#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hlent/correlators.hpp"

namespace hlent {

/// One named float64 array inside a container file.
struct ArrayBlob {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<double> data;
};

// Container layout (little-endian): 8-byte magic "HLNT1\0\0\0", u32 JSON
// header length, JSON header {key, arrays:[{name, shape}]}, then the raw
// float64 payloads in header order.
void write_container(const std::filesystem::path& path, const std::string& key,
                     const std::vector<ArrayBlob>& blobs);

/// Empty optional when the file is missing, unreadable, or keyed differently.
std::optional<std::vector<ArrayBlob>> read_container(const std::filesystem::path& path,
                                                     const std::string& key);

/// Content-addressed store of correlator tables / box matrices.
class CorrelatorCache {
 public:
  explicit CorrelatorCache(std::filesystem::path dir);

  std::filesystem::path path_for(const std::string& key) const;

  std::optional<CorrelatorProvider> load(const LatticeSpec& spec, const Box& box, bool fbc_fast) const;
  void store(const CorrelatorProvider& provider, bool fbc_fast) const;

  /// load, else compute and persist. `hit` reports which happened.
  CorrelatorProvider load_or_compute(const LatticeSpec& spec, const Box& box,
                                     const CorrelatorOptions& opt, bool* hit = nullptr) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace hlent
