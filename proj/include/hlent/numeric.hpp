#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace hlent {

// Neumaier-compensated accumulator for long oscillatory sums.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must be
// independent; outputs should be written to disjoint, pre-sized slots so the
// result is identical for any worker count.
void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn);

std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);
std::uint64_t hash_file(const std::string& path);

// Shortest round-trip decimal representation.
std::string num_str(double v);

// Canonical bit-exact token for hashing/config echo of floating-point keys.
std::string bits_str(double v);

}  // namespace hlent
