#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include <boost/random/mersenne_twister.hpp>

namespace linklda {

/// Explicitly seeded generator owned by one chain. Boost's MT19937-64 gives
/// the same stream as std::mt19937_64 with a cheaper refill.
///
/// Every categorical draw consumes exactly one uniform variate, so a chain's
/// random stream is reproducible from its seed and the update order alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n).
  std::size_t below(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  boost::random::mt19937_64& engine() { return engine_; }

  std::string serialize() const;
  void restore(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  boost::random::mt19937_64 engine_;
};

/// Inverse-CDF lookup: index of the first cumulative weight exceeding u * total.
/// `cumulative` must be non-decreasing with its last entry equal to `total`.
inline std::size_t pick_cumulative(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  std::size_t i = 0;
  const std::size_t last = cumulative.size() - 1;
  if (last < 16) {
    while (i < last && cumulative[i] <= target) ++i;
    return i;
  }
  // Same index as the scan: first entry above target, capped at the last.
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end() - 1, target);
  return static_cast<std::size_t>(it - cumulative.begin());
}

}  // namespace linklda
