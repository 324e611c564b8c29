#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "icstack/core/types.hpp"

namespace icstack::sim {

enum class DriftMode { None, RandomWalk };

/// Local clock of one node: Clock[n_i](g) = g + off(g), with off a seeded
/// piecewise-linear walk of slope -1, 0 or +1 that stays in [-max_drift,
/// max_drift] and starts in [0, max_drift]. Local time never decreases.
class DriftClock {
 public:
  DriftClock(Time max_drift, DriftMode mode, std::uint64_t seed);

  [[nodiscard]] Time offset_at(Time global);
  [[nodiscard]] Time local_of(Time global) { return global + offset_at(global); }
  /// Smallest global time g >= 0 with local_of(g) >= local.
  [[nodiscard]] Time first_global_at_local(Time local);
  [[nodiscard]] Time max_drift() const { return max_drift_; }

 private:
  struct Segment {
    Time start;
    Time offset;
    int slope;
  };

  void extend_to(Time global);

  Time max_drift_;
  DriftMode mode_;
  std::mt19937_64 rng_;
  std::vector<Segment> segments_;
  Time covered_until_ = 0;  // segments_ describe [0, covered_until_)
};

/// splitmix64 finaliser; used to derive independent seeds.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x);
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                        std::uint64_t c = 0);

}  // namespace icstack::sim
