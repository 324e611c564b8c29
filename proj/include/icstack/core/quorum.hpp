#pragma once

#include <cstddef>

namespace icstack {

struct QuorumThresholds {
  std::size_t n_minus_t;       // consistent-broadcast certificate size
  std::size_t echo_threshold;  // echoes before a reliable-broadcast ready
  std::size_t ready_threshold; // readies that force a ready (amplification)
  std::size_t decide_threshold;  // readies before delivery

  friend bool operator==(const QuorumThresholds&, const QuorumThresholds&) = default;
};

/// Requires n >= 4 and 1 <= t <= floor((n-1)/3); throws ConfigError otherwise.
[[nodiscard]] QuorumThresholds quorum_thresholds(std::size_t n, std::size_t t);

/// Same arithmetic without the n >= 4 / t >= 1 preconditions, for
/// degenerate configurations used by tests and fault-free harnesses.
[[nodiscard]] QuorumThresholds quorum_thresholds_unchecked(std::size_t n, std::size_t t);

}  // namespace icstack
