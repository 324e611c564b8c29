#include "icstack/core/quorum.hpp"

#include <string>

#include "icstack/core/config.hpp"

namespace icstack {

QuorumThresholds quorum_thresholds_unchecked(std::size_t n, std::size_t t) {
  return QuorumThresholds{n - t, (n + t) / 2 + 1, t + 1, 2 * t + 1};
}

QuorumThresholds quorum_thresholds(std::size_t n, std::size_t t) {
  if (n < 4) throw ConfigError("quorum_thresholds: n = " + std::to_string(n) + " < 4");
  if (t < 1) throw ConfigError("quorum_thresholds: t must be >= 1");
  if (t > SystemConfig::max_faults(n)) {
    throw ConfigError("t = " + std::to_string(t) + " violates t <= floor((n-1)/3) = " +
                      std::to_string(SystemConfig::max_faults(n)));
  }
  return quorum_thresholds_unchecked(n, t);
}

}  // namespace icstack
