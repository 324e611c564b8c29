#include "icstack/core/config.hpp"

#include <string>

namespace icstack {

void SystemConfig::validate() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (n > kMaxNodes) {
    throw ConfigError("n = " + std::to_string(n) + " exceeds the supported maximum of " +
                      std::to_string(kMaxNodes));
  }
  if (t > max_faults(n)) {
    throw ConfigError("t = " + std::to_string(t) + " violates t <= floor((n-1)/3) = " +
                      std::to_string(max_faults(n)) + " for n = " + std::to_string(n));
  }
  if (end_barrier <= 0) throw ConfigError("end_barrier must be > 0");
  if (round_timeout <= 0) throw ConfigError("round_timeout must be > 0");
  if (buffer_window < 1) throw ConfigError("buffer_window must be >= 1");
}

void ClockParams::validate() const {
  if (t_comp < 0) throw ConfigError("t_comp must be >= 0");
  if (drift < 0) throw ConfigError("drift (Delta) must be >= 0");
  if (delta < 0) throw ConfigError("delta must be >= 0");
}

Time multicast_obtain_bound(const ClockParams& c) { return c.t_comp + 3 * c.drift + c.delta; }

Time consistent_obtain_bound(const ClockParams& c, std::size_t n) {
  return static_cast<Time>(n + 2) * c.t_comp + 7 * c.drift + 3 * c.delta;
}

Time round_timeout_bound(const ClockParams& c) { return multicast_obtain_bound(c); }

}  // namespace icstack
