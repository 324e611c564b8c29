#pragma once

#include <cstddef>
#include <cstdint>

#include "icstack/core/types.hpp"

namespace icstack {

inline constexpr std::size_t kMaxNodes = 64;
inline constexpr std::uint32_t kDefaultBufferWindow = 8;

/// System-wide parameters shared by every node.
struct SystemConfig {
  std::size_t n = 4;
  std::size_t t = 1;
  Time end_barrier = 64;     // End, on local clocks
  Time round_timeout = 3000; // T_r for the timeout-driven rounds
  std::uint32_t buffer_window = kDefaultBufferWindow;  // H

  /// Throws ConfigError naming the violated bound.
  void validate() const;

  [[nodiscard]] static std::size_t max_faults(std::size_t n) { return n == 0 ? 0 : (n - 1) / 3; }
};

/// Local computation and network bounds of the timing model.
struct ClockParams {
  Time t_comp = 1;  // per emission step
  Time drift = 2;   // Delta: |Clock[n_i] - Clock| bound
  Time delta = 10;  // delta: honest-to-honest delivery bound

  void validate() const;
};

/// A node leaves value dissemination once its local clock reaches End.
[[nodiscard]] constexpr bool barrier_reached(Time local, Time end_barrier) { return local >= end_barrier; }

/// End value from which every honest multicast value is obtained in time.
[[nodiscard]] Time multicast_obtain_bound(const ClockParams& c);
/// End value from which every honest consistent-broadcast value is obtained.
[[nodiscard]] Time consistent_obtain_bound(const ClockParams& c, std::size_t n);
/// Smallest round timeout under which honest round messages are never late.
[[nodiscard]] Time round_timeout_bound(const ClockParams& c);

}  // namespace icstack
