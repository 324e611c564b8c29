#pragma once

#include <string>
#include <vector>

#include "icstack/ic/runner.hpp"

namespace icstack {

/// One algorithmic step of the dissemination phase with its upper bounds on
/// the global clock and on the acting node's local clock, next to the worst
/// values observed.
struct TimingRow {
  std::string step;
  Time global_bound = 0;
  Time local_bound = 0;
  Time worst_global = -1;  // -1: step never observed
  Time worst_local = -1;

  [[nodiscard]] bool ok() const { return worst_global <= global_bound && worst_local <= local_bound; }
};

struct TimingCheck {
  std::vector<TimingRow> rows;
  Time obtain_bound = 0;
  Time worst_obtain = -1;  // latest local obtain time of an honest value at an honest node
  std::size_t obtained = 0;
  std::size_t expected = 0;  // honest (node, slot) pairs

  [[nodiscard]] bool ok() const;
};

/// Runs the dissemination of MC_RBB (multicast) or BC_RBB (consistent
/// broadcast) under worst-case honest delivery and checks every step of
/// the clock tables. Only honest-to-honest traffic is measured.
/// Throws ConfigError for other algorithms or more than one instance.
[[nodiscard]] TimingCheck check_dissemination_timing(RunOptions opts);

}  // namespace icstack
