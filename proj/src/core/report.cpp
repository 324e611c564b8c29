#include "icstack/core/report.hpp"

#include <algorithm>

namespace icstack {

std::optional<Time> RunReport::makespan() const {
  Time worst = 0;
  for (std::size_t i = 0; i < honest.size(); ++i) {
    if (!honest[i]) continue;
    if (!decision_time[i]) return std::nullopt;
    worst = std::max(worst, *decision_time[i]);
  }
  return worst;
}

}  // namespace icstack
