#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icstack/core/types.hpp"

namespace icstack {

/// One delivery surfaced to the application by eventual IC.
struct UpcallRecord {
  std::uint32_t run = 0;
  NodeId slot;
  Value value;
  Time global = 0;
};

/// Outcome of one simulated run. Times are global virtual time.
struct RunReport {
  std::map<std::string, std::uint64_t> messages_by_primitive;
  std::uint64_t total_messages = 0;
  std::uint64_t signature_ops = 0;
  std::uint64_t signature_generations = 0;
  std::uint64_t signature_verifications = 0;

  std::vector<bool> honest;                         // per node
  std::vector<std::optional<Time>> decision_time;   // per node, honest only
  std::vector<std::vector<ResultVector>> outcomes;  // [instance][node]
  std::vector<std::vector<std::optional<Time>>> instance_done;  // [instance][node]
  std::vector<std::vector<UpcallRecord>> upcalls;  // per node, in delivery order (EIC)

  std::uint64_t late_drops = 0;
  std::uint64_t window_drops = 0;
  std::uint64_t invalid_drops = 0;
  std::uint64_t unauth_drops = 0;
  std::uint64_t retrieves = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t events = 0;
  std::uint64_t max_buffer_span = 0;
  std::uint32_t max_consensus_phase = 0;
  bool assumption_breach = false;
  bool drained = false;  // event queue emptied before the budget ran out
  Time end_time = 0;
  std::uint64_t trace_hash = 0;
  std::vector<std::string> warnings;

  /// Latest honest decision time, if every honest node decided.
  [[nodiscard]] std::optional<Time> makespan() const;
};

}  // namespace icstack
