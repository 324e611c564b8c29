#pragma once

#include <optional>
#include <set>
#include <vector>

#include "icstack/core/complexity.hpp"
#include "icstack/core/report.hpp"
#include "icstack/ic/runner.hpp"

namespace icstack {

/// One stand-alone execution of a primitive. The sender of MU, RBB and CB
/// is node 1; BC and MC run with every node proposing.
struct PrimitiveOptions {
  std::size_t n = 4;
  std::optional<std::size_t> t;  // default floor((n-1)/3)
  std::uint64_t seed = 1;
  bool graceful = true;
  ClockParams clock;
  crypto::ProofMode proof = crypto::ProofMode::Signature;
  CoinMode coin = CoinMode::Seeded;
  std::uint32_t window = kDefaultBufferWindow;
  std::vector<int> bits;      // BC inputs; default all 1
  std::vector<Value> values;  // MC inputs, or entry 0 as the sender value; default "v<i>"
  std::set<NodeId> silent;    // nodes that never act
  bool duplicate_honest = false;
  Time budget = 1'000'000;
};

struct PrimitiveResult {
  std::uint64_t messages = 0;  // retrieve traffic excluded
  std::uint64_t signature_ops = 0;
  std::vector<std::optional<Value>> delivered;  // per node; BC outputs "0" / "1"
  bool drained = false;
  Time end_time = 0;
  std::uint32_t max_phase = 0;  // BC / MC: highest decision phase
};

[[nodiscard]] PrimitiveResult run_primitive(Primitive p, const PrimitiveOptions& opts);

}  // namespace icstack
