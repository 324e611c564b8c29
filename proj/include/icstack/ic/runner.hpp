#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "icstack/core/config.hpp"
#include "icstack/core/report.hpp"
#include "icstack/ic/byzantine.hpp"
#include "icstack/ic/ic_node.hpp"

namespace icstack {

struct RunOptions {
  Algorithm algo = Algorithm::BC_RBB;
  SystemConfig cfg;
  ClockParams clock;
  AdversarySpec adv;
  std::uint64_t seed = 1;
  std::uint32_t parallel_instances = 1;
  bool worst_case_delivery = false;
  sim::DriftMode drift = sim::DriftMode::RandomWalk;
  CoinMode coin = CoinMode::Seeded;
  crypto::ProofMode proof = crypto::ProofMode::Signature;
  /// Private values for instance 0, one per node; defaults to "v<i>".
  std::optional<std::vector<Value>> values;
  Time budget = 1'000'000;
  std::ostream* trace = nullptr;
  std::function<void(const sim::ObsEvent&)> observer;
  bool duplicate_honest = false;
};

/// Graceful scheduling: worst-case honest delivery and no drift, so every
/// node runs in lock step.
[[nodiscard]] RunOptions graceful(RunOptions o);

/// Smallest End for which honest dissemination finishes before the barrier,
/// with k parallel instances.
[[nodiscard]] Time auto_end_barrier(Algorithm a, std::size_t n, const ClockParams& c,
                                    std::uint32_t instances = 1);

/// Default private value of `node` in instance `run`.
[[nodiscard]] Value default_value(NodeId node, std::uint32_t run);

/// Adversary used by sweeps and fuzzing: t nodes chosen by rotating on
/// `seed`, all running `b`. Subsets are the odd-numbered nodes and crash
/// times fall in [0, horizon].
[[nodiscard]] AdversarySpec standard_adversary(Behavior b, std::size_t n, std::size_t t,
                                               std::uint64_t seed, Time horizon);

/// Builds, runs and summarises one simulation. Throws ConfigError on an
/// invalid configuration or adversary.
[[nodiscard]] RunReport run_ic(const RunOptions& opts);

struct PropertyVerdict {
  bool agreement = true;
  bool validity = true;
  bool validity_checked = false;
  bool termination = true;
  std::vector<std::string> violations;

  [[nodiscard]] bool ok() const { return agreement && validity && termination; }
};

/// Interactive-consistency Agreement, Validity and Termination for one run.
/// Validity is only asserted when its preconditions hold (End at or above
/// the dissemination bound; no assumption breach for relay rounds).
[[nodiscard]] PropertyVerdict check_properties(const RunOptions& opts, const RunReport& report);

}  // namespace icstack
