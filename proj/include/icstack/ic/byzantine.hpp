#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string_view>
#include <tuple>
#include <vector>

#include "icstack/simnet/network.hpp"

namespace icstack {

enum class Behavior { Crash, Equivocate, WithholdFinal, DelayToBarrier, SpamPhases, Silent };

[[nodiscard]] std::string_view to_string(Behavior b);
/// Accepts crash, equivocate, withhold_final, delay_to_barrier, spam_phases,
/// silent ('-' and '_' interchangeable).
[[nodiscard]] std::optional<Behavior> behavior_from_string(std::string_view s);

struct BehaviorSpec {
  Behavior kind = Behavior::Silent;
  Time crash_at = 0;                // Crash: global time from which the node is dead
  std::vector<NodeId> subset;       // WithholdFinal / DelayToBarrier targets
  std::vector<Value> per_recipient; // Equivocate: value sent to node j is entry (j-1) mod size
  std::uint32_t spam_count = 32;    // SpamPhases: future phases flooded per instance
};

struct AdversarySpec {
  std::vector<NodeId> corrupted;
  std::map<NodeId, BehaviorSpec> behaviors;  // corrupted nodes without an entry stay silent
  std::uint64_t scheduler_seed = 0;
  double duplicate_rate = 0.0;
};

/// Timing context a scripted node needs to aim at the barrier or round deadlines.
struct AdversaryTiming {
  Time end_barrier = 0;
  Time round_timeout = 0;
  Time drift = 0;
};

/// A corrupted node: runs an honest process and rewrites, drops or delays
/// what it sends according to its script.
class ByzantineNode : public sim::Process {
 public:
  ByzantineNode(std::unique_ptr<sim::Process> inner, BehaviorSpec spec, AdversaryTiming timing,
                std::uint64_t seed);

  void on_start(sim::Env& env) override;
  void on_message(sim::Env& env, NodeId src, const MessagePtr& m) override;
  void on_timer(sim::Env& env, std::uint64_t id) override;
  void on_flush(sim::Env& env) override;

  [[nodiscard]] const BehaviorSpec& spec() const { return spec_; }

 private:
  class FilterEnv;
  friend class FilterEnv;

  bool dead(const sim::Env& env) const;
  void emit(sim::Env& env, NodeId dst, MessagePtr m);
  MessagePtr equivocate(NodeId self, NodeId dst, const MessagePtr& m);
  Value value_for(NodeId self, NodeId dst) const;
  void spam(sim::Env& env, const Message& m);

  std::unique_ptr<sim::Process> inner_;
  BehaviorSpec spec_;
  AdversaryTiming timing_;
  std::mt19937_64 rng_;
  std::set<std::tuple<std::uint32_t, std::uint32_t, Layer>> spammed_;
};

}  // namespace icstack
