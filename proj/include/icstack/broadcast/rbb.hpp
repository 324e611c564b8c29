#pragma once

#include <compare>
#include <functional>
#include <map>
#include <vector>

#include "icstack/broadcast/message.hpp"
#include "icstack/core/quorum.hpp"
#include "icstack/simnet/network.hpp"

namespace icstack {

struct RbbKey {
  NodeId origin;
  std::uint32_t phase = 0;
  std::uint8_t step = 0;

  friend auto operator<=>(const RbbKey&, const RbbKey&) = default;
};

struct RbbState {
  bool initial_seen = false;
  bool echo_sent = false;
  bool ready_sent = false;
  bool delivered = false;
  // Per distinct value: bitmask of nodes that echoed / readied it.
  std::vector<std::pair<Value, std::uint64_t>> echoes;
  std::vector<std::pair<Value, std::uint64_t>> readies;
  std::uint64_t echoed_by = 0;
  std::uint64_t readied_by = 0;
};

/// Bracha reliable broadcast for every instance carried under one header
/// (run, slot, layer), as seen by one node.
class RbbEngine {
 public:
  using DeliverFn = std::function<void(sim::Env&, const RbbKey&, const Value&)>;
  /// Instances for which admit() is false are dropped and counted as window drops.
  using AdmitFn = std::function<bool(const RbbKey&)>;

  RbbEngine(Header hdr, std::size_t n, std::size_t t, DeliverFn on_deliver);

  void set_admit(AdmitFn admit) { admit_ = std::move(admit); }

  /// Starts the instance `key`; key.origin must be the calling node.
  void broadcast(sim::Env& env, const RbbKey& key, const Value& v);
  void on_message(sim::Env& env, NodeId src, const RbbMsg& m);

  [[nodiscard]] const RbbState* state(const RbbKey& key) const;
  [[nodiscard]] std::size_t instance_count() const { return states_.size(); }
  [[nodiscard]] const QuorumThresholds& thresholds() const { return q_; }

 private:
  void send_all(sim::Env& env, RbbKind kind, const RbbKey& key, const Value& v);

  Header hdr_;
  std::size_t n_;
  QuorumThresholds q_;
  DeliverFn on_deliver_;
  AdmitFn admit_;
  std::map<RbbKey, RbbState> states_;
};

}  // namespace icstack
