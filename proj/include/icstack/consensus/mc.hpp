#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "icstack/broadcast/rbb.hpp"
#include "icstack/consensus/bc.hpp"

namespace icstack {

/// Multi-valued consensus built from two reliable broadcasts and one binary
/// consensus, one instance as seen by one node.
///
/// 1. Reliably broadcast INIT(v); after n-t INITs, vote w = the value held by
///    at least n-2t of them, or null.
/// 2. Reliably broadcast VECT(w). A vote is accepted once the INITs delivered
///    locally justify it. After n-t accepted votes, propose 1 to binary
///    consensus iff all n-t carry the same non-null value.
/// 3. On 0 decide null; on 1 decide the non-null value with at least t+1
///    accepted votes.
class McInstance {
 public:
  using DecideFn = std::function<void(sim::Env&, const Value&)>;

  /// `hdr.layer` is ignored; the three sub-layers are McInit, McVect, McBc.
  McInstance(Header hdr, std::size_t n, std::size_t t, std::uint32_t window, CoinSpec coin,
             DecideFn on_decide);

  /// Throws ProtocolMisuse on a second call.
  void propose(sim::Env& env, const Value& v);
  /// Returns false if `m` is not for one of this instance's layers.
  bool on_message(sim::Env& env, NodeId src, const Message& m);

  [[nodiscard]] bool proposed() const { return proposed_; }
  [[nodiscard]] const std::optional<Value>& decided() const { return decided_; }
  [[nodiscard]] const BcInstance& bc() const { return bc_; }
  [[nodiscard]] std::optional<int> bc_input() const { return bc_input_; }

 private:
  void on_init(sim::Env& env, NodeId origin, const Value& v);
  void on_vect(sim::Env& env, NodeId origin, const Value& v);
  bool vect_valid(const Value& w) const;
  void progress(sim::Env& env);

  Header hdr_;
  std::size_t n_;
  std::size_t t_;
  DecideFn on_decide_;
  RbbEngine init_;
  RbbEngine vect_;
  BcInstance bc_;

  bool proposed_ = false;
  bool voted_ = false;
  std::vector<std::pair<NodeId, Value>> inits_;  // delivery order
  std::vector<std::pair<NodeId, Value>> vects_accepted_;
  std::vector<std::pair<NodeId, Value>> vects_pending_;
  std::optional<int> bc_input_;
  std::optional<int> bc_outcome_;
  std::optional<Value> decided_;
};

}  // namespace icstack
