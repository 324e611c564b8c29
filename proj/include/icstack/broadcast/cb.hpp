#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "icstack/broadcast/message.hpp"
#include "icstack/simnet/network.hpp"

namespace icstack {

/// Uniqueness certificate: endorsements of (subject, value) by distinct nodes.
struct Certificate {
  NodeId subject;
  Value value;
  std::vector<crypto::Endorsement> endorsements;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

/// True iff at least n-t endorsements by distinct in-range endorsers all
/// bind (subject, value) and check under `verifier`. Each checked
/// endorsement counts one verification.
[[nodiscard]] bool cb_verify_certificate(const Certificate& cert, std::size_t n, std::size_t t,
                                         crypto::NodeCrypto& verifier);

/// Per-sender state of one node.
struct CbState {
  std::optional<Value> v_tilde;  // first value endorsed for this sender
  std::optional<Value> v_prime;  // own broadcast value (own instance only)
  std::vector<crypto::Endorsement> W;
  std::size_t r = 0;
  bool final_sent = false;
  std::optional<Value> delivered;
  std::optional<Certificate> cert;
};

/// Consistent broadcast for all n senders of one run, as seen by one node.
/// The sender multicasts c-final once it holds n-t valid endorsements; the
/// message goes out at the end of the current delivery instant, so W carries
/// every endorsement that arrived together.
class CbEngine {
 public:
  using DeliverFn = std::function<void(sim::Env&, const Certificate&)>;

  CbEngine(std::uint32_t run, std::size_t n, std::size_t t, DeliverFn on_deliver);

  void broadcast(sim::Env& env, const Value& v);
  /// Returns false if `m` is not consistent-broadcast traffic.
  bool on_message(sim::Env& env, NodeId src, const Message& m);
  void on_flush(sim::Env& env);

  [[nodiscard]] const CbState& state(NodeId subject) const { return states_.at(subject.idx()); }

 private:
  void on_send(sim::Env& env, NodeId src, const CbSend& b);
  void on_ready(sim::Env& env, NodeId src, const CbReady& b);
  void on_final(sim::Env& env, NodeId src, const CbFinal& b);

  std::uint32_t run_;
  std::size_t n_;
  std::size_t t_;
  DeliverFn on_deliver_;
  std::vector<CbState> states_;
};

}  // namespace icstack
