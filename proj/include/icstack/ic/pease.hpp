#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "icstack/ic/ic_node.hpp"

namespace icstack {

inline constexpr std::size_t kPeaseMaxNodes = 15;

/// Relay paths: node indices packed 4 bits per hop, first hop (the value's
/// source) in the lowest nibble.
namespace eig {
[[nodiscard]] std::size_t length(std::uint64_t path);
[[nodiscard]] bool contains(std::uint64_t path, NodeId id);
[[nodiscard]] std::uint64_t append(std::uint64_t path, NodeId id);
/// Well formed: no zero digit inside, no repeated node, all nodes <= n.
[[nodiscard]] bool well_formed(std::uint64_t path, std::size_t n);

/// Recursive strict-majority resolution of the tree rooted at `path`.
/// Leaves are paths of length `depth`; absent entries count as null.
[[nodiscard]] Value resolve(const std::map<std::uint64_t, Value>& tree, std::uint64_t path,
                            std::size_t n, std::size_t depth);
}  // namespace eig

/// t+1 timeout-delimited rounds of an exponential-information-gathering
/// exchange. Round r closes when messages from all n nodes arrived or the
/// local clock reaches r * T_r; messages of a closed round are late and dropped.
class PeaseNode : public sim::Process {
 public:
  PeaseNode(IcParams params, NodeId self, std::vector<Value> own_values);

  void on_start(sim::Env& env) override;
  void on_message(sim::Env& env, NodeId src, const MessagePtr& m) override;
  void on_timer(sim::Env& env, std::uint64_t id) override;

  [[nodiscard]] const ResultVector& vector(std::uint32_t run = 0) const { return runs_.at(run).V; }
  [[nodiscard]] bool done(std::uint32_t run = 0) const { return runs_.at(run).done_at.has_value(); }
  [[nodiscard]] std::optional<Time> done_time(std::uint32_t run = 0) const { return runs_.at(run).done_at; }
  /// Honest senders whose round messages arrived here after the deadline.
  [[nodiscard]] const std::set<NodeId>& late_senders() const { return late_senders_; }
  [[nodiscard]] std::uint32_t round(std::uint32_t run = 0) const { return runs_.at(run).round; }

 private:
  struct RunState {
    Value own;
    ResultVector V;
    std::uint32_t round = 0;  // 0 before start, t+2 after resolution
    std::map<std::uint64_t, Value> tree;
    std::uint64_t heard = 0;  // senders heard in the current round
    std::map<std::uint32_t, std::vector<std::pair<NodeId, MessagePtr>>> future;
    std::optional<Time> done_at;
  };

  void send_round(sim::Env& env, std::uint32_t run);
  void absorb(sim::Env& env, std::uint32_t run, NodeId src, const PeaseRound& b);
  void close_round(sim::Env& env, std::uint32_t run);

  IcParams params_;
  NodeId self_;
  std::vector<RunState> runs_;
  std::set<NodeId> late_senders_;
};

}  // namespace icstack
