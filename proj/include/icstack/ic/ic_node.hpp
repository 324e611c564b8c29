#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "icstack/broadcast/cb.hpp"
#include "icstack/broadcast/rbb.hpp"
#include "icstack/consensus/bc.hpp"
#include "icstack/consensus/mc.hpp"
#include "icstack/simnet/network.hpp"

namespace icstack {

enum class Algorithm { PEASE, MC_RBB, BC_RBB, EIC };

[[nodiscard]] std::string_view to_string(Algorithm a);
/// Accepts PEASE / MC_RBB / BC_RBB / EIC in either case, with '-' or '_'.
[[nodiscard]] std::optional<Algorithm> algorithm_from_string(std::string_view s);

struct IcParams {
  Algorithm algo = Algorithm::BC_RBB;
  std::size_t n = 4;
  std::size_t t = 1;
  Time end_barrier = 64;
  Time round_timeout = 3000;
  std::uint32_t window = 8;
  CoinSpec coin;
  std::uint32_t instances = 1;  // parallel IC runs sharing the nodes
};

struct UpCall {
  std::uint32_t run;
  NodeId slot;
  Value value;
  Time global;
};

/// Applies the binary-consensus outcomes to V and C: slots decided 0 become
/// null, slots decided 1 and held are frozen. Returns the slots decided 1
/// whose value is missing and must be retrieved.
std::vector<NodeId> finalize_v(ResultVector& V, std::vector<std::optional<Certificate>>& C,
                               const std::vector<int>& b);

/// Honest node for the barrier-based compositions (multicast + multi-valued
/// consensus, consistent broadcast + binary consensus) and for eventual IC.
class IcNode : public sim::Process {
 public:
  enum class Stage { Dissemination, Consensus, Finalize, Done };

  IcNode(IcParams params, NodeId self, std::vector<Value> own_values);
  ~IcNode() override;

  void on_start(sim::Env& env) override;
  void on_message(sim::Env& env, NodeId src, const MessagePtr& m) override;
  void on_timer(sim::Env& env, std::uint64_t id) override;
  void on_flush(sim::Env& env) override;

  [[nodiscard]] const IcParams& params() const { return params_; }
  [[nodiscard]] NodeId self() const { return self_; }
  [[nodiscard]] const ResultVector& vector(std::uint32_t run = 0) const;
  [[nodiscard]] Stage stage(std::uint32_t run = 0) const;
  [[nodiscard]] bool done(std::uint32_t run = 0) const { return stage(run) == Stage::Done; }
  [[nodiscard]] std::optional<Time> done_time(std::uint32_t run = 0) const;
  [[nodiscard]] const std::vector<std::optional<int>>& bfrak(std::uint32_t run = 0) const;
  [[nodiscard]] const std::vector<std::optional<Certificate>>& certificates(std::uint32_t run = 0) const;
  /// V as it stood when the barrier fired (before consensus).
  [[nodiscard]] const std::vector<Value>& obtained_at_barrier(std::uint32_t run = 0) const;
  [[nodiscard]] std::optional<Time> obtained_time(std::uint32_t run, NodeId slot) const;
  [[nodiscard]] bool barrier_passed() const { return barrier_passed_; }
  [[nodiscard]] const std::vector<UpCall>& upcalls() const { return upcalls_; }
  [[nodiscard]] std::uint64_t retrieves_sent() const { return retrieves_sent_; }
  [[nodiscard]] std::uint32_t max_consensus_phase() const;
  [[nodiscard]] std::size_t max_buffer_span() const;
  [[nodiscard]] const BcInstance* bc_instance(std::uint32_t run, NodeId slot) const;

  static constexpr std::uint64_t kBarrierTimer = 1;

 private:
  struct RunState;

  void on_barrier(sim::Env& env);
  void on_slot_decided(sim::Env& env, RunState& rs, NodeId slot, const Value& v);
  void on_bc_decided(sim::Env& env, RunState& rs, NodeId slot, int b);
  void run_finalize(sim::Env& env, RunState& rs);
  void on_retrieve(sim::Env& env, NodeId src, const Message& m);
  void on_retrieved(sim::Env& env, NodeId src, const Message& m);
  void check_done(sim::Env& env, RunState& rs);

  IcParams params_;
  NodeId self_;
  std::vector<std::unique_ptr<RunState>> runs_;
  bool barrier_passed_ = false;
  std::vector<UpCall> upcalls_;
  std::uint64_t retrieves_sent_ = 0;
};

}  // namespace icstack
