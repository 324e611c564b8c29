#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "icstack/broadcast/rbb.hpp"

namespace icstack {

enum class CoinMode { Seeded, Worst };

struct CoinSpec {
  CoinMode mode = CoinMode::Seeded;
  std::uint64_t seed = 0;
};

/// Local coin of `node` for phase `phase` of the instance named by `hdr`.
/// Worst mode returns (node + phase) mod 2, which splits honest nodes.
[[nodiscard]] int local_coin(const CoinSpec& spec, NodeId node, const Header& hdr,
                             std::uint32_t phase);

/// Step payload codes. Steps 1 and 2 carry a bit; step 3 carries (d, 0),
/// (d, 1) or a plain "no majority" mark.
enum : std::uint8_t { kBit0 = 0, kBit1 = 1, kNoMajority = 2 };

[[nodiscard]] Value encode_step_value(std::uint8_t step, std::uint8_t code);
/// nullopt when the payload is not well formed for `step`.
[[nodiscard]] std::optional<std::uint8_t> decode_step_value(std::uint8_t step, const Value& v);

/// Bracha's randomized binary consensus, one instance as seen by one node.
///
/// Every phase consists of three reliable broadcasts. A message is accepted
/// only once the node could have produced it from messages it has itself
/// accepted. Messages are buffered for the current phase and H-1 phases
/// ahead; the previous phase is kept for validation and older phases are
/// discarded. A node that decides in phase k stops, and runs phase k+1 once
/// (without deciding again) if another node's phase k+1 traffic reaches it.
class BcInstance {
 public:
  using DecideFn = std::function<void(sim::Env&, int bit)>;

  BcInstance(Header hdr, std::size_t n, std::size_t t, std::uint32_t window, CoinSpec coin,
             DecideFn on_decide);

  /// Throws ProtocolMisuse when called twice or with a non-bit.
  void propose(sim::Env& env, int bit);
  void on_message(sim::Env& env, NodeId src, const RbbMsg& m);

  [[nodiscard]] bool proposed() const { return proposed_; }
  [[nodiscard]] std::optional<int> decided() const { return decided_; }
  [[nodiscard]] std::uint32_t decision_phase() const { return decision_phase_; }
  [[nodiscard]] std::uint32_t phase() const { return cur_; }
  /// Widest span of phases for which messages were held at one time.
  [[nodiscard]] std::size_t max_buffer_span() const { return max_span_; }
  [[nodiscard]] const RbbEngine& rbb() const { return rbb_; }

 private:
  struct StepRec {
    std::vector<std::pair<NodeId, std::uint8_t>> accepted;  // in acceptance order
    std::vector<std::pair<NodeId, std::uint8_t>> pending;   // awaiting justification
    std::array<std::size_t, 3> count{};
  };
  struct PhaseRec {
    std::array<StepRec, 3> steps;
  };

  void on_deliver(sim::Env& env, const RbbKey& key, const Value& v);
  bool valid(std::uint32_t phase, std::uint8_t step, std::uint8_t code) const;
  void revalidate(sim::Env& env);
  void progress(sim::Env& env);
  void broadcast_step(sim::Env& env, std::uint8_t step, std::uint8_t code);
  void enter_phase(std::uint32_t p);
  void note_span(sim::Env& env);

  Header hdr_;
  std::size_t n_;
  std::size_t t_;
  std::uint32_t window_;
  CoinSpec coin_;
  DecideFn on_decide_;
  RbbEngine rbb_;

  std::map<std::uint32_t, PhaseRec> phases_;
  bool proposed_ = false;
  std::uint32_t cur_ = 1;
  std::uint8_t waiting_ = 0;  // step whose quorum is awaited; 0 while idle
  int est_ = 0;
  std::optional<int> decided_;
  std::uint32_t decision_phase_ = 0;
  bool sleeping_ = false;     // decided, waiting for another node's next-phase traffic
  bool final_phase_ = false;  // running the one phase after the decision
  bool stopped_ = false;
  std::size_t max_span_ = 0;
};

}  // namespace icstack
