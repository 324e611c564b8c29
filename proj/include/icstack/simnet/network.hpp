#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "icstack/broadcast/message.hpp"
#include "icstack/core/config.hpp"
#include "icstack/crypto/crypto.hpp"
#include "icstack/simnet/clock.hpp"

namespace icstack::sim {

/// Counters shared by the network and the protocol layers of one run.
struct NetMetrics {
  std::array<std::uint64_t, kLayerCount> messages{};
  std::uint64_t late_drops = 0;      // phase-1 messages after the barrier
  std::uint64_t window_drops = 0;    // consensus traffic beyond the H window
  std::uint64_t invalid_drops = 0;   // malformed or unverifiable content
  std::uint64_t unauth_drops = 0;    // injected messages failing channel authentication
  std::uint64_t duplicates = 0;      // duplicate deliveries generated
  std::uint64_t events = 0;
  std::uint64_t max_buffer_span = 0; // widest range of buffered consensus phases
  std::uint64_t timeouts = 0;        // relay rounds closed by deadline

  [[nodiscard]] std::uint64_t total_messages() const;
  [[nodiscard]] std::uint64_t messages_of(Layer l) const { return messages[layer_index(l)]; }
};

/// What a node may do inside one handler invocation.
class Env {
 public:
  virtual ~Env() = default;

  [[nodiscard]] virtual NodeId self() const = 0;
  [[nodiscard]] virtual std::size_t n() const = 0;
  [[nodiscard]] virtual Time local_now() const = 0;
  /// Global time is visible for instrumentation and to the adversary only.
  [[nodiscard]] virtual Time global_now() const = 0;

  virtual void send(NodeId dst, MessagePtr m) = 0;
  /// Sends to every node, the sender included.
  void multicast(const MessagePtr& m);

  /// Adversarial send with a forced global delivery time. Only honoured for
  /// corrupted senders; honest senders fall back to send().
  virtual void send_at(NodeId dst, MessagePtr m, Time deliver_global) = 0;

  /// Fires on_timer(id) once the local clock reaches `local_deadline`.
  virtual void set_timer(Time local_deadline, std::uint64_t id) = 0;
  /// Schedules on_flush after every event of the current instant.
  virtual void request_flush() = 0;

  [[nodiscard]] virtual crypto::NodeCrypto& crypto() = 0;
  [[nodiscard]] virtual NetMetrics& metrics() = 0;
};

class Process {
 public:
  virtual ~Process() = default;
  virtual void on_start(Env&) {}
  virtual void on_message(Env& env, NodeId src, const MessagePtr& m) = 0;
  virtual void on_timer(Env&, std::uint64_t) {}
  virtual void on_flush(Env&) {}
};

struct NetOptions {
  std::size_t n = 4;
  ClockParams clock;
  std::uint64_t seed = 1;
  bool worst_case_delivery = false;
  DriftMode drift = DriftMode::RandomWalk;
  double duplicate_rate = 0.0;    // for traffic touching a corrupted node
  bool duplicate_honest = false;  // test hook: duplicate every honest delivery too
  Time budget = 1'000'000;
};

enum class ObsKind : std::uint8_t { Start, Send, Deliver, Timer, Flush, DropUnauth };

struct ObsEvent {
  ObsKind kind;
  Time global;
  Time local;  // on the clock of `node`
  NodeId node;  // acting node: sender for Send, receiver otherwise
  NodeId peer;  // receiver for Send, sender for Deliver
  const Message* msg = nullptr;
  std::uint64_t timer_id = 0;
};

/// Deterministic discrete-event network. Events at the same global instant
/// run in the order deliveries/starts, timers, flushes; ties inside a class
/// follow insertion order.
class Simulator {
 public:
  Simulator(NetOptions opts, crypto::KeyRing& ring);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void set_process(NodeId id, std::unique_ptr<Process> p, bool corrupted = false);
  [[nodiscard]] Process& process(NodeId id) { return *nodes_.at(id.idx()).proc; }
  [[nodiscard]] bool corrupted(NodeId id) const { return nodes_.at(id.idx()).corrupted; }

  void set_observer(std::function<void(const ObsEvent&)> obs) { observer_ = std::move(obs); }
  /// One line per event: time_global,time_local,node,event_kind,tag
  void set_trace(std::ostream* out) { trace_ = out; }

  /// Adversary write access to an input tape: a message claiming to come
  /// from `claimed_src`. It is not channel-authenticated and receivers drop it.
  void inject(NodeId claimed_src, NodeId dst, MessagePtr m, Time at_global);

  /// Schedules on_start for every node at global time `at`.
  void start_all(Time at = 0);
  /// Runs until the queue is empty or the next event lies beyond the budget.
  /// Returns true if the queue drained.
  bool run();
  /// Runs while `keep_going()` holds; same return convention as run().
  bool run_while(const std::function<bool()>& keep_going);

  [[nodiscard]] Time now() const { return now_; }
  [[nodiscard]] Time local_time(NodeId id, Time global);
  [[nodiscard]] Time first_global_at_local(NodeId id, Time local);
  [[nodiscard]] std::size_t n() const { return opts_.n; }
  [[nodiscard]] const NetOptions& options() const { return opts_; }
  [[nodiscard]] NetMetrics& metrics() { return metrics_; }
  [[nodiscard]] std::uint64_t trace_hash() const { return trace_hash_; }
  [[nodiscard]] crypto::KeyRing& keyring() { return *ring_; }
  /// Largest observed (delivery - send) for honest-to-honest traffic.
  [[nodiscard]] Time max_honest_delay() const { return max_honest_delay_; }

 private:
  class NodeEnv;
  friend class NodeEnv;

  enum class EvKind : std::uint8_t { Start, Deliver, Timer, Flush };

  struct Event {
    Time time;
    int cls;
    std::uint64_t seq;
    EvKind kind;
    NodeId node;  // receiver / owner
    NodeId src;
    MessagePtr msg;
    std::uint64_t timer_id = 0;
    bool authentic = true;
    Time sent_at = 0;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.cls != b.cls) return a.cls > b.cls;
      return a.seq > b.seq;
    }
  };

  struct NodeSlot {
    std::unique_ptr<Process> proc;
    bool corrupted = false;
    std::unique_ptr<DriftClock> clock;
    std::unique_ptr<crypto::NodeCrypto> crypto;
    Time busy_until_local = 0;
    bool flush_pending = false;
  };

  struct PendingSend {
    NodeId dst;
    MessagePtr msg;
    std::optional<Time> forced;
  };

  void push(Event e);
  void dispatch(Event& e);
  void commit(NodeId self, std::vector<PendingSend>& sends);
  void schedule_delivery(NodeId src, NodeId dst, MessagePtr m, Time sent_global, Time deliver,
                         bool authentic);
  Time delivery_delay(bool adversary_touched);
  void record(ObsKind kind, Time global, Time local, NodeId node, NodeId peer, const Message* m,
              std::uint64_t timer_id);

  NetOptions opts_;
  crypto::KeyRing* ring_;
  std::vector<NodeSlot> nodes_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::uint64_t seq_ = 0;
  Time now_ = 0;
  std::mt19937_64 rng_;
  NetMetrics metrics_;
  std::uint64_t trace_hash_ = 0xcbf29ce484222325ULL;
  std::ostream* trace_ = nullptr;
  std::function<void(const ObsEvent&)> observer_;
  Time max_honest_delay_ = 0;
};

}  // namespace icstack::sim
