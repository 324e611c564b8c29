#include "icstack/simnet/network.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace icstack::sim {

std::uint64_t NetMetrics::total_messages() const {
  std::uint64_t s = 0;
  for (auto c : messages) s += c;
  return s;
}

void Env::multicast(const MessagePtr& m) {
  for (std::size_t i = 0; i < n(); ++i) send(NodeId::from_idx(i), m);
}

class Simulator::NodeEnv final : public Env {
 public:
  NodeEnv(Simulator& sim, NodeId self) : sim_(sim), self_(self) {}

  NodeId self() const override { return self_; }
  std::size_t n() const override { return sim_.opts_.n; }
  Time local_now() const override { return local_; }
  Time global_now() const override { return sim_.now_; }

  void send(NodeId dst, MessagePtr m) override {
    if (dst.value == 0 || dst.value > sim_.opts_.n) {
      throw ConfigError("send: unknown destination node " + std::to_string(dst.value));
    }
    sends_.push_back({dst, std::move(m), std::nullopt});
  }

  void send_at(NodeId dst, MessagePtr m, Time deliver_global) override {
    if (!sim_.corrupted(self_)) {
      send(dst, std::move(m));
      return;
    }
    if (dst.value == 0 || dst.value > sim_.opts_.n) {
      throw ConfigError("send: unknown destination node " + std::to_string(dst.value));
    }
    sends_.push_back({dst, std::move(m), deliver_global});
  }

  void set_timer(Time local_deadline, std::uint64_t id) override {
    const Time g = std::max(sim_.now_, sim_.first_global_at_local(self_, local_deadline));
    Event e{g, 1, 0, EvKind::Timer, self_, self_, nullptr, id};
    sim_.push(std::move(e));
  }

  void request_flush() override {
    auto& slot = sim_.nodes_[self_.idx()];
    if (slot.flush_pending) return;
    slot.flush_pending = true;
    sim_.push(Event{sim_.now_, 2, 0, EvKind::Flush, self_, self_, nullptr});
  }

  crypto::NodeCrypto& crypto() override { return *sim_.nodes_[self_.idx()].crypto; }
  NetMetrics& metrics() override { return sim_.metrics_; }

  void set_local(Time l) { local_ = l; }
  std::vector<PendingSend>& sends() { return sends_; }

 private:
  Simulator& sim_;
  NodeId self_;
  Time local_ = 0;
  std::vector<PendingSend> sends_;
};

Simulator::Simulator(NetOptions opts, crypto::KeyRing& ring)
    : opts_(opts), ring_(&ring), rng_(derive_seed(opts.seed, 0x6e6574)) {
  if (opts_.n == 0 || opts_.n > kMaxNodes) throw ConfigError("simulator: bad node count");
  if (ring.n() != opts_.n) throw ConfigError("simulator: key ring size differs from n");
  opts_.clock.validate();
  nodes_.resize(opts_.n);
  for (std::size_t i = 0; i < opts_.n; ++i) {
    nodes_[i].clock = std::make_unique<DriftClock>(opts_.clock.drift, opts_.drift,
                                                   derive_seed(opts_.seed, 0x636c6b, i));
    nodes_[i].crypto = std::make_unique<crypto::NodeCrypto>(ring, NodeId::from_idx(i));
  }
}

Simulator::~Simulator() = default;

void Simulator::set_process(NodeId id, std::unique_ptr<Process> p, bool corrupted) {
  auto& slot = nodes_.at(id.idx());
  slot.proc = std::move(p);
  slot.corrupted = corrupted;
}

Time Simulator::local_time(NodeId id, Time global) {
  return nodes_.at(id.idx()).clock->local_of(global);
}

Time Simulator::first_global_at_local(NodeId id, Time local) {
  return nodes_.at(id.idx()).clock->first_global_at_local(local);
}

void Simulator::push(Event e) {
  e.seq = seq_++;
  queue_.push(std::move(e));
}

void Simulator::start_all(Time at) {
  for (std::size_t i = 0; i < opts_.n; ++i) {
    push(Event{at, 0, 0, EvKind::Start, NodeId::from_idx(i), NodeId::from_idx(i), nullptr});
  }
}

void Simulator::inject(NodeId claimed_src, NodeId dst, MessagePtr m, Time at_global) {
  if (dst.value == 0 || dst.value > opts_.n) throw ConfigError("inject: unknown destination");
  Event e{std::max(at_global, now_), 0, 0, EvKind::Deliver, dst, claimed_src, std::move(m)};
  e.authentic = false;
  e.sent_at = e.time;
  push(std::move(e));
}

Time Simulator::delivery_delay(bool adversary_touched) {
  const Time d = opts_.clock.delta;
  if (opts_.worst_case_delivery && !adversary_touched) return d;
  if (d == 0) return 0;
  return static_cast<Time>(rng_() % static_cast<std::uint64_t>(d + 1));
}

void Simulator::schedule_delivery(NodeId src, NodeId dst, MessagePtr m, Time sent_global,
                                  Time deliver, bool authentic) {
  Event e{deliver, 0, 0, EvKind::Deliver, dst, src, std::move(m)};
  e.authentic = authentic;
  e.sent_at = sent_global;
  push(std::move(e));
}

void Simulator::commit(NodeId self, std::vector<PendingSend>& sends) {
  if (sends.empty()) return;
  auto& slot = nodes_[self.idx()];
  const Time local_now = slot.clock->local_of(now_);
  const Time release_local = std::max(local_now, slot.busy_until_local) + opts_.clock.t_comp;
  slot.busy_until_local = release_local;
  const Time release = std::max(now_, slot.clock->first_global_at_local(release_local));

  for (auto& s : sends) {
    metrics_.messages[layer_index(s.msg->hdr.layer)] += 1;
    const bool touched = slot.corrupted || nodes_[s.dst.idx()].corrupted;
    record(ObsKind::Send, release, release_local, self, s.dst, s.msg.get(), 0);

    Time deliver;
    if (s.forced && slot.corrupted) {
      deliver = std::max(release, *s.forced);
    } else {
      deliver = release + delivery_delay(touched);
    }
    schedule_delivery(self, s.dst, s.msg, release, deliver, true);

    const bool dup = (touched && opts_.duplicate_rate > 0.0 &&
                      static_cast<double>(rng_() % 1000000) / 1e6 < opts_.duplicate_rate) ||
                     opts_.duplicate_honest;
    if (dup) {
      metrics_.duplicates += 1;
      const Time later = touched ? deliver + delivery_delay(true) : deliver;
      schedule_delivery(self, s.dst, s.msg, release, later, true);
    }
  }
  sends.clear();
}

void Simulator::record(ObsKind kind, Time global, Time local, NodeId node, NodeId peer,
                       const Message* m, std::uint64_t timer_id) {
  if (!nodes_[node.idx()].corrupted && std::llabs(local - global) > opts_.clock.drift &&
      kind != ObsKind::Send) {
    throw std::logic_error("drift bound violated at node " + std::to_string(node.value));
  }
  std::uint64_t h = trace_hash_;
  auto mixin = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mixin(static_cast<std::uint64_t>(kind));
  mixin(static_cast<std::uint64_t>(global));
  mixin(static_cast<std::uint64_t>(local));
  mixin(node.value);
  mixin(peer.value);
  mixin(timer_id);
  if (m) {
    mixin(layer_index(m->hdr.layer));
    mixin(m->hdr.run);
    mixin(m->hdr.slot);
    mixin(m->body.index());
  }
  trace_hash_ = h;

  if (observer_) observer_(ObsEvent{kind, global, local, node, peer, m, timer_id});
  if (trace_) {
    static constexpr const char* kNames[] = {"start", "send", "deliver", "timer", "flush",
                                             "drop-unauth"};
    *trace_ << global << ',' << local << ',' << node.value << ','
            << kNames[static_cast<int>(kind)] << ',';
    if (m) {
      *trace_ << layer_name(m->hdr.layer) << ':' << m->hdr.run << ':' << m->hdr.slot << ':'
              << message_kind(*m) << ":peer" << peer.value;
    } else if (kind == ObsKind::Timer) {
      *trace_ << "timer:" << timer_id;
    } else {
      *trace_ << '-';
    }
    *trace_ << '\n';
  }
}

void Simulator::dispatch(Event& e) {
  auto& slot = nodes_[e.node.idx()];
  if (!slot.proc) throw ConfigError("no process installed for node " + std::to_string(e.node.value));
  metrics_.events += 1;

  const Time local = slot.clock->local_of(now_);
  if (e.kind == EvKind::Deliver && !e.authentic) {
    metrics_.unauth_drops += 1;
    record(ObsKind::DropUnauth, now_, local, e.node, e.src, e.msg.get(), 0);
    return;
  }
  if (e.kind == EvKind::Deliver && !slot.corrupted && !nodes_[e.src.idx()].corrupted) {
    max_honest_delay_ = std::max(max_honest_delay_, e.time - e.sent_at);
    if (e.time - e.sent_at > opts_.clock.delta) {
      throw std::logic_error("honest delivery exceeded the delivery bound");
    }
  }

  NodeEnv env(*this, e.node);
  env.set_local(local);
  switch (e.kind) {
    case EvKind::Start:
      record(ObsKind::Start, now_, local, e.node, e.node, nullptr, 0);
      slot.proc->on_start(env);
      break;
    case EvKind::Deliver:
      record(ObsKind::Deliver, now_, local, e.node, e.src, e.msg.get(), 0);
      slot.proc->on_message(env, e.src, e.msg);
      break;
    case EvKind::Timer:
      record(ObsKind::Timer, now_, local, e.node, e.node, nullptr, e.timer_id);
      slot.proc->on_timer(env, e.timer_id);
      break;
    case EvKind::Flush:
      slot.flush_pending = false;
      record(ObsKind::Flush, now_, local, e.node, e.node, nullptr, 0);
      slot.proc->on_flush(env);
      break;
  }
  commit(e.node, env.sends());
}

bool Simulator::run() {
  return run_while([] { return true; });
}

bool Simulator::run_while(const std::function<bool()>& keep_going) {
  while (!queue_.empty()) {
    if (!keep_going()) return false;
    if (queue_.top().time > opts_.budget) return false;
    Event e = queue_.top();
    queue_.pop();
    now_ = e.time;
    dispatch(e);
  }
  return true;
}

}  // namespace icstack::sim
