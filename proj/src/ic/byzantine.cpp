#include "icstack/ic/byzantine.hpp"

#include <algorithm>
#include <cctype>

#include "icstack/consensus/bc.hpp"

namespace icstack {

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::Crash: return "crash";
    case Behavior::Equivocate: return "equivocate";
    case Behavior::WithholdFinal: return "withhold_final";
    case Behavior::DelayToBarrier: return "delay_to_barrier";
    case Behavior::SpamPhases: return "spam_phases";
    case Behavior::Silent: return "silent";
  }
  return "?";
}

std::optional<Behavior> behavior_from_string(std::string_view s) {
  std::string norm;
  for (char c : s) norm.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (auto b : {Behavior::Crash, Behavior::Equivocate, Behavior::WithholdFinal,
                 Behavior::DelayToBarrier, Behavior::SpamPhases, Behavior::Silent}) {
    if (norm == to_string(b)) return b;
  }
  return std::nullopt;
}

class ByzantineNode::FilterEnv final : public sim::Env {
 public:
  FilterEnv(sim::Env& inner, ByzantineNode& owner) : inner_(inner), owner_(owner) {}

  NodeId self() const override { return inner_.self(); }
  std::size_t n() const override { return inner_.n(); }
  Time local_now() const override { return inner_.local_now(); }
  Time global_now() const override { return inner_.global_now(); }
  void send(NodeId dst, MessagePtr m) override { owner_.emit(inner_, dst, std::move(m)); }
  void send_at(NodeId dst, MessagePtr m, Time g) override { inner_.send_at(dst, std::move(m), g); }
  void set_timer(Time local_deadline, std::uint64_t id) override { inner_.set_timer(local_deadline, id); }
  void request_flush() override { inner_.request_flush(); }
  crypto::NodeCrypto& crypto() override { return inner_.crypto(); }
  sim::NetMetrics& metrics() override { return scratch_; }

 private:
  sim::Env& inner_;
  ByzantineNode& owner_;
  // Drops counted by a corrupted node's internals are not honest-node metrics.
  sim::NetMetrics scratch_;
};

ByzantineNode::ByzantineNode(std::unique_ptr<sim::Process> inner, BehaviorSpec spec,
                             AdversaryTiming timing, std::uint64_t seed)
    : inner_(std::move(inner)), spec_(std::move(spec)), timing_(timing), rng_(seed) {}

bool ByzantineNode::dead(const sim::Env& env) const {
  if (spec_.kind == Behavior::Silent) return true;
  return spec_.kind == Behavior::Crash && env.global_now() >= spec_.crash_at;
}

void ByzantineNode::on_start(sim::Env& env) {
  if (dead(env)) return;
  FilterEnv f(env, *this);
  inner_->on_start(f);
}

void ByzantineNode::on_message(sim::Env& env, NodeId src, const MessagePtr& m) {
  if (dead(env)) return;
  FilterEnv f(env, *this);
  inner_->on_message(f, src, m);
}

void ByzantineNode::on_timer(sim::Env& env, std::uint64_t id) {
  if (dead(env)) return;
  FilterEnv f(env, *this);
  inner_->on_timer(f, id);
}

void ByzantineNode::on_flush(sim::Env& env) {
  if (dead(env)) return;
  FilterEnv f(env, *this);
  inner_->on_flush(f);
}

Value ByzantineNode::value_for(NodeId self, NodeId dst) const {
  if (!spec_.per_recipient.empty()) return spec_.per_recipient[dst.idx() % spec_.per_recipient.size()];
  return Value("eq" + std::to_string(self.value) + "-" + std::to_string(dst.value % 2));
}

MessagePtr ByzantineNode::equivocate(NodeId self, NodeId dst, const MessagePtr& m) {
  const Header& h = m->hdr;
  if (std::holds_alternative<MuValue>(m->body)) {
    return make_message(h, MuValue{value_for(self, dst)});
  }
  if (std::holds_alternative<CbSend>(m->body)) {
    return make_message(h, CbSend{value_for(self, dst)});
  }
  if (const auto* r = std::get_if<RbbMsg>(&m->body)) {
    if (r->kind != RbbKind::Initial || r->origin != self) return m;
    RbbMsg out = *r;
    if (h.layer == Layer::Bc || h.layer == Layer::McBc) {
      const auto code = static_cast<std::uint8_t>(dst.value % 2);
      out.value = encode_step_value(r->step, code);
    } else {
      out.value = value_for(self, dst);
    }
    return make_message(h, std::move(out));
  }
  if (const auto* p = std::get_if<PeaseRound>(&m->body)) {
    PeaseRound out = *p;
    for (auto& e : out.entries) e.second = value_for(self, dst);
    return make_message(h, std::move(out));
  }
  return m;
}

void ByzantineNode::spam(sim::Env& env, const Message& m) {
  const auto* r = std::get_if<RbbMsg>(&m.body);
  if (!r || r->kind != RbbKind::Initial || r->origin != env.self()) return;
  if (m.hdr.layer != Layer::Bc && m.hdr.layer != Layer::McBc) return;
  if (!spammed_.insert({m.hdr.run, m.hdr.slot, m.hdr.layer}).second) return;
  for (std::uint32_t p = r->phase + 1; p <= r->phase + spec_.spam_count; ++p) {
    for (std::uint8_t step = 1; step <= 3; ++step) {
      const auto code = static_cast<std::uint8_t>(rng_() % (step == 3 ? 3 : 2));
      env.multicast(make_message(m.hdr, RbbMsg{RbbKind::Initial, env.self(), p, step,
                                               encode_step_value(step, code)}));
    }
  }
}

void ByzantineNode::emit(sim::Env& env, NodeId dst, MessagePtr m) {
  if (dead(env)) return;
  const bool in_subset = std::find(spec_.subset.begin(), spec_.subset.end(), dst) != spec_.subset.end();
  const Layer layer = m->hdr.layer;
  const bool dissemination = layer == Layer::Mu || layer == Layer::Cb;

  switch (spec_.kind) {
    case Behavior::Equivocate:
      env.send(dst, equivocate(env.self(), dst, m));
      return;
    case Behavior::WithholdFinal: {
      const bool gated = std::holds_alternative<MuValue>(m->body) ||
                         std::holds_alternative<CbFinal>(m->body) ||
                         std::holds_alternative<PeaseRound>(m->body) ||
                         (layer == Layer::Rbb && std::get_if<RbbMsg>(&m->body) &&
                          std::get<RbbMsg>(m->body).kind == RbbKind::Initial);
      if (gated && !in_subset) return;
      env.send(dst, std::move(m));
      return;
    }
    case Behavior::DelayToBarrier: {
      if (!in_subset) {
        env.send(dst, std::move(m));
        return;
      }
      Time target = -1;
      if (dissemination) {
        target = timing_.end_barrier;
      } else if (const auto* p = std::get_if<PeaseRound>(&m->body)) {
        target = static_cast<Time>(p->round) * timing_.round_timeout;
      }
      if (target < 0) {
        env.send(dst, std::move(m));
        return;
      }
      const Time spread = timing_.drift + 1;
      const Time jitter = static_cast<Time>(rng_() % static_cast<std::uint64_t>(2 * spread + 1)) - spread;
      env.send_at(dst, std::move(m), std::max<Time>(0, target + jitter));
      return;
    }
    case Behavior::SpamPhases:
      spam(env, *m);
      env.send(dst, std::move(m));
      return;
    case Behavior::Crash:
    case Behavior::Silent:
      env.send(dst, std::move(m));
      return;
  }
}

}  // namespace icstack
