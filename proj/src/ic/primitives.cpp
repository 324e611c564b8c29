#include "icstack/ic/primitives.hpp"

#include <algorithm>

#include "icstack/simnet/clock.hpp"

namespace icstack {

namespace {

class PrimNode final : public sim::Process {
 public:
  PrimNode(Primitive p, const PrimitiveOptions& o, std::size_t t, NodeId self, PrimitiveResult& out)
      : p_(p), self_(self), out_(out) {
    const std::size_t n = o.n;
    const CoinSpec coin{o.coin, sim::derive_seed(o.seed, 0x636f696e)};
    auto record = [this](const Value& v) {
      auto& slot = out_.delivered[self_.idx()];
      if (!slot) slot = v;
    };
    switch (p) {
      case Primitive::RBB:
        rbb_ = std::make_unique<RbbEngine>(Header{0, 1, Layer::Rbb}, n, t,
                                           [record](sim::Env&, const RbbKey&, const Value& v) { record(v); });
        break;
      case Primitive::CB:
        cb_ = std::make_unique<CbEngine>(0, n, t, [record](sim::Env&, const Certificate& c) { record(c.value); });
        break;
      case Primitive::BC_RBB:
        bc_ = std::make_unique<BcInstance>(Header{0, 1, Layer::Bc}, n, t, o.window, coin,
                                           [record](sim::Env&, int b) { record(Value(std::to_string(b))); });
        break;
      case Primitive::MC_RBB:
        mc_ = std::make_unique<McInstance>(Header{0, 1, Layer::McInit}, n, t, o.window, coin,
                                           [record](sim::Env&, const Value& v) { record(v); });
        break;
      default:
        break;
    }
    bit_ = o.bits.empty() ? 1 : o.bits.at(self.idx());
    if (!o.values.empty()) {
      value_ = (p == Primitive::MC_RBB) ? o.values.at(self.idx()) : o.values.at(0);
    } else {
      value_ = default_value(p == Primitive::MC_RBB ? self : NodeId(1), 0);
    }
  }

  void on_start(sim::Env& env) override {
    const bool sender = self_ == NodeId(1);
    switch (p_) {
      case Primitive::MU:
        if (sender) env.multicast(make_message(Header{0, 1, Layer::Mu}, MuValue{value_}));
        break;
      case Primitive::RBB:
        if (sender) rbb_->broadcast(env, RbbKey{self_, 0, 0}, value_);
        break;
      case Primitive::CB:
        if (sender) cb_->broadcast(env, value_);
        break;
      case Primitive::BC_RBB:
        bc_->propose(env, bit_);
        break;
      case Primitive::MC_RBB:
        mc_->propose(env, value_);
        break;
      default:
        break;
    }
  }

  void on_message(sim::Env& env, NodeId src, const MessagePtr& mp) override {
    const Message& m = *mp;
    switch (p_) {
      case Primitive::MU:
        if (const auto* b = std::get_if<MuValue>(&m.body); b && src == NodeId(1)) {
          auto& slot = out_.delivered[self_.idx()];
          if (!slot) slot = b->value;
        }
        break;
      case Primitive::RBB:
        if (const auto* r = std::get_if<RbbMsg>(&m.body); r && m.hdr.layer == Layer::Rbb) rbb_->on_message(env, src, *r);
        break;
      case Primitive::CB:
        cb_->on_message(env, src, m);
        break;
      case Primitive::BC_RBB:
        if (const auto* r = std::get_if<RbbMsg>(&m.body); r && m.hdr.layer == Layer::Bc) bc_->on_message(env, src, *r);
        break;
      case Primitive::MC_RBB:
        mc_->on_message(env, src, m);
        break;
      default:
        break;
    }
  }

  void on_flush(sim::Env& env) override {
    if (cb_) cb_->on_flush(env);
  }

  std::uint32_t phase() const {
    if (bc_) return bc_->decision_phase();
    if (mc_) return mc_->bc().decision_phase();
    return 0;
  }

 private:
  Primitive p_;
  NodeId self_;
  PrimitiveResult& out_;
  int bit_ = 1;
  Value value_;
  std::unique_ptr<RbbEngine> rbb_;
  std::unique_ptr<CbEngine> cb_;
  std::unique_ptr<BcInstance> bc_;
  std::unique_ptr<McInstance> mc_;
};

class Mute final : public sim::Process {
 public:
  void on_message(sim::Env&, NodeId, const MessagePtr&) override {}
};

PrimitiveResult run_composed(Primitive p, const PrimitiveOptions& o, std::size_t t) {
  RunOptions r;
  r.algo = p == Primitive::IC_BC_RBB ? Algorithm::BC_RBB : Algorithm::MC_RBB;
  r.cfg.n = o.n;
  r.cfg.t = t;
  r.cfg.buffer_window = o.window;
  r.clock = o.clock;
  r.cfg.end_barrier = auto_end_barrier(r.algo, o.n, o.clock);
  r.seed = o.seed;
  r.proof = o.proof;
  r.coin = o.coin;
  r.budget = o.budget;
  r.duplicate_honest = o.duplicate_honest;
  r.adv.corrupted.assign(o.silent.begin(), o.silent.end());
  if (!o.values.empty()) r.values = o.values;
  if (o.graceful) r = graceful(r);
  const RunReport rep = run_ic(r);

  PrimitiveResult out;
  out.messages = rep.total_messages - rep.messages_by_primitive.at("retrieve");
  out.signature_ops = rep.signature_ops;
  out.drained = rep.drained;
  out.end_time = rep.end_time;
  out.max_phase = rep.max_consensus_phase;
  out.delivered.resize(o.n);
  for (std::size_t i = 0; i < o.n; ++i) {
    if (!rep.honest[i] || !rep.decision_time[i]) continue;
    std::string joined;
    for (const auto& v : rep.outcomes[0][i].values()) {
      joined += v.is_null() ? std::string("<null>") : v.bytes();
      joined += ';';
    }
    out.delivered[i] = Value(joined);
  }
  return out;
}

}  // namespace

PrimitiveResult run_primitive(Primitive p, const PrimitiveOptions& o) {
  const std::size_t t = o.t.value_or(SystemConfig::max_faults(o.n));
  SystemConfig cfg;
  cfg.n = o.n;
  cfg.t = t;
  cfg.buffer_window = o.window;
  cfg.validate();
  if (!o.bits.empty() && o.bits.size() != o.n) throw ConfigError("bits must list one input per node");
  if (p == Primitive::IC_BC_RBB || p == Primitive::IC_MC_RBB) return run_composed(p, o, t);

  crypto::KeyRing ring(o.n, o.seed, o.proof);
  sim::NetOptions net;
  net.n = o.n;
  net.clock = o.clock;
  net.seed = o.seed;
  net.worst_case_delivery = o.graceful;
  net.drift = o.graceful ? sim::DriftMode::None : sim::DriftMode::RandomWalk;
  net.duplicate_honest = o.duplicate_honest;
  net.budget = o.budget;
  sim::Simulator simu(net, ring);

  PrimitiveResult out;
  out.delivered.resize(o.n);
  std::vector<PrimNode*> nodes;
  for (std::size_t i = 0; i < o.n; ++i) {
    const NodeId id = NodeId::from_idx(i);
    if (o.silent.count(id)) {
      simu.set_process(id, std::make_unique<Mute>(), true);
      continue;
    }
    auto node = std::make_unique<PrimNode>(p, o, t, id, out);
    nodes.push_back(node.get());
    simu.set_process(id, std::move(node));
  }
  simu.start_all(0);
  out.drained = simu.run();
  out.end_time = simu.now();
  out.messages = simu.metrics().total_messages() - simu.metrics().messages_of(Layer::Retrieve);
  out.signature_ops = ring.counter().total();
  for (const auto* node : nodes) out.max_phase = std::max(out.max_phase, node->phase());
  return out;
}

}  // namespace icstack
