#include "icstack/ic/ic_node.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace icstack {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::PEASE: return "PEASE";
    case Algorithm::MC_RBB: return "MC_RBB";
    case Algorithm::BC_RBB: return "BC_RBB";
    case Algorithm::EIC: return "EIC";
  }
  return "?";
}

std::optional<Algorithm> algorithm_from_string(std::string_view s) {
  std::string norm;
  for (char c : s) norm.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (norm == "PEASE" || norm == "IC_PEASE") return Algorithm::PEASE;
  if (norm == "MC_RBB" || norm == "IC_MC_RBB") return Algorithm::MC_RBB;
  if (norm == "BC_RBB" || norm == "IC_BC_RBB") return Algorithm::BC_RBB;
  if (norm == "EIC") return Algorithm::EIC;
  return std::nullopt;
}

std::vector<NodeId> finalize_v(ResultVector& V, std::vector<std::optional<Certificate>>& C,
                               const std::vector<int>& b) {
  std::vector<NodeId> retrieve;
  for (std::size_t i = 0; i < V.size(); ++i) {
    const NodeId slot = NodeId::from_idx(i);
    if (V.is_final(slot)) continue;
    if (b.at(i) == 0) {
      V.finalize(slot, Value::null());
      C[i].reset();
    } else if (C[i] || !V[slot].is_null()) {
      V.finalize(slot, V[slot]);
    } else {
      retrieve.push_back(slot);
    }
  }
  return retrieve;
}

struct IcNode::RunState {
  std::uint32_t run = 0;
  Value own;
  ResultVector V;
  std::vector<std::optional<Certificate>> C;
  std::vector<std::optional<int>> B;
  std::vector<Value> at_barrier;
  std::vector<std::optional<Time>> obtained_at;
  std::vector<bool> retrieving;
  Stage stage = Stage::Dissemination;
  std::optional<Time> done_at;
  std::size_t bc_decided = 0;
  std::unique_ptr<CbEngine> cb;
  std::unique_ptr<RbbEngine> eic;
  std::vector<std::unique_ptr<BcInstance>> bc;
  std::vector<std::unique_ptr<McInstance>> mc;
};

IcNode::IcNode(IcParams params, NodeId self, std::vector<Value> own_values)
    : params_(params), self_(self) {
  if (params_.algo == Algorithm::PEASE) throw ConfigError("IcNode does not run the relay-round protocol");
  if (own_values.size() != params_.instances) {
    throw ConfigError("IcNode: one value per parallel instance is required");
  }
  const std::size_t n = params_.n;
  for (std::uint32_t r = 0; r < params_.instances; ++r) {
    auto rs = std::make_unique<RunState>();
    RunState* raw = rs.get();
    rs->run = r;
    rs->own = own_values[r];
    rs->V = ResultVector(n);
    rs->C.resize(n);
    rs->B.resize(n);
    rs->obtained_at.resize(n);
    rs->retrieving.assign(n, false);
    switch (params_.algo) {
      case Algorithm::BC_RBB:
        rs->cb = std::make_unique<CbEngine>(r, n, params_.t, [this, raw](sim::Env& env, const Certificate& c) {
          raw->V.set(c.subject, c.value);
          raw->C[c.subject.idx()] = c;
          raw->obtained_at[c.subject.idx()] = env.local_now();
        });
        for (std::size_t i = 0; i < n; ++i) {
          const NodeId slot = NodeId::from_idx(i);
          rs->bc.push_back(std::make_unique<BcInstance>(
              Header{r, slot.value, Layer::Bc}, n, params_.t, params_.window, params_.coin,
              [this, raw, slot](sim::Env& env, int b) { on_bc_decided(env, *raw, slot, b); }));
        }
        break;
      case Algorithm::MC_RBB:
        for (std::size_t i = 0; i < n; ++i) {
          const NodeId slot = NodeId::from_idx(i);
          rs->mc.push_back(std::make_unique<McInstance>(
              Header{r, slot.value, Layer::McInit}, n, params_.t, params_.window, params_.coin,
              [this, raw, slot](sim::Env& env, const Value& v) { on_slot_decided(env, *raw, slot, v); }));
        }
        break;
      case Algorithm::EIC:
        rs->eic = std::make_unique<RbbEngine>(
            Header{r, 0, Layer::Rbb}, n, params_.t,
            [this, raw](sim::Env& env, const RbbKey& k, const Value& v) {
              if (raw->V.is_final(k.origin)) return;
              raw->V.finalize(k.origin, v);
              raw->obtained_at[k.origin.idx()] = env.local_now();
              upcalls_.push_back(UpCall{raw->run, k.origin, v, env.global_now()});
              check_done(env, *raw);
            });
        rs->eic->set_admit([](const RbbKey& k) { return k.phase == 0 && k.step == 0; });
        break;
      case Algorithm::PEASE:
        break;
    }
    runs_.push_back(std::move(rs));
  }
}

IcNode::~IcNode() = default;

const ResultVector& IcNode::vector(std::uint32_t run) const { return runs_.at(run)->V; }
IcNode::Stage IcNode::stage(std::uint32_t run) const { return runs_.at(run)->stage; }
std::optional<Time> IcNode::done_time(std::uint32_t run) const { return runs_.at(run)->done_at; }
const std::vector<std::optional<int>>& IcNode::bfrak(std::uint32_t run) const { return runs_.at(run)->B; }
const std::vector<std::optional<Certificate>>& IcNode::certificates(std::uint32_t run) const {
  return runs_.at(run)->C;
}
const std::vector<Value>& IcNode::obtained_at_barrier(std::uint32_t run) const {
  return runs_.at(run)->at_barrier;
}
std::optional<Time> IcNode::obtained_time(std::uint32_t run, NodeId slot) const {
  return runs_.at(run)->obtained_at.at(slot.idx());
}

const BcInstance* IcNode::bc_instance(std::uint32_t run, NodeId slot) const {
  const auto& rs = *runs_.at(run);
  if (!rs.bc.empty()) return rs.bc.at(slot.idx()).get();
  if (!rs.mc.empty()) return &rs.mc.at(slot.idx())->bc();
  return nullptr;
}

std::uint32_t IcNode::max_consensus_phase() const {
  std::uint32_t p = 0;
  for (std::uint32_t r = 0; r < runs_.size(); ++r) {
    for (std::size_t i = 0; i < params_.n; ++i) {
      if (const auto* bc = bc_instance(r, NodeId::from_idx(i))) {
        if (bc->decided()) p = std::max(p, bc->decision_phase());
      }
    }
  }
  return p;
}

std::size_t IcNode::max_buffer_span() const {
  std::size_t s = 0;
  for (std::uint32_t r = 0; r < runs_.size(); ++r) {
    for (std::size_t i = 0; i < params_.n; ++i) {
      if (const auto* bc = bc_instance(r, NodeId::from_idx(i))) s = std::max(s, bc->max_buffer_span());
    }
  }
  return s;
}

void IcNode::on_start(sim::Env& env) {
  for (auto& rs : runs_) {
    switch (params_.algo) {
      case Algorithm::BC_RBB:
        rs->cb->broadcast(env, rs->own);
        break;
      case Algorithm::MC_RBB:
        env.multicast(make_message(Header{rs->run, self_.value, Layer::Mu}, MuValue{rs->own}));
        break;
      case Algorithm::EIC:
        rs->eic->broadcast(env, RbbKey{self_, 0, 0}, rs->own);
        break;
      case Algorithm::PEASE:
        break;
    }
  }
  if (params_.algo != Algorithm::EIC) env.set_timer(params_.end_barrier, kBarrierTimer);
}

void IcNode::on_timer(sim::Env& env, std::uint64_t id) {
  if (id == kBarrierTimer && !barrier_passed_ && barrier_reached(env.local_now(), params_.end_barrier)) {
    on_barrier(env);
  }
}

void IcNode::on_flush(sim::Env& env) {
  if (barrier_passed_) return;
  for (auto& rs : runs_) {
    if (rs->cb) rs->cb->on_flush(env);
  }
}

void IcNode::on_barrier(sim::Env& env) {
  barrier_passed_ = true;
  for (auto& rs : runs_) {
    rs->at_barrier = rs->V.values();
    rs->stage = Stage::Consensus;
    for (std::size_t i = 0; i < params_.n; ++i) {
      if (params_.algo == Algorithm::BC_RBB) {
        rs->bc[i]->propose(env, rs->C[i] ? 1 : 0);
      } else if (params_.algo == Algorithm::MC_RBB) {
        rs->mc[i]->propose(env, rs->V[NodeId::from_idx(i)]);
      }
    }
  }
}

void IcNode::on_message(sim::Env& env, NodeId src, const MessagePtr& mp) {
  const Message& m = *mp;
  if (m.hdr.run >= runs_.size()) {
    env.metrics().invalid_drops += 1;
    return;
  }
  RunState& rs = *runs_[m.hdr.run];
  const bool slot_ok = m.hdr.slot >= 1 && m.hdr.slot <= params_.n;

  switch (m.hdr.layer) {
    case Layer::Mu: {
      if (params_.algo != Algorithm::MC_RBB) break;
      if (barrier_passed_) {
        env.metrics().late_drops += 1;
        return;
      }
      const auto* b = std::get_if<MuValue>(&m.body);
      if (!b || m.hdr.slot != src.value) break;
      if (rs.obtained_at[src.idx()]) return;  // first value per sender
      rs.V.set(src, b->value);
      rs.obtained_at[src.idx()] = env.local_now();
      return;
    }
    case Layer::Cb:
      if (!rs.cb) break;
      if (barrier_passed_) {
        env.metrics().late_drops += 1;
        return;
      }
      rs.cb->on_message(env, src, m);
      return;
    case Layer::Rbb:
      if (!rs.eic) break;
      if (const auto* r = std::get_if<RbbMsg>(&m.body)) {
        rs.eic->on_message(env, src, *r);
        return;
      }
      break;
    case Layer::Bc:
      if (rs.bc.empty() || !slot_ok) break;
      if (const auto* r = std::get_if<RbbMsg>(&m.body)) {
        rs.bc[m.hdr.slot - 1]->on_message(env, src, *r);
        return;
      }
      break;
    case Layer::McInit:
    case Layer::McVect:
    case Layer::McBc:
      if (rs.mc.empty() || !slot_ok) break;
      rs.mc[m.hdr.slot - 1]->on_message(env, src, m);
      return;
    case Layer::Retrieve:
      if (rs.bc.empty() || !slot_ok) break;
      if (std::holds_alternative<RetrieveReq>(m.body)) {
        on_retrieve(env, src, m);
        return;
      }
      if (std::holds_alternative<Retrieved>(m.body)) {
        on_retrieved(env, src, m);
        return;
      }
      break;
    case Layer::Pease:
      break;
  }
  env.metrics().invalid_drops += 1;
}

void IcNode::on_slot_decided(sim::Env& env, RunState& rs, NodeId slot, const Value& v) {
  if (rs.V.is_final(slot)) return;
  rs.V.finalize(slot, v);
  check_done(env, rs);
}

void IcNode::on_bc_decided(sim::Env& env, RunState& rs, NodeId slot, int b) {
  rs.B[slot.idx()] = b;
  rs.bc_decided += 1;
  if (rs.bc_decided == params_.n) run_finalize(env, rs);
}

void IcNode::run_finalize(sim::Env& env, RunState& rs) {
  rs.stage = Stage::Finalize;
  std::vector<int> b(params_.n);
  for (std::size_t i = 0; i < params_.n; ++i) b[i] = *rs.B[i];
  for (NodeId slot : finalize_v(rs.V, rs.C, b)) {
    rs.retrieving[slot.idx()] = true;
    retrieves_sent_ += 1;
    env.multicast(make_message(Header{rs.run, slot.value, Layer::Retrieve}, RetrieveReq{}));
  }
  check_done(env, rs);
}

void IcNode::on_retrieve(sim::Env& env, NodeId src, const Message& m) {
  RunState& rs = *runs_[m.hdr.run];
  const NodeId slot(m.hdr.slot);
  const auto& cert = rs.C[slot.idx()];
  if (!cert) return;  // nothing to offer
  env.send(src, make_message(Header{rs.run, slot.value, Layer::Retrieve},
                             Retrieved{cert->value, cert->endorsements}));
}

void IcNode::on_retrieved(sim::Env& env, NodeId, const Message& m) {
  RunState& rs = *runs_[m.hdr.run];
  const NodeId slot(m.hdr.slot);
  if (!rs.retrieving[slot.idx()]) return;
  const auto& b = std::get<Retrieved>(m.body);
  Certificate cert{slot, b.value, b.cert};
  if (!cb_verify_certificate(cert, params_.n, params_.t, env.crypto())) {
    env.metrics().invalid_drops += 1;
    return;
  }
  rs.retrieving[slot.idx()] = false;
  rs.V.finalize(slot, b.value);
  rs.C[slot.idx()] = std::move(cert);
  check_done(env, rs);
}

void IcNode::check_done(sim::Env& env, RunState& rs) {
  if (rs.stage == Stage::Done || !rs.V.complete()) return;
  rs.stage = Stage::Done;
  rs.done_at = env.global_now();
}

}  // namespace icstack
