#include "icstack/consensus/mc.hpp"

#include <algorithm>
#include <map>

namespace icstack {

namespace {

Header with_layer(Header h, Layer l) {
  h.layer = l;
  return h;
}

}  // namespace

McInstance::McInstance(Header hdr, std::size_t n, std::size_t t, std::uint32_t window, CoinSpec coin,
                       DecideFn on_decide)
    : hdr_(hdr),
      n_(n),
      t_(t),
      on_decide_(std::move(on_decide)),
      init_(with_layer(hdr, Layer::McInit), n, t,
            [this](sim::Env& env, const RbbKey& k, const Value& v) { on_init(env, k.origin, v); }),
      vect_(with_layer(hdr, Layer::McVect), n, t,
            [this](sim::Env& env, const RbbKey& k, const Value& v) { on_vect(env, k.origin, v); }),
      bc_(with_layer(hdr, Layer::McBc), n, t, window, coin, [this](sim::Env& env, int b) {
        bc_outcome_ = b;
        progress(env);
      }) {
  // INIT and VECT are single-shot per origin.
  auto single = [](const RbbKey& k) { return k.phase == 0 && k.step == 0; };
  init_.set_admit(single);
  vect_.set_admit(single);
}

void McInstance::propose(sim::Env& env, const Value& v) {
  if (proposed_) throw ProtocolMisuse("multi-valued consensus: second proposal for the same instance");
  proposed_ = true;
  init_.broadcast(env, RbbKey{env.self(), 0, 0}, v);
  progress(env);
}

bool McInstance::on_message(sim::Env& env, NodeId src, const Message& m) {
  const auto* r = std::get_if<RbbMsg>(&m.body);
  switch (m.hdr.layer) {
    case Layer::McInit:
    case Layer::McVect:
    case Layer::McBc:
      break;
    default:
      return false;
  }
  if (!r) {
    env.metrics().invalid_drops += 1;
    return true;
  }
  if (m.hdr.layer == Layer::McInit) init_.on_message(env, src, *r);
  if (m.hdr.layer == Layer::McVect) vect_.on_message(env, src, *r);
  if (m.hdr.layer == Layer::McBc) bc_.on_message(env, src, *r);
  return true;
}

void McInstance::on_init(sim::Env& env, NodeId origin, const Value& v) {
  inits_.emplace_back(origin, v);
  // New INITs may justify pending votes.
  std::vector<std::pair<NodeId, Value>> still;
  for (auto& p : vects_pending_) {
    if (vect_valid(p.second)) {
      vects_accepted_.push_back(std::move(p));
    } else {
      still.push_back(std::move(p));
    }
  }
  vects_pending_ = std::move(still);
  progress(env);
}

void McInstance::on_vect(sim::Env& env, NodeId origin, const Value& v) {
  if (vect_valid(v)) {
    vects_accepted_.emplace_back(origin, v);
  } else {
    vects_pending_.emplace_back(origin, v);
  }
  progress(env);
}

bool McInstance::vect_valid(const Value& w) const {
  const std::size_t support = n_ - 2 * t_;
  if (!w.is_null()) {
    const auto c = std::count_if(inits_.begin(), inits_.end(),
                                 [&](const auto& p) { return p.second == w; });
    return static_cast<std::size_t>(c) >= support;
  }
  // Some n-t subset of delivered INITs in which no value reaches n-2t.
  std::map<Value, std::size_t> counts;
  std::size_t nulls = 0;
  for (const auto& [o, v] : inits_) {
    if (v.is_null()) {
      ++nulls;
    } else {
      ++counts[v];
    }
  }
  std::size_t room = nulls;
  for (const auto& [v, c] : counts) room += std::min(c, support - 1);
  return room >= n_ - t_;
}

void McInstance::progress(sim::Env& env) {
  const std::size_t quorum = n_ - t_;
  if (proposed_ && !voted_ && inits_.size() >= quorum) {
    std::map<Value, std::size_t> counts;
    for (std::size_t i = 0; i < quorum; ++i) {
      if (!inits_[i].second.is_null()) ++counts[inits_[i].second];
    }
    Value w = Value::null();
    for (const auto& [v, c] : counts) {
      if (c >= n_ - 2 * t_) {
        w = v;
        break;
      }
    }
    voted_ = true;
    vect_.broadcast(env, RbbKey{env.self(), 0, 0}, w);
  }
  if (voted_ && !bc_input_ && vects_accepted_.size() >= quorum) {
    const Value& first = vects_accepted_[0].second;
    bool same = !first.is_null();
    for (std::size_t i = 1; same && i < quorum; ++i) same = vects_accepted_[i].second == first;
    bc_input_ = same ? 1 : 0;
    bc_.propose(env, *bc_input_);
  }
  if (bc_outcome_ && !decided_) {
    if (*bc_outcome_ == 0) {
      decided_ = Value::null();
      on_decide_(env, *decided_);
      return;
    }
    std::map<Value, std::size_t> support;
    for (const auto& [o, v] : vects_accepted_) {
      if (!v.is_null()) ++support[v];
    }
    for (const auto& [v, c] : support) {
      if (c >= t_ + 1) {
        decided_ = v;
        on_decide_(env, v);
        return;
      }
    }
  }
}

}  // namespace icstack
