#include "icstack/broadcast/rbb.hpp"

#include <bit>

namespace icstack {

namespace {

std::uint64_t& mask_for(std::vector<std::pair<Value, std::uint64_t>>& tallies, const Value& v) {
  for (auto& [val, mask] : tallies) {
    if (val == v) return mask;
  }
  tallies.emplace_back(v, 0);
  return tallies.back().second;
}

}  // namespace

RbbEngine::RbbEngine(Header hdr, std::size_t n, std::size_t t, DeliverFn on_deliver)
    : hdr_(hdr), n_(n), q_(quorum_thresholds_unchecked(n, t)), on_deliver_(std::move(on_deliver)) {}

const RbbState* RbbEngine::state(const RbbKey& key) const {
  auto it = states_.find(key);
  return it == states_.end() ? nullptr : &it->second;
}

void RbbEngine::send_all(sim::Env& env, RbbKind kind, const RbbKey& key, const Value& v) {
  env.multicast(make_message(hdr_, RbbMsg{kind, key.origin, key.phase, key.step, v}));
}

void RbbEngine::broadcast(sim::Env& env, const RbbKey& key, const Value& v) {
  if (key.origin != env.self()) throw ProtocolMisuse("reliable broadcast from a foreign origin");
  send_all(env, RbbKind::Initial, key, v);
}

void RbbEngine::on_message(sim::Env& env, NodeId src, const RbbMsg& m) {
  if (m.origin.value == 0 || m.origin.value > n_ || src.value == 0 || src.value > n_) {
    env.metrics().invalid_drops += 1;
    return;
  }
  const RbbKey key{m.origin, m.phase, m.step};
  if (admit_ && !admit_(key)) {
    env.metrics().window_drops += 1;
    return;
  }
  RbbState& st = states_[key];
  if (st.delivered) return;
  const std::uint64_t bit = 1ULL << src.idx();

  switch (m.kind) {
    case RbbKind::Initial:
      if (src != m.origin || st.initial_seen) return;
      st.initial_seen = true;
      if (!st.echo_sent) {
        st.echo_sent = true;
        send_all(env, RbbKind::Echo, key, m.value);
      }
      return;
    case RbbKind::Echo: {
      if (st.echoed_by & bit) return;
      st.echoed_by |= bit;
      std::uint64_t& mask = mask_for(st.echoes, m.value);
      mask |= bit;
      if (!st.ready_sent && static_cast<std::size_t>(std::popcount(mask)) >= q_.echo_threshold) {
        st.ready_sent = true;
        send_all(env, RbbKind::Ready, key, m.value);
      }
      return;
    }
    case RbbKind::Ready: {
      if (st.readied_by & bit) return;
      st.readied_by |= bit;
      std::uint64_t& mask = mask_for(st.readies, m.value);
      mask |= bit;
      const auto count = static_cast<std::size_t>(std::popcount(mask));
      if (!st.ready_sent && count >= q_.ready_threshold) {
        st.ready_sent = true;
        send_all(env, RbbKind::Ready, key, m.value);
      }
      if (count >= q_.decide_threshold) {
        st.delivered = true;
        // Tallies are no longer needed once delivered.
        st.echoes.clear();
        st.readies.clear();
        on_deliver_(env, key, m.value);
      }
      return;
    }
  }
}

}  // namespace icstack
