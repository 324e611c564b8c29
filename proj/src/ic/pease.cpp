#include "icstack/ic/pease.hpp"

#include <bit>

namespace icstack {

namespace eig {

std::size_t length(std::uint64_t path) {
  std::size_t len = 0;
  while (path != 0) {
    path >>= 4;
    ++len;
  }
  return len;
}

bool contains(std::uint64_t path, NodeId id) {
  while (path != 0) {
    if ((path & 0xf) == id.value) return true;
    path >>= 4;
  }
  return false;
}

std::uint64_t append(std::uint64_t path, NodeId id) {
  return path | (std::uint64_t(id.value) << (4 * length(path)));
}

bool well_formed(std::uint64_t path, std::size_t n) {
  std::uint32_t seen = 0;
  while (path != 0) {
    const auto d = static_cast<std::uint32_t>(path & 0xf);
    if (d == 0 || d > n) return false;
    if (seen & (1u << d)) return false;
    seen |= 1u << d;
    path >>= 4;
  }
  return true;
}

Value resolve(const std::map<std::uint64_t, Value>& tree, std::uint64_t path, std::size_t n,
              std::size_t depth) {
  if (length(path) >= depth) {
    auto it = tree.find(path);
    return it == tree.end() ? Value::null() : it->second;
  }
  std::vector<std::pair<Value, std::size_t>> counts;
  std::size_t children = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const NodeId id = NodeId::from_idx(k);
    if (contains(path, id)) continue;
    ++children;
    Value v = resolve(tree, append(path, id), n, depth);
    bool found = false;
    for (auto& [val, c] : counts) {
      if (val == v) {
        ++c;
        found = true;
        break;
      }
    }
    if (!found) counts.emplace_back(std::move(v), 1);
  }
  for (const auto& [val, c] : counts) {
    if (2 * c > children) return val;
  }
  return Value::null();
}

}  // namespace eig

PeaseNode::PeaseNode(IcParams params, NodeId self, std::vector<Value> own_values)
    : params_(params), self_(self) {
  if (params_.n > kPeaseMaxNodes) {
    throw ConfigError("relay rounds support at most " + std::to_string(kPeaseMaxNodes) + " nodes");
  }
  if (own_values.size() != params_.instances) {
    throw ConfigError("PeaseNode: one value per parallel instance is required");
  }
  for (auto& v : own_values) {
    RunState rs;
    rs.own = std::move(v);
    rs.V = ResultVector(params_.n);
    runs_.push_back(std::move(rs));
  }
}

void PeaseNode::on_start(sim::Env& env) {
  for (std::uint32_t r = 0; r < runs_.size(); ++r) {
    runs_[r].round = 1;
    send_round(env, r);
  }
  for (std::uint32_t round = 1; round <= params_.t + 1; ++round) {
    env.set_timer(static_cast<Time>(round) * params_.round_timeout, round);
  }
}

void PeaseNode::send_round(sim::Env& env, std::uint32_t run) {
  RunState& rs = runs_[run];
  PeaseRound msg;
  msg.round = rs.round;
  if (rs.round == 1) {
    msg.entries.emplace_back(0, rs.own);
  } else {
    for (const auto& [path, v] : rs.tree) {
      if (eig::length(path) == rs.round - 1 && !eig::contains(path, self_)) {
        msg.entries.emplace_back(path, v);
      }
    }
  }
  env.multicast(make_message(Header{run, self_.value, Layer::Pease}, std::move(msg)));
}

void PeaseNode::absorb(sim::Env& env, std::uint32_t run, NodeId src, const PeaseRound& b) {
  RunState& rs = runs_[run];
  for (const auto& [path, v] : b.entries) {
    if (eig::length(path) != b.round - 1 || !eig::well_formed(path, params_.n) ||
        eig::contains(path, src)) {
      env.metrics().invalid_drops += 1;
      continue;
    }
    rs.tree.emplace(eig::append(path, src), v);
  }
  rs.heard |= 1ULL << src.idx();
}

void PeaseNode::on_message(sim::Env& env, NodeId src, const MessagePtr& mp) {
  const Message& m = *mp;
  const auto* b = std::get_if<PeaseRound>(&m.body);
  if (m.hdr.layer != Layer::Pease || !b || m.hdr.run >= runs_.size() || m.hdr.slot != src.value ||
      b->round == 0 || b->round > params_.t + 1) {
    env.metrics().invalid_drops += 1;
    return;
  }
  RunState& rs = runs_[m.hdr.run];
  if (b->round < rs.round) {
    env.metrics().late_drops += 1;
    late_senders_.insert(src);
    return;
  }
  if (b->round > rs.round) {
    rs.future[b->round].emplace_back(src, mp);
    return;
  }
  if (rs.heard & (1ULL << src.idx())) return;
  absorb(env, m.hdr.run, src, *b);
  if (std::popcount(rs.heard) == static_cast<int>(params_.n)) close_round(env, m.hdr.run);
}

void PeaseNode::on_timer(sim::Env& env, std::uint64_t id) {
  for (std::uint32_t r = 0; r < runs_.size(); ++r) {
    if (runs_[r].round == id) {
      env.metrics().timeouts += 1;
      close_round(env, r);
    }
  }
}

void PeaseNode::close_round(sim::Env& env, std::uint32_t run) {
  RunState& rs = runs_[run];
  const std::size_t last = params_.t + 1;
  while (true) {
    if (rs.round == last) {
      for (std::size_t j = 0; j < params_.n; ++j) {
        const NodeId slot = NodeId::from_idx(j);
        rs.V.finalize(slot, eig::resolve(rs.tree, eig::append(0, slot), params_.n, last));
      }
      rs.round = static_cast<std::uint32_t>(last + 1);
      rs.done_at = env.global_now();
      rs.tree.clear();
      rs.future.clear();
      return;
    }
    rs.round += 1;
    rs.heard = 0;
    send_round(env, run);
    auto it = rs.future.find(rs.round);
    if (it != rs.future.end()) {
      for (const auto& [src, mp] : it->second) {
        if (rs.heard & (1ULL << src.idx())) continue;
        absorb(env, run, src, std::get<PeaseRound>(mp->body));
      }
      rs.future.erase(it);
    }
    if (std::popcount(rs.heard) != static_cast<int>(params_.n)) return;
  }
}

}  // namespace icstack
