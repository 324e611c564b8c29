#include "icstack/consensus/bc.hpp"

#include <algorithm>

#include "icstack/simnet/clock.hpp"

namespace icstack {

int local_coin(const CoinSpec& spec, NodeId node, const Header& hdr, std::uint32_t phase) {
  if (spec.mode == CoinMode::Worst) return static_cast<int>((node.value + phase) % 2);
  const std::uint64_t inst =
      (std::uint64_t(hdr.run) << 40) ^ (std::uint64_t(hdr.slot) << 8) ^ layer_index(hdr.layer);
  return static_cast<int>(sim::derive_seed(spec.seed, node.value, inst, phase) & 1);
}

Value encode_step_value(std::uint8_t step, std::uint8_t code) {
  if (step == 3) {
    if (code == kNoMajority) return Value::of("-");
    return Value::of(code == kBit1 ? "d1" : "d0");
  }
  return Value::of(code == kBit1 ? "1" : "0");
}

std::optional<std::uint8_t> decode_step_value(std::uint8_t step, const Value& v) {
  if (v.is_null()) return std::nullopt;
  const std::string& b = v.bytes();
  if (step == 1 || step == 2) {
    if (b == "0") return kBit0;
    if (b == "1") return kBit1;
    return std::nullopt;
  }
  if (step == 3) {
    if (b == "d0") return kBit0;
    if (b == "d1") return kBit1;
    if (b == "-") return kNoMajority;
  }
  return std::nullopt;
}

BcInstance::BcInstance(Header hdr, std::size_t n, std::size_t t, std::uint32_t window, CoinSpec coin,
                       DecideFn on_decide)
    : hdr_(hdr),
      n_(n),
      t_(t),
      window_(std::max<std::uint32_t>(1, window)),
      coin_(coin),
      on_decide_(std::move(on_decide)),
      rbb_(hdr, n, t, [this](sim::Env& env, const RbbKey& k, const Value& v) { on_deliver(env, k, v); }) {
  rbb_.set_admit([this](const RbbKey& k) {
    return k.phase >= 1 && k.step >= 1 && k.step <= 3 && k.phase < cur_ + window_;
  });
}

void BcInstance::propose(sim::Env& env, int bit) {
  if (proposed_) throw ProtocolMisuse("binary consensus: second proposal for the same instance");
  if (bit != 0 && bit != 1) throw ProtocolMisuse("binary consensus: proposal must be 0 or 1");
  proposed_ = true;
  est_ = bit;
  broadcast_step(env, 1, static_cast<std::uint8_t>(bit));
  waiting_ = 1;
  progress(env);
}

void BcInstance::on_message(sim::Env& env, NodeId src, const RbbMsg& m) {
  rbb_.on_message(env, src, m);
}

void BcInstance::broadcast_step(sim::Env& env, std::uint8_t step, std::uint8_t code) {
  rbb_.broadcast(env, RbbKey{env.self(), cur_, step}, encode_step_value(step, code));
}

void BcInstance::enter_phase(std::uint32_t p) {
  cur_ = p;
  while (!phases_.empty() && phases_.begin()->first + 1 < cur_) phases_.erase(phases_.begin());
}

void BcInstance::note_span(sim::Env& env) {
  if (phases_.empty()) return;
  const std::size_t span = phases_.rbegin()->first - phases_.begin()->first + 1;
  max_span_ = std::max(max_span_, span);
  env.metrics().max_buffer_span = std::max<std::uint64_t>(env.metrics().max_buffer_span, span);
}

void BcInstance::on_deliver(sim::Env& env, const RbbKey& key, const Value& v) {
  if (stopped_) return;
  const auto code = decode_step_value(key.step, v);
  if (!code) {
    env.metrics().invalid_drops += 1;
    return;
  }
  if (key.phase + 1 < cur_) return;  // older than the retained previous phase
  if (key.phase >= cur_ + window_) {
    env.metrics().window_drops += 1;
    return;
  }
  phases_[key.phase].steps[key.step - 1].pending.emplace_back(key.origin, *code);
  note_span(env);

  if (sleeping_ && key.phase == cur_) {
    sleeping_ = false;
    final_phase_ = true;
    broadcast_step(env, 1, static_cast<std::uint8_t>(est_));
    waiting_ = 1;
  }
  revalidate(env);
  progress(env);
}

bool BcInstance::valid(std::uint32_t phase, std::uint8_t step, std::uint8_t code) const {
  const std::size_t quorum = n_ - t_;
  if (step == 1) {
    if (code > kBit1) return false;
    if (phase == 1) return true;
    auto it = phases_.find(phase - 1);
    if (it == phases_.end()) return false;
    const auto& c = it->second.steps[2].count;
    if (c[0] + c[1] + c[2] < quorum) return false;
    if (c[code] >= t_ + 1) return true;
    // Some n-t subset without t+1 matching decide-candidates: the coin decides.
    return std::min(c[0], t_) + std::min(c[1], t_) + c[2] >= quorum;
  }
  const auto it = phases_.find(phase);
  if (it == phases_.end()) return false;
  if (step == 2) {
    if (code > kBit1) return false;
    const auto& c = it->second.steps[0].count;
    if (c[0] + c[1] < quorum) return false;
    if (code == kBit1) return c[1] >= (quorum + 1) / 2;
    return c[0] >= quorum / 2 + 1;
  }
  const auto& c = it->second.steps[1].count;
  const std::size_t majority = n_ / 2 + 1;
  if (c[0] + c[1] < quorum) return false;
  if (code == kNoMajority) return std::min(c[0], n_ / 2) + std::min(c[1], n_ / 2) >= quorum;
  return c[code] >= majority;
}

void BcInstance::revalidate(sim::Env&) {
  // Validity of (phase, step) depends only on earlier (phase, step) pairs,
  // so one ascending pass reaches a fixpoint.
  for (auto& [phase, rec] : phases_) {
    for (std::uint8_t s = 1; s <= 3; ++s) {
      auto& st = rec.steps[s - 1];
      if (st.pending.empty()) continue;
      std::vector<std::pair<NodeId, std::uint8_t>> still;
      for (const auto& [origin, code] : st.pending) {
        if (valid(phase, s, code)) {
          st.accepted.emplace_back(origin, code);
          st.count[code] += 1;
        } else {
          still.emplace_back(origin, code);
        }
      }
      st.pending = std::move(still);
    }
  }
}

void BcInstance::progress(sim::Env& env) {
  const std::size_t quorum = n_ - t_;
  while (proposed_ && !stopped_ && !sleeping_ && waiting_ != 0) {
    auto& st = phases_[cur_].steps[waiting_ - 1];
    if (st.accepted.size() < quorum) return;
    std::array<std::size_t, 3> c{};
    for (std::size_t i = 0; i < quorum; ++i) c[st.accepted[i].second] += 1;

    if (waiting_ == 1) {
      const std::uint8_t v = (2 * c[1] >= quorum) ? kBit1 : kBit0;
      broadcast_step(env, 2, v);
      waiting_ = 2;
      continue;
    }
    if (waiting_ == 2) {
      std::uint8_t code = kNoMajority;
      if (c[1] >= n_ / 2 + 1) code = kBit1;
      if (c[0] >= n_ / 2 + 1) code = kBit0;
      broadcast_step(env, 3, code);
      if (final_phase_) {
        stopped_ = true;
        return;
      }
      waiting_ = 3;
      continue;
    }

    const int w = c[1] > c[0] ? 1 : 0;
    bool just_decided = false;
    if (c[w] >= 2 * t_ + 1 && !decided_) {
      decided_ = w;
      decision_phase_ = cur_;
      just_decided = true;
    }
    est_ = c[w] >= t_ + 1 ? w : local_coin(coin_, env.self(), hdr_, cur_);
    enter_phase(cur_ + 1);
    if (just_decided) {
      sleeping_ = true;
      waiting_ = 0;
      on_decide_(env, w);
      // Next-phase traffic may already be buffered.
      auto it = phases_.find(cur_);
      if (it != phases_.end()) {
        bool any = false;
        for (const auto& s : it->second.steps) any = any || !s.accepted.empty() || !s.pending.empty();
        if (any && sleeping_) {
          sleeping_ = false;
          final_phase_ = true;
          broadcast_step(env, 1, static_cast<std::uint8_t>(est_));
          waiting_ = 1;
          continue;
        }
      }
      return;
    }
    broadcast_step(env, 1, static_cast<std::uint8_t>(est_));
    waiting_ = 1;
    revalidate(env);
  }
}

}  // namespace icstack
