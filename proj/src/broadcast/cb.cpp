#include "icstack/broadcast/cb.hpp"

#include <algorithm>

namespace icstack {

bool cb_verify_certificate(const Certificate& cert, std::size_t n, std::size_t t,
                           crypto::NodeCrypto& verifier) {
  if (cert.subject.value == 0 || cert.subject.value > n) return false;
  std::uint64_t seen = 0;
  std::size_t valid = 0;
  for (const auto& e : cert.endorsements) {
    if (e.endorser.value == 0 || e.endorser.value > n) return false;
    const std::uint64_t bit = 1ULL << e.endorser.idx();
    if (seen & bit) return false;
    seen |= bit;
    if (e.subject != cert.subject || e.value != cert.value) return false;
    if (!verifier.check(e)) return false;
    ++valid;
  }
  return valid >= n - t;
}

CbEngine::CbEngine(std::uint32_t run, std::size_t n, std::size_t t, DeliverFn on_deliver)
    : run_(run), n_(n), t_(t), on_deliver_(std::move(on_deliver)), states_(n) {}

void CbEngine::broadcast(sim::Env& env, const Value& v) {
  auto& st = states_[env.self().idx()];
  if (st.v_prime) throw ProtocolMisuse("consistent broadcast already started");
  st.v_prime = v;
  env.multicast(make_message(Header{run_, env.self().value, Layer::Cb}, CbSend{v}));
}

bool CbEngine::on_message(sim::Env& env, NodeId src, const Message& m) {
  if (m.hdr.layer != Layer::Cb) return false;
  if (m.hdr.slot == 0 || m.hdr.slot > n_) {
    env.metrics().invalid_drops += 1;
    return true;
  }
  if (const auto* b = std::get_if<CbSend>(&m.body)) {
    // Channels are authenticated: only the subject itself can c-send.
    if (m.hdr.slot != src.value) {
      env.metrics().invalid_drops += 1;
      return true;
    }
    on_send(env, src, *b);
  } else if (const auto* b = std::get_if<CbReady>(&m.body)) {
    if (m.hdr.slot != env.self().value) {
      env.metrics().invalid_drops += 1;
      return true;
    }
    on_ready(env, src, *b);
  } else if (const auto* b = std::get_if<CbFinal>(&m.body)) {
    if (m.hdr.slot != src.value) {
      env.metrics().invalid_drops += 1;
      return true;
    }
    on_final(env, src, *b);
  } else {
    env.metrics().invalid_drops += 1;
  }
  return true;
}

void CbEngine::on_send(sim::Env& env, NodeId src, const CbSend& b) {
  auto& st = states_[src.idx()];
  if (st.v_tilde) return;  // endorse only the first value per sender
  st.v_tilde = b.value;
  auto e = env.crypto().endorse(src, b.value);
  env.send(src, make_message(Header{run_, src.value, Layer::Cb}, CbReady{std::move(e)}));
}

void CbEngine::on_ready(sim::Env& env, NodeId src, const CbReady& b) {
  auto& st = states_[env.self().idx()];
  if (!st.v_prime || st.final_sent) return;
  const auto& e = b.endorsement;
  if (e.endorser != src || e.subject != env.self() || e.value != *st.v_prime) {
    env.metrics().invalid_drops += 1;
    return;
  }
  const bool dup = std::any_of(st.W.begin(), st.W.end(),
                               [&](const crypto::Endorsement& w) { return w.endorser == src; });
  if (dup) return;
  if (!env.crypto().check(e)) {
    env.metrics().invalid_drops += 1;
    return;
  }
  st.W.push_back(e);
  st.r += 1;
  if (st.r >= n_ - t_) env.request_flush();
}

void CbEngine::on_flush(sim::Env& env) {
  auto& st = states_[env.self().idx()];
  if (!st.v_prime || st.final_sent || st.r < n_ - t_) return;
  st.final_sent = true;
  env.multicast(make_message(Header{run_, env.self().value, Layer::Cb}, CbFinal{*st.v_prime, st.W}));
}

void CbEngine::on_final(sim::Env& env, NodeId src, const CbFinal& b) {
  auto& st = states_[src.idx()];
  if (st.delivered) return;
  Certificate cert{src, b.value, b.cert};
  if (!cb_verify_certificate(cert, n_, t_, env.crypto())) {
    env.metrics().invalid_drops += 1;
    return;
  }
  st.delivered = b.value;
  st.cert = cert;
  on_deliver_(env, cert);
}

}  // namespace icstack
