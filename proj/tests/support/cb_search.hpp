#pragma once

#include <string>
#include <vector>

#include "icstack/broadcast/cb.hpp"
#include "script_env.hpp"

namespace icstack::testing {

struct CbSearchResult {
  std::size_t scripts = 0;
  std::size_t certified = 0;  // scripts where some value was certifiable
  std::size_t violations = 0;
  std::string first_violation;
};

/// Exhaustive search over adversary scripts for n=4, t=1 with node 1 as
/// the consistent-broadcast subject.
///
/// Corrupted subject: every honest node receives one of [], [a], [b],
/// [a,b], [b,a] as its c-send sequence (125 scripts). Corrupted endorser
/// (nodes 2..4): the honest subject c-sends a; the adversary additionally
/// tries to inject b. In every script the adversary pools the honest
/// c-ready endorsements with its own full and partial endorsements for both
/// values, endorsements forged under its own key in an honest node's name,
/// and honest endorsements spliced onto the other value. A violation is a
/// pair of honest verifiers accepting certificates for a and b.
inline CbSearchResult cb_uniqueness_search(crypto::ProofMode mode, std::uint64_t seed = 1) {
  constexpr std::size_t n = 4;
  constexpr std::size_t t = 1;
  const NodeId subject(1);
  const Value a("a");
  const Value b("b");
  const std::vector<std::vector<Value>> seqs = {{}, {a}, {b}, {a, b}, {b, a}};

  CbSearchResult res;
  crypto::KeyRing ring(n, seed, mode);

  auto search_one = [&](NodeId bad, const std::vector<std::vector<Value>>& inbox) {
    ++res.scripts;
    std::vector<crypto::Endorsement> pool;
    for (std::size_t i = 0; i < n; ++i) {
      const NodeId h = NodeId::from_idx(i);
      if (h == bad) continue;
      ScriptEnv env(ring, h);
      CbEngine eng(0, n, t, [](sim::Env&, const Certificate&) {});
      for (const Value& v : inbox[i]) {
        Message m{Header{0, subject.value, Layer::Cb}, CbSend{v}};
        eng.on_message(env, subject, m);
      }
      for (const auto& [dst, m] : env.sent) {
        if (const auto* r = std::get_if<CbReady>(&m->body)) pool.push_back(r->endorsement);
      }
    }
    crypto::NodeCrypto adv(ring, bad);
    const std::size_t honest_count = pool.size();
    for (const Value& v : {a, b}) {
      pool.push_back(adv.endorse(subject, v));
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<NodeId> valid_for;
        for (std::size_t j = 0; j < n; ++j) {
          if (mask & (1u << j)) valid_for.push_back(NodeId::from_idx(j));
        }
        pool.push_back(adv.endorse_partial(subject, v, valid_for));
      }
      for (std::size_t i = 0; i < n; ++i) {
        crypto::Endorsement forged = adv.endorse(subject, v);
        forged.endorser = NodeId::from_idx(i);
        pool.push_back(forged);
      }
    }
    for (std::size_t k = 0; k < honest_count; ++k) {
      crypto::Endorsement spliced = pool[k];
      spliced.value = spliced.value == a ? b : a;
      pool.push_back(spliced);
    }

    // Best certificate per (verifier, value): one verifying endorsement per endorser.
    bool ok_a = false;
    bool ok_b = false;
    for (std::size_t vi = 0; vi < n; ++vi) {
      const NodeId verifier = NodeId::from_idx(vi);
      if (verifier == bad) continue;
      crypto::NodeCrypto vc(ring, verifier);
      for (const Value& v : {a, b}) {
        Certificate cert{subject, v, {}};
        std::uint64_t have = 0;
        for (const auto& e : pool) {
          if (e.subject != subject || e.value != v || e.endorser.value == 0 || e.endorser.value > n) continue;
          if (have & (1ULL << e.endorser.idx())) continue;
          if (!vc.check(e)) continue;
          have |= 1ULL << e.endorser.idx();
          cert.endorsements.push_back(e);
        }
        if (cb_verify_certificate(cert, n, t, vc)) (v == a ? ok_a : ok_b) = true;
      }
    }
    if (ok_a || ok_b) ++res.certified;
    if (ok_a && ok_b) {
      if (res.violations++ == 0) {
        res.first_violation = "corrupted node " + std::to_string(bad.value);
      }
    }
  };

  // Corrupted subject.
  for (std::size_t s2 = 0; s2 < seqs.size(); ++s2) {
    for (std::size_t s3 = 0; s3 < seqs.size(); ++s3) {
      for (std::size_t s4 = 0; s4 < seqs.size(); ++s4) {
        search_one(subject, {{}, seqs[s2], seqs[s3], seqs[s4]});
      }
    }
  }
  // Corrupted endorser, honest subject; injected c-sends fail channel
  // authentication, so honest nodes only ever see a.
  for (std::uint32_t bad = 2; bad <= n; ++bad) {
    search_one(NodeId(bad), {{a}, {a}, {a}, {a}});
  }
  return res;
}

}  // namespace icstack::testing
