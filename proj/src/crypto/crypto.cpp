#include "icstack/crypto/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <mutex>

namespace icstack::crypto {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  });
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

Bytes blake2b(std::string_view data, std::size_t out_len) {
  Bytes out(out_len, '\0');
  crypto_generichash(reinterpret_cast<unsigned char*>(out.data()), out_len,
                     reinterpret_cast<const unsigned char*>(data.data()), data.size(), nullptr, 0);
  return out;
}

Bytes hmac(std::string_view key, std::string_view message) {
  Bytes tag(crypto_auth_hmacsha256_BYTES, '\0');
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, reinterpret_cast<const unsigned char*>(key.data()), key.size());
  crypto_auth_hmacsha256_update(&st, reinterpret_cast<const unsigned char*>(message.data()),
                                message.size());
  crypto_auth_hmacsha256_final(&st, reinterpret_cast<unsigned char*>(tag.data()));
  return tag;
}

}  // namespace

KeyPair keygen(NodeId node, std::uint64_t seed) {
  ensure_sodium();
  Bytes material = "icstack-keygen";
  put_u64(material, seed);
  put_u64(material, node.value);
  const Bytes key_seed = blake2b(material, crypto_sign_SEEDBYTES);

  KeyPair kp;
  kp.public_part.assign(crypto_sign_PUBLICKEYBYTES, '\0');
  kp.private_part.assign(crypto_sign_SECRETKEYBYTES, '\0');
  crypto_sign_seed_keypair(reinterpret_cast<unsigned char*>(kp.public_part.data()),
                           reinterpret_cast<unsigned char*>(kp.private_part.data()),
                           reinterpret_cast<const unsigned char*>(key_seed.data()));
  return kp;
}

Bytes sign(const KeyPair& key, std::string_view message) {
  ensure_sodium();
  if (key.private_part.size() != crypto_sign_SECRETKEYBYTES) {
    throw ConfigError("sign: malformed private key");
  }
  Bytes sig(crypto_sign_BYTES, '\0');
  crypto_sign_detached(reinterpret_cast<unsigned char*>(sig.data()), nullptr,
                       reinterpret_cast<const unsigned char*>(message.data()), message.size(),
                       reinterpret_cast<const unsigned char*>(key.private_part.data()));
  return sig;
}

bool verify(std::string_view public_part, std::string_view message, std::string_view signature) {
  ensure_sodium();
  if (public_part.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) {
    return false;
  }
  return crypto_sign_verify_detached(reinterpret_cast<const unsigned char*>(signature.data()),
                                     reinterpret_cast<const unsigned char*>(message.data()),
                                     message.size(),
                                     reinterpret_cast<const unsigned char*>(public_part.data())) == 0;
}

Bytes pairwise_secret(NodeId a, NodeId b, std::uint64_t seed) {
  ensure_sodium();
  const auto lo = std::min(a.value, b.value);
  const auto hi = std::max(a.value, b.value);
  Bytes material = "icstack-pairwise";
  put_u64(material, seed);
  put_u64(material, lo);
  put_u64(material, hi);
  return blake2b(material, crypto_auth_hmacsha256_KEYBYTES);
}

Authenticator make_authenticator(NodeId sender, const PairwiseSecrets& secrets, std::size_t n,
                                 std::string_view message) {
  ensure_sodium();
  Authenticator auth;
  auth.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId j = NodeId::from_idx(i);
    auto it = secrets.find(j);
    if (it == secrets.end()) {
      throw ConfigError("make_authenticator: node " + std::to_string(sender.value) +
                        " has no secret shared with node " + std::to_string(j.value));
    }
    auth.entries.push_back(hmac(it->second, message));
  }
  return auth;
}

bool verify_authenticator_entry(const Authenticator& auth, NodeId receiver,
                                std::string_view shared_secret, std::string_view message) {
  ensure_sodium();
  if (receiver.value == 0 || receiver.idx() >= auth.entries.size()) return false;
  const Bytes& tag = auth.entries[receiver.idx()];
  if (tag.size() != crypto_auth_hmacsha256_BYTES) return false;
  const Bytes expected = hmac(shared_secret, message);
  return sodium_memcmp(tag.data(), expected.data(), expected.size()) == 0;
}

Bytes endorsement_statement(NodeId subject, const Value& value) {
  Bytes out = "c-ready";
  put_u64(out, subject.value);
  out.push_back(value.is_null() ? '\0' : '\1');
  put_u64(out, value.bytes().size());
  out += value.bytes();
  return out;
}

KeyRing::KeyRing(std::size_t n, std::uint64_t seed, ProofMode mode) : mode_(mode) {
  ensure_sodium();
  keys_.reserve(n);
  secrets_.resize(n);
  for (std::size_t i = 0; i < n; ++i) keys_.push_back(keygen(NodeId::from_idx(i), seed));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      secrets_[i][NodeId::from_idx(j)] =
          pairwise_secret(NodeId::from_idx(i), NodeId::from_idx(j), seed);
    }
  }
}

bool KeyRing::cached_verify(std::string_view pk, std::string_view msg, std::string_view sig) {
  // Simulated nodes share one process, so identical checks are memoised.
  // Callers still count every verification they request.
  std::string key;
  key.reserve(pk.size() + sig.size() + 32);
  key.append(pk).append(sig).append(blake2b(msg, 32));
  if (auto it = verify_cache_.find(key); it != verify_cache_.end()) return it->second;
  const bool ok = verify(pk, msg, sig);
  verify_cache_.emplace(std::move(key), ok);
  return ok;
}

Endorsement NodeCrypto::endorse(NodeId subject, const Value& value) {
  const Bytes statement = endorsement_statement(subject, value);
  ring_->counter_.generations += 1;
  Endorsement e{self_, subject, value, Bytes{}};
  if (ring_->mode_ == ProofMode::Signature) {
    e.proof = sign(ring_->keys_.at(self_.idx()), statement);
  } else {
    e.proof = make_authenticator(self_, ring_->secrets_.at(self_.idx()), ring_->n(), statement);
  }
  return e;
}

Endorsement NodeCrypto::endorse_partial(NodeId subject, const Value& value,
                                        const std::vector<NodeId>& valid_for) {
  Endorsement e = endorse(subject, value);
  if (auto* auth = std::get_if<Authenticator>(&e.proof)) {
    for (std::size_t i = 0; i < auth->entries.size(); ++i) {
      if (std::find(valid_for.begin(), valid_for.end(), NodeId::from_idx(i)) != valid_for.end()) continue;
      auth->entries[i].assign(auth->entries[i].size(), '\0');
    }
  }
  return e;
}

bool NodeCrypto::check(const Endorsement& e) {
  ring_->counter_.verifications += 1;
  if (e.endorser.value == 0 || e.endorser.idx() >= ring_->n()) return false;
  const Bytes statement = endorsement_statement(e.subject, e.value);
  if (const auto* sig = std::get_if<Bytes>(&e.proof)) {
    return ring_->cached_verify(ring_->public_key(e.endorser), statement, *sig);
  }
  const auto& auth = std::get<Authenticator>(e.proof);
  const Bytes& secret = ring_->secrets_.at(self_.idx()).at(e.endorser);
  return verify_authenticator_entry(auth, self_, secret, statement);
}

}  // namespace icstack::crypto
