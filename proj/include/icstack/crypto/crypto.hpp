#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "icstack/core/types.hpp"

namespace icstack::crypto {

using Bytes = std::string;

struct KeyPair {
  Bytes public_part;
  Bytes private_part;

  friend bool operator==(const KeyPair&, const KeyPair&) = default;
};

/// Ed25519 keys derived deterministically from (node, seed).
[[nodiscard]] KeyPair keygen(NodeId node, std::uint64_t seed);

[[nodiscard]] Bytes sign(const KeyPair& key, std::string_view message);

/// Never throws; malformed keys or signatures verify as false.
[[nodiscard]] bool verify(std::string_view public_part, std::string_view message,
                          std::string_view signature);

/// A vector of n MAC tags; entry j is keyed with the secret the sender
/// shares with node j.
struct Authenticator {
  std::vector<Bytes> entries;

  friend bool operator==(const Authenticator&, const Authenticator&) = default;
};

using PairwiseSecrets = std::map<NodeId, Bytes>;

/// Secret shared by nodes a and b; symmetric in its arguments.
[[nodiscard]] Bytes pairwise_secret(NodeId a, NodeId b, std::uint64_t seed);

/// `secrets` must hold the sender's shared secret with each of nodes 1..n.
[[nodiscard]] Authenticator make_authenticator(NodeId sender, const PairwiseSecrets& secrets,
                                               std::size_t n, std::string_view message);

/// Checks entry `receiver` with the secret shared between sender and receiver.
[[nodiscard]] bool verify_authenticator_entry(const Authenticator& auth, NodeId receiver,
                                              std::string_view shared_secret,
                                              std::string_view message);

enum class ProofMode { Signature, Authenticator };

using Proof = std::variant<Bytes, Authenticator>;

/// Signed statement by `endorser` that `subject` consistent-broadcast `value`.
struct Endorsement {
  NodeId endorser;
  NodeId subject;
  Value value;
  Proof proof;

  friend bool operator==(const Endorsement&, const Endorsement&) = default;
};

/// Canonical bytes of the tuple (c-ready, subject, value).
[[nodiscard]] Bytes endorsement_statement(NodeId subject, const Value& value);

/// Generation and verification counters of one run.
struct SignatureCounter {
  std::uint64_t generations = 0;
  std::uint64_t verifications = 0;

  [[nodiscard]] std::uint64_t total() const { return generations + verifications; }
};

/// Key material for one simulation run: every node's key pair and every
/// pairwise secret. Nodes only reach it through a NodeCrypto handle, which
/// exposes the holder's own private material and public material of others.
class KeyRing {
 public:
  KeyRing(std::size_t n, std::uint64_t seed, ProofMode mode);

  [[nodiscard]] std::size_t n() const { return keys_.size(); }
  [[nodiscard]] ProofMode mode() const { return mode_; }
  [[nodiscard]] const Bytes& public_key(NodeId id) const { return keys_.at(id.idx()).public_part; }

  [[nodiscard]] SignatureCounter& counter() { return counter_; }
  [[nodiscard]] const SignatureCounter& counter() const { return counter_; }

 private:
  friend class NodeCrypto;

  bool cached_verify(std::string_view pk, std::string_view msg, std::string_view sig);

  ProofMode mode_;
  std::vector<KeyPair> keys_;
  std::vector<PairwiseSecrets> secrets_;  // secrets_[i] = secrets of node i+1
  SignatureCounter counter_;
  std::unordered_map<std::string, bool> verify_cache_;
};

/// The cryptographic capabilities of a single node.
class NodeCrypto {
 public:
  NodeCrypto(KeyRing& ring, NodeId self) : ring_(&ring), self_(self) {}

  [[nodiscard]] NodeId self() const { return self_; }
  [[nodiscard]] ProofMode mode() const { return ring_->mode(); }

  /// Produces an endorsement of (subject, value) by this node. Counts one
  /// generation.
  [[nodiscard]] Endorsement endorse(NodeId subject, const Value& value);

  /// Byzantine helper: in authenticator mode only the entries of
  /// `valid_for` carry a correct tag, so the endorsement checks at those
  /// nodes and fails elsewhere. Signature mode ignores `valid_for`.
  [[nodiscard]] Endorsement endorse_partial(NodeId subject, const Value& value,
                                            const std::vector<NodeId>& valid_for);

  /// Checks an endorsement from this node's point of view: signature mode
  /// verifies the signature, authenticator mode checks this node's entry.
  /// Counts one verification.
  [[nodiscard]] bool check(const Endorsement& e);

 private:
  KeyRing* ring_;
  NodeId self_;
};

}  // namespace icstack::crypto
