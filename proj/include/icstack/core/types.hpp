#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace icstack {

/// Virtual time in simulation units. Global and local clocks share the unit.
using Time = std::int64_t;

/// Raised when a configuration violates a documented bound.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a protocol entry point is used against its contract
/// (for example a second proposal for the same consensus instance).
class ProtocolMisuse : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Participant identity. Indices are 1-based, matching n_1..n_n.
struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  /// Zero-based position for vector indexing.
  [[nodiscard]] constexpr std::size_t idx() const { return value - 1; }
  [[nodiscard]] static constexpr NodeId from_idx(std::size_t i) {
    return NodeId(static_cast<std::uint32_t>(i + 1));
  }

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) {
  return os << 'n' << id.value;
}

/// Opaque private value. The null value (bottom) is distinct from every
/// payload, including the empty one.
class Value {
 public:
  Value() = default;  // null
  explicit Value(std::string bytes) : null_(false), bytes_(std::move(bytes)) {}

  [[nodiscard]] static Value null() { return Value(); }
  [[nodiscard]] static Value of(std::string_view s) { return Value(std::string(s)); }

  [[nodiscard]] bool is_null() const { return null_; }
  [[nodiscard]] const std::string& bytes() const { return bytes_; }

  friend bool operator==(const Value& a, const Value& b) {
    return a.null_ == b.null_ && a.bytes_ == b.bytes_;
  }
  friend std::strong_ordering operator<=>(const Value& a, const Value& b) {
    if (a.null_ != b.null_) return a.null_ ? std::strong_ordering::less : std::strong_ordering::greater;
    return a.bytes_ <=> b.bytes_;
  }

 private:
  bool null_ = true;
  std::string bytes_;
};

std::ostream& operator<<(std::ostream& os, const Value& v);

struct ValueHash {
  std::size_t operator()(const Value& v) const noexcept {
    return v.is_null() ? 0x9e3779b97f4a7c15ULL : std::hash<std::string>{}(v.bytes());
  }
};

/// The agreed vector V. Length is fixed at n; a slot that has been
/// finalized cannot be rewritten.
class ResultVector {
 public:
  ResultVector() = default;
  explicit ResultVector(std::size_t n) : slots_(n), final_(n, false) {}

  [[nodiscard]] std::size_t size() const { return slots_.size(); }
  [[nodiscard]] const Value& operator[](NodeId i) const { return slots_.at(i.idx()); }
  [[nodiscard]] bool is_final(NodeId i) const { return final_.at(i.idx()); }
  [[nodiscard]] bool complete() const;

  /// Writes a tentative value. Throws ProtocolMisuse on a finalized slot.
  void set(NodeId i, Value v);
  /// Writes and freezes the slot.
  void finalize(NodeId i, Value v);

  [[nodiscard]] const std::vector<Value>& values() const { return slots_; }

  friend bool operator==(const ResultVector& a, const ResultVector& b) {
    return a.slots_ == b.slots_;
  }

 private:
  std::vector<Value> slots_;
  std::vector<bool> final_;
};

std::ostream& operator<<(std::ostream& os, const ResultVector& v);

}  // namespace icstack
