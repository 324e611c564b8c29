#include "icstack/broadcast/wire.hpp"

#include <cstdint>

namespace icstack::wire {

namespace {

constexpr std::uint8_t kVersion = 1;
constexpr std::uint32_t kMaxLen = 1u << 24;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void bytes(std::string_view b) {
    u32(static_cast<std::uint32_t>(b.size()));
    out_.append(b);
  }
  void value(const Value& v) {
    u8(v.is_null() ? 0 : 1);
    if (!v.is_null()) bytes(v.bytes());
  }
  void endorsement(const crypto::Endorsement& e) {
    u32(e.endorser.value);
    u32(e.subject.value);
    value(e.value);
    if (const auto* sig = std::get_if<crypto::Bytes>(&e.proof)) {
      u8(0);
      bytes(*sig);
    } else {
      const auto& auth = std::get<crypto::Authenticator>(e.proof);
      u8(1);
      u32(static_cast<std::uint32_t>(auth.entries.size()));
      for (const auto& tag : auth.entries) bytes(tag);
    }
  }
  void cert(const std::vector<crypto::Endorsement>& c) {
    u32(static_cast<std::uint32_t>(c.size()));
    for (const auto& e : c) endorsement(e);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  bool u8(std::uint8_t& v) {
    if (pos_ + 1 > in_.size()) return false;
    v = static_cast<std::uint8_t>(in_[pos_++]);
    return true;
  }
  bool u32(std::uint32_t& v) {
    if (pos_ + 4 > in_.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return true;
  }
  bool u64(std::uint64_t& v) {
    if (pos_ + 8 > in_.size()) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return true;
  }
  bool bytes(std::string& b) {
    std::uint32_t len = 0;
    if (!u32(len) || len > kMaxLen || pos_ + len > in_.size()) return false;
    b.assign(in_.substr(pos_, len));
    pos_ += len;
    return true;
  }
  bool value(Value& v) {
    std::uint8_t flag = 0;
    if (!u8(flag) || flag > 1) return false;
    if (flag == 0) {
      v = Value::null();
      return true;
    }
    std::string b;
    if (!bytes(b)) return false;
    v = Value(std::move(b));
    return true;
  }
  bool node(NodeId& id) {
    std::uint32_t v = 0;
    if (!u32(v)) return false;
    id = NodeId(v);
    return true;
  }
  bool endorsement(crypto::Endorsement& e) {
    std::uint8_t kind = 0;
    if (!node(e.endorser) || !node(e.subject) || !value(e.value) || !u8(kind)) return false;
    if (kind == 0) {
      std::string sig;
      if (!bytes(sig)) return false;
      e.proof = std::move(sig);
      return true;
    }
    if (kind != 1) return false;
    std::uint32_t count = 0;
    if (!u32(count) || count > 1024) return false;
    crypto::Authenticator auth;
    auth.entries.resize(count);
    for (auto& tag : auth.entries) {
      if (!bytes(tag)) return false;
    }
    e.proof = std::move(auth);
    return true;
  }
  bool cert(std::vector<crypto::Endorsement>& c) {
    std::uint32_t count = 0;
    if (!u32(count) || count > 1024) return false;
    c.resize(count);
    for (auto& e : c) {
      if (!endorsement(e)) return false;
    }
    return true;
  }
  [[nodiscard]] bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode(const Message& m) {
  Writer w;
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(m.hdr.layer));
  w.u32(m.hdr.run);
  w.u32(m.hdr.slot);
  w.u8(static_cast<std::uint8_t>(m.body.index()));
  std::visit(
      [&w](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, MuValue> || std::is_same_v<B, CbSend>) {
          w.value(b.value);
        } else if constexpr (std::is_same_v<B, CbReady>) {
          w.endorsement(b.endorsement);
        } else if constexpr (std::is_same_v<B, CbFinal> || std::is_same_v<B, Retrieved>) {
          w.value(b.value);
          w.cert(b.cert);
        } else if constexpr (std::is_same_v<B, RbbMsg>) {
          w.u8(static_cast<std::uint8_t>(b.kind));
          w.u32(b.origin.value);
          w.u32(b.phase);
          w.u8(b.step);
          w.value(b.value);
        } else if constexpr (std::is_same_v<B, RetrieveReq>) {
          // no fields
        } else if constexpr (std::is_same_v<B, PeaseRound>) {
          w.u32(b.round);
          w.u32(static_cast<std::uint32_t>(b.entries.size()));
          for (const auto& [path, v] : b.entries) {
            w.u64(path);
            w.value(v);
          }
        }
      },
      m.body);
  return w.take();
}

std::optional<Message> decode(std::string_view bytes) {
  Reader r(bytes);
  std::uint8_t version = 0, layer = 0, tag = 0;
  Message m;
  if (!r.u8(version) || version != kVersion) return std::nullopt;
  if (!r.u8(layer) || layer >= kLayerCount) return std::nullopt;
  m.hdr.layer = static_cast<Layer>(layer);
  if (!r.u32(m.hdr.run) || !r.u32(m.hdr.slot) || !r.u8(tag)) return std::nullopt;

  bool ok = false;
  switch (tag) {
    case 0: {
      MuValue b;
      ok = r.value(b.value);
      m.body = std::move(b);
      break;
    }
    case 1: {
      CbSend b;
      ok = r.value(b.value);
      m.body = std::move(b);
      break;
    }
    case 2: {
      CbReady b;
      ok = r.endorsement(b.endorsement);
      m.body = std::move(b);
      break;
    }
    case 3: {
      CbFinal b;
      ok = r.value(b.value) && r.cert(b.cert);
      m.body = std::move(b);
      break;
    }
    case 4: {
      RbbMsg b;
      std::uint8_t kind = 0;
      ok = r.u8(kind) && kind <= 2 && r.node(b.origin) && r.u32(b.phase) && r.u8(b.step) &&
           r.value(b.value);
      b.kind = static_cast<RbbKind>(kind);
      m.body = std::move(b);
      break;
    }
    case 5:
      ok = true;
      m.body = RetrieveReq{};
      break;
    case 6: {
      Retrieved b;
      ok = r.value(b.value) && r.cert(b.cert);
      m.body = std::move(b);
      break;
    }
    case 7: {
      PeaseRound b;
      std::uint32_t count = 0;
      ok = r.u32(b.round) && r.u32(count) && count <= (1u << 20);
      for (std::uint32_t i = 0; ok && i < count; ++i) {
        std::uint64_t path = 0;
        Value v;
        ok = r.u64(path) && r.value(v);
        b.entries.emplace_back(path, std::move(v));
      }
      m.body = std::move(b);
      break;
    }
    default:
      return std::nullopt;
  }
  if (!ok || !r.done()) return std::nullopt;
  return m;
}

}  // namespace icstack::wire
