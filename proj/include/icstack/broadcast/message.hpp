#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "icstack/core/types.hpp"
#include "icstack/crypto/crypto.hpp"

namespace icstack {

/// Which protocol layer a message belongs to. Used for dispatch and for
/// per-primitive message accounting.
enum class Layer : std::uint8_t {
  Mu,        // plain multicast dissemination
  Cb,        // consistent broadcast
  Rbb,       // stand-alone reliable broadcast (EIC)
  Bc,        // binary consensus
  McInit,    // multi-valued consensus, proposal broadcast
  McVect,    // multi-valued consensus, vote broadcast
  McBc,      // binary consensus embedded in multi-valued consensus
  Retrieve,  // value recovery after binary consensus
  Pease,     // timeout-driven relay rounds
};

inline constexpr std::size_t kLayerCount = 9;

[[nodiscard]] constexpr std::size_t layer_index(Layer l) { return static_cast<std::size_t>(l); }
[[nodiscard]] std::string_view layer_name(Layer l);

/// Report key of the primitive a layer is accounted under: mu, cb, rbb,
/// bc, mc, retrieve or pease.
[[nodiscard]] std::string_view layer_report_key(Layer l);

/// `run` separates parallel IC instances, `slot` names the IC slot (or the
/// broadcasting node for dissemination layers).
struct Header {
  std::uint32_t run = 0;
  std::uint32_t slot = 0;
  Layer layer = Layer::Mu;

  friend bool operator==(const Header&, const Header&) = default;
};

struct MuValue {
  Value value;
  friend bool operator==(const MuValue&, const MuValue&) = default;
};

/// c-send; the subject is hdr.slot.
struct CbSend {
  Value value;
  friend bool operator==(const CbSend&, const CbSend&) = default;
};

struct CbReady {
  crypto::Endorsement endorsement;
  friend bool operator==(const CbReady&, const CbReady&) = default;
};

struct CbFinal {
  Value value;
  std::vector<crypto::Endorsement> cert;
  friend bool operator==(const CbFinal&, const CbFinal&) = default;
};

enum class RbbKind : std::uint8_t { Initial, Echo, Ready };

/// Reliable-broadcast traffic. An instance is named by (origin, phase, step)
/// inside the (run, slot, layer) given by the header; stand-alone uses leave
/// phase and step at zero.
struct RbbMsg {
  RbbKind kind = RbbKind::Initial;
  NodeId origin;
  std::uint32_t phase = 0;
  std::uint8_t step = 0;
  Value value;
  friend bool operator==(const RbbMsg&, const RbbMsg&) = default;
};

struct RetrieveReq {
  friend bool operator==(const RetrieveReq&, const RetrieveReq&) = default;
};

struct Retrieved {
  Value value;
  std::vector<crypto::Endorsement> cert;
  friend bool operator==(const Retrieved&, const Retrieved&) = default;
};

/// One relay round. Each entry is a path of node indices (packed 4 bits per
/// hop, the value's source lowest) and the value relayed along it.
struct PeaseRound {
  std::uint32_t round = 0;
  std::vector<std::pair<std::uint64_t, Value>> entries;
  friend bool operator==(const PeaseRound&, const PeaseRound&) = default;
};

using Body = std::variant<MuValue, CbSend, CbReady, CbFinal, RbbMsg, RetrieveReq, Retrieved, PeaseRound>;

struct Message {
  Header hdr;
  Body body;
  friend bool operator==(const Message&, const Message&) = default;
};

using MessagePtr = std::shared_ptr<const Message>;

template <class B>
[[nodiscard]] MessagePtr make_message(Header hdr, B body) {
  return std::make_shared<const Message>(Message{hdr, Body(std::move(body))});
}

/// Short human-readable kind, e.g. "c-send" or "rbb-echo".
[[nodiscard]] std::string_view message_kind(const Message& m);

}  // namespace icstack
