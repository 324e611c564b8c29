#include "icstack/broadcast/message.hpp"

namespace icstack {

std::string_view layer_name(Layer l) {
  switch (l) {
    case Layer::Mu: return "mu";
    case Layer::Cb: return "cb";
    case Layer::Rbb: return "rbb";
    case Layer::Bc: return "bc";
    case Layer::McInit: return "mc-init";
    case Layer::McVect: return "mc-vect";
    case Layer::McBc: return "mc-bc";
    case Layer::Retrieve: return "retrieve";
    case Layer::Pease: return "pease";
  }
  return "?";
}

std::string_view layer_report_key(Layer l) {
  switch (l) {
    case Layer::Mu: return "mu";
    case Layer::Cb: return "cb";
    case Layer::Rbb: return "rbb";
    case Layer::Bc: return "bc";
    case Layer::McInit:
    case Layer::McVect:
    case Layer::McBc: return "mc";
    case Layer::Retrieve: return "retrieve";
    case Layer::Pease: return "pease";
  }
  return "?";
}

std::string_view message_kind(const Message& m) {
  struct Visitor {
    std::string_view operator()(const MuValue&) const { return "mu-value"; }
    std::string_view operator()(const CbSend&) const { return "c-send"; }
    std::string_view operator()(const CbReady&) const { return "c-ready"; }
    std::string_view operator()(const CbFinal&) const { return "c-final"; }
    std::string_view operator()(const RbbMsg& r) const {
      switch (r.kind) {
        case RbbKind::Initial: return "rbb-initial";
        case RbbKind::Echo: return "rbb-echo";
        case RbbKind::Ready: return "rbb-ready";
      }
      return "rbb-?";
    }
    std::string_view operator()(const RetrieveReq&) const { return "retrieve"; }
    std::string_view operator()(const Retrieved&) const { return "retrieved-value"; }
    std::string_view operator()(const PeaseRound&) const { return "pease-round"; }
  };
  return std::visit(Visitor{}, m.body);
}

}  // namespace icstack
