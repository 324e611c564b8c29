#include "icstack/core/types.hpp"

#include <iomanip>

namespace icstack {

std::ostream& operator<<(std::ostream& os, const Value& v) {
  if (v.is_null()) return os << "⊥";
  bool printable = true;
  for (unsigned char c : v.bytes()) {
    if (c < 0x20 || c > 0x7e) printable = false;
  }
  if (printable) return os << '"' << v.bytes() << '"';
  os << "0x";
  const auto flags = os.flags();
  for (unsigned char c : v.bytes()) os << std::hex << std::setw(2) << std::setfill('0') << int(c);
  os.flags(flags);
  return os;
}

bool ResultVector::complete() const {
  for (bool f : final_) {
    if (!f) return false;
  }
  return true;
}

void ResultVector::set(NodeId i, Value v) {
  if (final_.at(i.idx())) {
    throw ProtocolMisuse("ResultVector: slot " + std::to_string(i.value) + " is already final");
  }
  slots_.at(i.idx()) = std::move(v);
}

void ResultVector::finalize(NodeId i, Value v) {
  set(i, std::move(v));
  final_[i.idx()] = true;
}

std::ostream& operator<<(std::ostream& os, const ResultVector& v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v.values()[i];
  }
  return os << ']';
}

}  // namespace icstack
