#include "icstack/core/complexity.hpp"

#include <array>
#include <utility>

namespace icstack {

namespace {

constexpr std::array<std::pair<Primitive, std::string_view>, 7> kNames{{
    {Primitive::MU, "MU"},
    {Primitive::RBB, "RBB"},
    {Primitive::CB, "CB"},
    {Primitive::BC_RBB, "BC_RBB"},
    {Primitive::MC_RBB, "MC_RBB"},
    {Primitive::IC_BC_RBB, "IC_BC_RBB"},
    {Primitive::IC_MC_RBB, "IC_MC_RBB"},
}};

}  // namespace

std::string_view to_string(Primitive p) {
  for (const auto& [k, name] : kNames) {
    if (k == p) return name;
  }
  return "?";
}

std::optional<Primitive> primitive_from_string(std::string_view s) {
  for (const auto& [k, name] : kNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

std::uint64_t expected_messages(Primitive p, std::uint64_t n) {
  const std::uint64_t n2 = n * n;
  const std::uint64_t n3 = n2 * n;
  const std::uint64_t n4 = n3 * n;
  switch (p) {
    case Primitive::MU: return n;
    case Primitive::RBB: return 2 * n2 + n;
    case Primitive::CB: return 3 * n;
    case Primitive::BC_RBB: return 6 * n3 + 3 * n2;
    case Primitive::MC_RBB: return 10 * n3 + 5 * n2;
    case Primitive::IC_BC_RBB: return 6 * n4 + 3 * n3 + 3 * n2;
    case Primitive::IC_MC_RBB: return 10 * n4 + 5 * n3 + n2;
  }
  return 0;
}

std::uint64_t expected_signature_ops(Primitive p, std::uint64_t n) {
  switch (p) {
    case Primitive::CB: return n * n + 2 * n;
    case Primitive::IC_BC_RBB: return n * n * n + 2 * n * n;
    default: return 0;
  }
}

std::uint64_t expected_pease_messages(std::uint64_t n, std::uint64_t t) { return (t + 1) * n * n; }

}  // namespace icstack
