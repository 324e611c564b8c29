#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace icstack {

/// Primitives with closed-form message counts for graceful runs, i.e. runs
/// in which every consensus instance decides in its first phase.
enum class Primitive { MU, RBB, CB, BC_RBB, MC_RBB, IC_BC_RBB, IC_MC_RBB };

[[nodiscard]] std::string_view to_string(Primitive p);
[[nodiscard]] std::optional<Primitive> primitive_from_string(std::string_view s);

[[nodiscard]] std::uint64_t expected_messages(Primitive p, std::uint64_t n);

/// Signature generations plus verifications.
[[nodiscard]] std::uint64_t expected_signature_ops(Primitive p, std::uint64_t n);

/// (t+1) rounds, each an all-to-all exchange.
[[nodiscard]] std::uint64_t expected_pease_messages(std::uint64_t n, std::uint64_t t);

}  // namespace icstack
