#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "icstack/broadcast/message.hpp"

namespace icstack::wire {

/// Length-prefixed tagged encoding; layout in docs/wire-format.md.
[[nodiscard]] std::string encode(const Message& m);

/// Returns nullopt on any truncation, unknown tag or trailing garbage.
[[nodiscard]] std::optional<Message> decode(std::string_view bytes);

}  // namespace icstack::wire
