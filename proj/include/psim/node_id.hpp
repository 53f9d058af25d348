#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>

namespace psim {

/// Opaque node identifier, stable for the node's lifetime.
struct NodeId {
  std::uint64_t value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
};

enum class NodeClass : std::uint8_t { Honest, Trusted, Byzantine, PoisonedTrusted };

constexpr bool is_byzantine(NodeClass c) { return c == NodeClass::Byzantine; }

/// Trusted and view-poisoned trusted nodes run the same enclave code.
constexpr bool is_trusted(NodeClass c) {
  return c == NodeClass::Trusted || c == NodeClass::PoisonedTrusted;
}

constexpr std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Honest: return "honest";
    case NodeClass::Trusted: return "trusted";
    case NodeClass::Byzantine: return "byzantine";
    case NodeClass::PoisonedTrusted: return "poisoned-trusted";
  }
  return "unknown";
}

}  // namespace psim

template <>
struct std::hash<psim::NodeId> {
  std::size_t operator()(const psim::NodeId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
