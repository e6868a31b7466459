#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ariel {

/// Dense integer identifier, tagged so node, link, entity and flow ids
/// cannot be mixed up.
template <class Tag>
struct Id {
  std::uint32_t value = std::numeric_limits<std::uint32_t>::max();

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  constexpr bool valid() const { return value != std::numeric_limits<std::uint32_t>::max(); }
  constexpr auto operator<=>(const Id&) const = default;
};

template <class Tag>
std::ostream& operator<<(std::ostream& os, Id<Tag> id) {
  return os << id.value;
}

struct NodeTag {};
struct LinkTag {};
struct EntityTag {};
struct FlowTag {};

using NodeId = Id<NodeTag>;
using LinkId = Id<LinkTag>;
using EntityId = Id<EntityTag>;
using FlowId = Id<FlowTag>;

/// Rates in bits per second.
using Bandwidth = double;

/// Slotted time index. The flood-event counter of the detector and the
/// simulator's round counter both use this type.
using Step = std::int64_t;

/// Ordered (origin, destination) node pair.
struct NodePair {
  NodeId from;
  NodeId to;
  constexpr auto operator<=>(const NodePair&) const = default;
};

enum class ErrorCode {
  Argument = 1,
  Parse,
  Structure,
  Config,
  Infeasible,
  Calibration,
  Io,
  Format,
  Ordering,
  Consistency,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ariel

template <class Tag>
struct std::hash<ariel::Id<Tag>> {
  std::size_t operator()(ariel::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

template <>
struct std::hash<ariel::NodePair> {
  std::size_t operator()(const ariel::NodePair& p) const noexcept {
    return (static_cast<std::size_t>(p.from.value) << 32) ^ p.to.value;
  }
};
