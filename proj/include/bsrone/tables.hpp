#pragma once

// Search tables (intra-cluster directory), default routing tables (one entry
// per other cluster head) and the bidirectional binary-search routing tables
// kept by supreme-nodes in scalable mode.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bsrone/geometry.hpp"

namespace bsrone {

/// Directory of a head's own cluster. Slot k stands for ID owner + k + 1.
struct SearchTable {
  NodeId owner;
  std::vector<std::optional<NodeId>> slots;

  std::size_t occupied() const;
  bool contains(NodeId id) const;

  friend bool operator==(const SearchTable&, const SearchTable&) = default;
};

/// `members` must lie in owner's cluster and exclude owner itself.
SearchTable build_search_table(NodeId owner, std::span<const NodeId> members, const NetworkGeometry& g);

struct RoutingEntry {
  NodeId head;
  bool active = false;

  friend bool operator==(const RoutingEntry&, const RoutingEntry&) = default;
};

/// Every other cluster head, clockwise from the owner's successor head.
/// The owner is implicit and never listed.
struct RoutingTable {
  NodeId owner;
  std::vector<RoutingEntry> entries;

  const RoutingEntry* find(NodeId head) const;

  friend bool operator==(const RoutingTable&, const RoutingTable&) = default;
};

RoutingTable build_default_routing_table(NodeId owner, const ActivationMap& activation,
                                         const NetworkGeometry& g);

/// Scalable mode: a head only tracks the other heads of its own section.
RoutingTable build_section_routing_table(NodeId owner, const ActivationMap& activation,
                                         const NetworkGeometry& g);

/// Clockwise offsets of a supreme-node's table entries, strictly increasing
/// and ending at half the ring. Counterclockwise entries reuse the same
/// magnitudes. Requires scalable mode.
std::vector<std::uint64_t> supreme_offsets(const NetworkGeometry& g);

struct SupremeEntry {
  NodeId target;  ///< raw section head at owner +/- offset
  NodeId hop;     ///< target, or its fallback when the target's section is inactive

  friend bool operator==(const SupremeEntry&, const SupremeEntry&) = default;
};

struct SupremeTables {
  NodeId owner;
  std::vector<SupremeEntry> clockwise;
  std::vector<SupremeEntry> counterclockwise;
  /// Nearest active section heads on either side; nullopt when the owner is alone.
  std::optional<NodeId> successor;
  std::optional<NodeId> predecessor;

  friend bool operator==(const SupremeTables&, const SupremeTables&) = default;
};

/// Raw tables, every hop equal to its target.
SupremeTables build_supreme_tables(NodeId owner, const NetworkGeometry& g);

/// Replaces inactive targets by the nearest active section head found by
/// walking from the target back toward the owner. Clockwise entries walk
/// counterclockwise and vice versa, so a fallback never overshoots its raw
/// target. With no active section in the way the hop becomes the owner.
SupremeTables resolve_fallbacks(const SupremeTables& tables, const ActivationMap& activation,
                                const NetworkGeometry& g);

/// Greedy inter-section step. Returns `current` when target lies in current's
/// section. Ties between directions go clockwise. Throws routing_failure when
/// no candidate strictly reduces the ring distance to the target's section head.
NodeId next_hop(NodeId current, NodeId target, const SupremeTables& tables, const NetworkGeometry& g);

/// Non-throwing variant; nullopt when routing is stuck.
std::optional<NodeId> try_next_hop(NodeId current, NodeId target, const SupremeTables& tables,
                                   const NetworkGeometry& g);

struct Route {
  std::vector<NodeId> path;  ///< section heads visited, starting with the source
  bool reached = false;      ///< last element is the target's section head

  std::size_t hops() const { return path.empty() ? 0 : path.size() - 1; }
};

/// Resolved supreme tables for every active section head of one activation
/// snapshot.
class SupremeRouter {
 public:
  SupremeRouter(const NetworkGeometry& g, const ActivationMap& activation);

  const SupremeTables& tables(NodeId section_head) const;
  Route route(NodeId from_head, NodeId target) const;

  const NetworkGeometry& geometry() const noexcept { return geometry_; }
  const std::vector<NodeId>& active_heads() const noexcept { return active_heads_; }

 private:
  NetworkGeometry geometry_;
  std::vector<NodeId> active_heads_;
  std::vector<std::optional<SupremeTables>> by_section_;
};

}  // namespace bsrone
