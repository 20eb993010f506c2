#include "bsrone/tables.hpp"

#include <algorithm>
#include <sstream>

#include "bsrone/errors.hpp"

namespace bsrone {

std::size_t SearchTable::occupied() const {
  return static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(), [](const auto& s) { return s.has_value(); }));
}

bool SearchTable::contains(NodeId id) const {
  return std::any_of(slots.begin(), slots.end(), [id](const auto& s) { return s == id; });
}

SearchTable build_search_table(NodeId owner, std::span<const NodeId> members, const NetworkGeometry& g) {
  if (cluster_head(owner, g) != owner) throw domain_error("search table owner must be a cluster head");
  SearchTable table{owner, std::vector<std::optional<NodeId>>(g.cluster_size() - 1)};
  for (NodeId m : members) {
    if (cluster_head(m, g) != owner || m == owner) {
      std::ostringstream msg;
      msg << "member " << m << " is not a non-head member of cluster " << owner;
      throw domain_error(msg.str());
    }
    table.slots[m.value - owner.value - 1] = m;
  }
  return table;
}

const RoutingEntry* RoutingTable::find(NodeId head) const {
  auto it = std::find_if(entries.begin(), entries.end(), [head](const RoutingEntry& e) { return e.head == head; });
  return it == entries.end() ? nullptr : &*it;
}

RoutingTable build_default_routing_table(NodeId owner, const ActivationMap& activation,
                                         const NetworkGeometry& g) {
  if (cluster_head(owner, g) != owner) throw domain_error("routing table owner must be a cluster head");
  RoutingTable table{owner, {}};
  const auto count = g.cluster_count();
  const auto first = cluster_of(owner, g);
  table.entries.reserve(count - 1);
  for (std::uint64_t k = 1; k < count; ++k) {
    const auto c = (first + k) % count;
    table.entries.push_back({cluster_head_at(c, g), activation.cluster_active(c)});
  }
  return table;
}

RoutingTable build_section_routing_table(NodeId owner, const ActivationMap& activation,
                                         const NetworkGeometry& g) {
  if (cluster_head(owner, g) != owner) throw domain_error("routing table owner must be a cluster head");
  RoutingTable table{owner, {}};
  const auto per_section = g.clusters_per_section();
  const auto base = section_of(owner, g) * per_section;
  const auto first = cluster_of(owner, g) - base;
  for (std::uint64_t k = 1; k < per_section; ++k) {
    const auto c = base + (first + k) % per_section;
    table.entries.push_back({cluster_head_at(c, g), activation.cluster_active(c)});
  }
  return table;
}

std::vector<std::uint64_t> supreme_offsets(const NetworkGeometry& g) {
  const auto s = g.section_size();
  const auto half = g.half_ring();
  if (s >= half) return {half};  // at most two sections: only the antipode
  const auto quarter = half / 2;
  std::vector<std::uint64_t> out;
  for (auto p = s; p < quarter; p <<= 1) out.push_back(p);
  out.push_back(quarter);
  for (auto p = s; quarter + p < half; p <<= 1) out.push_back(quarter + p);
  out.push_back(half);
  return out;
}

SupremeTables build_supreme_tables(NodeId owner, const NetworkGeometry& g) {
  if (section_head(owner, g) != owner) throw domain_error("supreme tables owner must be a section head");
  SupremeTables t{owner, {}, {}, std::nullopt, std::nullopt};
  if (g.section_count() < 2) return t;
  for (auto off : supreme_offsets(g)) {
    const auto cw = g.advance(owner, off);
    const auto ccw = g.retreat(owner, off);
    t.clockwise.push_back({cw, cw});
    t.counterclockwise.push_back({ccw, ccw});
  }
  t.successor = g.advance(owner, g.section_size());
  t.predecessor = g.retreat(owner, g.section_size());
  return t;
}

namespace {

// Walk from `from` toward `owner` in steps of one section (backward = counterclockwise).
NodeId walk_to_active(NodeId from, NodeId owner, bool backward, const ActivationMap& activation,
                      const NetworkGeometry& g) {
  const auto step = g.section_size();
  NodeId at = from;
  while (at != owner) {
    if (activation.section_active_at(at, g)) return at;
    at = backward ? g.retreat(at, step) : g.advance(at, step);
  }
  return owner;
}

struct Candidate {
  NodeId hop;
  std::uint64_t remaining;
  bool clockwise;
};

}  // namespace

SupremeTables resolve_fallbacks(const SupremeTables& tables, const ActivationMap& activation,
                                const NetworkGeometry& g) {
  SupremeTables out = tables;
  for (auto& e : out.clockwise) e.hop = walk_to_active(e.target, out.owner, true, activation, g);
  for (auto& e : out.counterclockwise) e.hop = walk_to_active(e.target, out.owner, false, activation, g);
  out.successor.reset();
  out.predecessor.reset();
  if (g.section_count() > 1) {
    // Nearest active head on each side, found by walking away from the owner.
    const auto step = g.section_size();
    for (NodeId at = g.advance(tables.owner, step); at != tables.owner; at = g.advance(at, step)) {
      if (activation.section_active_at(at, g)) {
        out.successor = at;
        break;
      }
    }
    for (NodeId at = g.retreat(tables.owner, step); at != tables.owner; at = g.retreat(at, step)) {
      if (activation.section_active_at(at, g)) {
        out.predecessor = at;
        break;
      }
    }
  }
  return out;
}

std::optional<NodeId> try_next_hop(NodeId current, NodeId target, const SupremeTables& tables,
                                   const NetworkGeometry& g) {
  const NodeId goal = section_head(target, g);
  if (goal == current) return current;

  const auto cw_goal = g.clockwise_distance(current, goal);
  const auto ccw_goal = g.counterclockwise_distance(current, goal);

  std::optional<Candidate> best;
  auto consider = [&](NodeId hop, bool clockwise) {
    if (hop == current) return;
    const auto travelled = clockwise ? g.clockwise_distance(current, hop) : g.counterclockwise_distance(current, hop);
    if (travelled > (clockwise ? cw_goal : ccw_goal)) return;  // would overshoot
    const Candidate c{hop, g.ring_distance(hop, goal), clockwise};
    if (!best || c.remaining < best->remaining ||
        (c.remaining == best->remaining && c.clockwise && !best->clockwise)) {
      best = c;
    }
  };
  // Only the table facing the nearer side of the ring is consulted; the
  // antipode counts as clockwise.
  if (cw_goal <= ccw_goal) {
    for (const auto& e : tables.clockwise) consider(e.hop, true);
    if (tables.successor) consider(*tables.successor, true);
  } else {
    for (const auto& e : tables.counterclockwise) consider(e.hop, false);
    if (tables.predecessor) consider(*tables.predecessor, false);
  }

  if (!best || best->remaining >= g.ring_distance(current, goal)) return std::nullopt;
  return best->hop;
}

NodeId next_hop(NodeId current, NodeId target, const SupremeTables& tables, const NetworkGeometry& g) {
  if (auto hop = try_next_hop(current, target, tables, g)) return *hop;
  std::ostringstream msg;
  msg << "no table entry of " << current << " moves closer to " << target;
  throw routing_failure(msg.str());
}

SupremeRouter::SupremeRouter(const NetworkGeometry& g, const ActivationMap& activation)
    : geometry_(g), by_section_(g.section_count()) {
  for (std::uint64_t s = 0; s < g.section_count(); ++s) {
    if (!activation.section_active(s)) continue;
    const auto head = section_head_at(s, g);
    active_heads_.push_back(head);
    by_section_[s] = resolve_fallbacks(build_supreme_tables(head, g), activation, g);
  }
}

const SupremeTables& SupremeRouter::tables(NodeId head) const {
  const auto& t = by_section_.at(section_of(head, geometry_));
  if (!t || t->owner != head) throw domain_error("no supreme tables for an inactive section head");
  return *t;
}

Route SupremeRouter::route(NodeId from_head, NodeId target) const {
  Route r;
  r.path.push_back(from_head);
  const NodeId goal = section_head(target, geometry_);
  NodeId at = from_head;
  // Each hop strictly reduces the distance, so the walk is bounded by the ring.
  while (at != goal) {
    auto hop = try_next_hop(at, goal, tables(at), geometry_);
    if (!hop || *hop == at) break;
    at = *hop;
    r.path.push_back(at);
  }
  r.reached = at == goal;
  return r;
}

}  // namespace bsrone
