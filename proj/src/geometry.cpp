#include "bsrone/geometry.hpp"

#include <sstream>
#include <string>

#include "bsrone/errors.hpp"

namespace bsrone {

NetworkGeometry::NetworkGeometry(unsigned ring_exp, unsigned cluster_exp,
                                 std::optional<unsigned> section_exp)
    : ring_exp_(ring_exp), cluster_exp_(cluster_exp), section_exp_(section_exp) {
  if (ring_exp == 0 || ring_exp > kMaxRingExp) {
    throw domain_error("ring exponent must be in [1, " + std::to_string(kMaxRingExp) + "]");
  }
  if (cluster_exp == 0 || cluster_exp > ring_exp) {
    throw domain_error("cluster exponent must satisfy 0 < x <= n");
  }
  // Divisibility of 2^n by 2^x follows from x <= n.
  if (section_exp && (*section_exp < cluster_exp || *section_exp > ring_exp)) {
    throw domain_error("section exponent must satisfy x <= s <= n");
  }
}

std::uint64_t NetworkGeometry::section_size() const {
  if (!section_exp_) throw mode_error("geometry has no sections (default mode)");
  return std::uint64_t{1} << *section_exp_;
}

std::uint64_t NetworkGeometry::section_count() const {
  if (!section_exp_) throw mode_error("geometry has no sections (default mode)");
  return std::uint64_t{1} << (ring_exp_ - *section_exp_);
}

std::uint64_t NetworkGeometry::clusters_per_section() const {
  if (!section_exp_) throw mode_error("geometry has no sections (default mode)");
  return std::uint64_t{1} << (*section_exp_ - cluster_exp_);
}

void NetworkGeometry::check(NodeId id) const {
  if (!contains(id)) {
    std::ostringstream msg;
    msg << "node id " << id.value << " outside ring of size " << ring_size();
    throw range_error(msg.str());
  }
}

std::uint64_t NetworkGeometry::ring_distance(NodeId a, NodeId b) const noexcept {
  const auto cw = clockwise_distance(a, b);
  const auto ccw = ring_size() - cw;
  return cw == 0 ? 0 : (cw < ccw ? cw : ccw);
}

std::uint64_t cluster_of(NodeId id, const NetworkGeometry& g) {
  g.check(id);
  return id.value >> g.cluster_exp();
}

NodeId cluster_head(NodeId id, const NetworkGeometry& g) {
  return NodeId{cluster_of(id, g) << g.cluster_exp()};
}

NodeId cluster_head_at(std::uint64_t cluster, const NetworkGeometry& g) {
  if (cluster >= g.cluster_count()) throw range_error("cluster index out of range");
  return NodeId{cluster << g.cluster_exp()};
}

std::uint64_t section_of(NodeId id, const NetworkGeometry& g) {
  if (!g.scalable()) throw mode_error("section_of requires scalable mode");
  g.check(id);
  return id.value >> *g.section_exp();
}

NodeId section_head(NodeId id, const NetworkGeometry& g) {
  return NodeId{section_of(id, g) << *g.section_exp()};
}

NodeId section_head_at(std::uint64_t section, const NetworkGeometry& g) {
  if (section >= g.section_count()) throw range_error("section index out of range");
  return NodeId{section << *g.section_exp()};
}

std::vector<NodeId> cluster_heads(const NetworkGeometry& g) {
  std::vector<NodeId> heads;
  heads.reserve(g.cluster_count());
  for (std::uint64_t c = 0; c < g.cluster_count(); ++c) heads.push_back(NodeId{c << g.cluster_exp()});
  return heads;
}

std::vector<NodeId> section_heads(const NetworkGeometry& g) {
  std::vector<NodeId> heads;
  heads.reserve(g.section_count());
  for (std::uint64_t s = 0; s < g.section_count(); ++s) heads.push_back(NodeId{s << *g.section_exp()});
  return heads;
}

ActivationMap::ActivationMap(const NetworkGeometry& g)
    : clusters_(g.cluster_count(), false), sections_(g.scalable() ? g.section_count() : 0, false) {}

ActivationMap ActivationMap::all_active(const NetworkGeometry& g) {
  ActivationMap map(g);
  for (std::uint64_t c = 0; c < map.cluster_count(); ++c) map.set_cluster(c, true);
  for (std::uint64_t s = 0; s < map.section_count(); ++s) map.set_section(s, true);
  return map;
}

bool ActivationMap::cluster_active(std::uint64_t cluster) const {
  if (cluster >= clusters_.size()) throw range_error("cluster index out of range");
  return clusters_[cluster];
}

bool ActivationMap::section_active(std::uint64_t section) const {
  if (section >= sections_.size()) throw range_error("section index out of range");
  return sections_[section];
}

void ActivationMap::set_cluster(std::uint64_t cluster, bool active) {
  if (cluster >= clusters_.size()) throw range_error("cluster index out of range");
  if (clusters_[cluster] == active) return;
  clusters_[cluster] = active;
  active ? ++active_clusters_ : --active_clusters_;
}

void ActivationMap::set_section(std::uint64_t section, bool active) {
  if (section >= sections_.size()) throw range_error("section index out of range");
  if (sections_[section] == active) return;
  sections_[section] = active;
  active ? ++active_sections_ : --active_sections_;
}

}  // namespace bsrone
