#pragma once

// Integer geometry of the identifier ring: clusters, sections, head IDs and
// the activation bookkeeping shared by every other module.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace bsrone {

/// Position on the identifier ring, always in [0, 2^ring_exp).
struct NodeId {
  std::uint64_t value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }

/// Shape of the ring. Fixed for the lifetime of a network.
///
/// The ring holds 2^ring_exp IDs split into clusters of 2^cluster_exp IDs.
/// In scalable mode it is additionally split into sections of 2^section_exp
/// IDs, each a whole number of clusters.
class NetworkGeometry {
 public:
  static constexpr unsigned kMaxRingExp = 62;

  NetworkGeometry(unsigned ring_exp, unsigned cluster_exp,
                  std::optional<unsigned> section_exp = std::nullopt);

  unsigned ring_exp() const noexcept { return ring_exp_; }
  unsigned cluster_exp() const noexcept { return cluster_exp_; }
  std::optional<unsigned> section_exp() const noexcept { return section_exp_; }
  bool scalable() const noexcept { return section_exp_.has_value(); }

  std::uint64_t ring_size() const noexcept { return std::uint64_t{1} << ring_exp_; }
  std::uint64_t half_ring() const noexcept { return ring_size() >> 1; }
  std::uint64_t cluster_size() const noexcept { return std::uint64_t{1} << cluster_exp_; }
  std::uint64_t cluster_count() const noexcept { return std::uint64_t{1} << (ring_exp_ - cluster_exp_); }

  /// Throws mode_error in default mode.
  std::uint64_t section_size() const;
  std::uint64_t section_count() const;
  std::uint64_t clusters_per_section() const;

  bool contains(NodeId id) const noexcept { return id.value < ring_size(); }
  void check(NodeId id) const;

  NodeId wrap(std::uint64_t raw) const noexcept { return NodeId{raw & (ring_size() - 1)}; }
  NodeId advance(NodeId id, std::uint64_t by) const noexcept { return wrap(id.value + by); }
  NodeId retreat(NodeId id, std::uint64_t by) const noexcept {
    return wrap(id.value + ring_size() - (by & (ring_size() - 1)));
  }

  /// Steps needed to walk clockwise (increasing IDs) from `from` to `to`.
  std::uint64_t clockwise_distance(NodeId from, NodeId to) const noexcept {
    return (to.value - from.value) & (ring_size() - 1);
  }
  std::uint64_t counterclockwise_distance(NodeId from, NodeId to) const noexcept {
    return clockwise_distance(to, from);
  }
  std::uint64_t ring_distance(NodeId a, NodeId b) const noexcept;

  friend bool operator==(const NetworkGeometry&, const NetworkGeometry&) = default;

 private:
  unsigned ring_exp_;
  unsigned cluster_exp_;
  std::optional<unsigned> section_exp_;
};

std::uint64_t cluster_of(NodeId id, const NetworkGeometry& g);
NodeId cluster_head(NodeId id, const NetworkGeometry& g);
NodeId cluster_head_at(std::uint64_t cluster, const NetworkGeometry& g);

std::uint64_t section_of(NodeId id, const NetworkGeometry& g);
NodeId section_head(NodeId id, const NetworkGeometry& g);
NodeId section_head_at(std::uint64_t section, const NetworkGeometry& g);

/// Every cluster head in increasing order.
std::vector<NodeId> cluster_heads(const NetworkGeometry& g);
std::vector<NodeId> section_heads(const NetworkGeometry& g);

/// Which clusters and sections currently have a claimed head position.
class ActivationMap {
 public:
  explicit ActivationMap(const NetworkGeometry& g);

  static ActivationMap all_active(const NetworkGeometry& g);

  bool cluster_active(std::uint64_t cluster) const;
  bool section_active(std::uint64_t section) const;
  bool cluster_active_at(NodeId id, const NetworkGeometry& g) const {
    return cluster_active(cluster_of(id, g));
  }
  bool section_active_at(NodeId id, const NetworkGeometry& g) const {
    return section_active(section_of(id, g));
  }

  void set_cluster(std::uint64_t cluster, bool active);
  void set_section(std::uint64_t section, bool active);

  std::uint64_t cluster_count() const noexcept { return clusters_.size(); }
  std::uint64_t section_count() const noexcept { return sections_.size(); }
  std::uint64_t active_cluster_count() const noexcept { return active_clusters_; }
  std::uint64_t active_section_count() const noexcept { return active_sections_; }

  friend bool operator==(const ActivationMap&, const ActivationMap&) = default;

 private:
  std::vector<bool> clusters_;
  std::vector<bool> sections_;
  std::uint64_t active_clusters_ = 0;
  std::uint64_t active_sections_ = 0;
};

}  // namespace bsrone

template <>
struct std::hash<bsrone::NodeId> {
  std::size_t operator()(bsrone::NodeId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
