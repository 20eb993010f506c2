#pragma once

// Node lifecycle of the overlay: joins with cluster activation and symlinks,
// ID exchanges, departures with substitute promotion and ring election, and
// accounting of every message the protocol sends.
//
// The model separates real membership from head duty. A node always belongs
// to the cluster its real ID falls in; a head position (cluster head ID) may
// be held by any node, in which case the holder carries that head ID as a
// symlink. Lookups addressed to either ID reach the right holder with at most
// one forwarding step.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bsrone/geometry.hpp"
#include "bsrone/selection.hpp"
#include "bsrone/tables.hpp"

namespace bsrone {

enum class Role : std::uint8_t { regular, super, supreme, substitute };

std::string_view role_name(Role r);

struct NodeRecord {
  NodeId real_id;
  std::optional<NodeId> symlink_id;  ///< head position held without owning it
  Role role = Role::regular;
  AttributeVector attrs;
  double joined_at = 0.0;

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

enum class MessageKind : std::uint8_t {
  join_request,
  join_accept,
  id_exchange,
  super_node_update,
  replacement_query,
  replacement_answer,
  substitute_sync,
  substitute_promotion,
  lookup_request,
  lookup_reply,
};

inline constexpr std::size_t kMessageKinds = 10;

std::string_view message_kind_name(MessageKind k);
std::optional<MessageKind> parse_message_kind(std::string_view name);

/// Messages that every other head receives.
constexpr bool is_broadcast_class(MessageKind k) {
  return k == MessageKind::super_node_update || k == MessageKind::substitute_promotion;
}

/// One entry of the ring election table.
struct Proposal {
  NodeId head;
  NodeId candidate;
  double score = 0.0;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct Message {
  MessageKind kind{};
  NodeId from;
  NodeId to;
  /// Departed head for replacement traffic, moved head for exchanges.
  std::optional<NodeId> subject;
  /// Election table carried by ReplacementQuery / ReplacementAnswer.
  std::vector<Proposal> proposals;

  friend bool operator==(const Message&, const Message&) = default;
};

using SignalCounts = std::array<std::uint64_t, kMessageKinds>;

std::uint64_t broadcast_total(const SignalCounts& c);
std::uint64_t total(const SignalCounts& c);

/// Per-phase message counters; monotone within a run.
class SignalCounter {
 public:
  void set_phase(std::string phase);
  const std::string& phase() const noexcept { return phase_; }

  void add(MessageKind k, std::uint64_t n = 1);

  SignalCounts totals() const;
  SignalCounts phase_totals(const std::string& phase) const;
  const std::map<std::string, SignalCounts>& by_phase() const noexcept { return counts_; }

 private:
  std::string phase_ = "default";
  std::map<std::string, SignalCounts> counts_;
};

struct ProtocolOptions {
  CriteriaWeights weights{CriteriaVector{0.25, 0.25, 0.25, 0.25}};
  /// Raw bounds; the exchange count is turned into a benefit internally.
  CriteriaBounds bounds{{10.0, 7200.0, 10.0, 10.0}, {1.0, 300.0, 0.0, 0.0}};
  TopsisVariant variant = TopsisVariant::weighted;
  std::size_t substitute_count = 1;
  /// Substitutes kept by the head that serves as a section's supreme-node.
  std::size_t supreme_backup_count = 2;
  /// Time a newly designated substitute needs before it can take over.
  double substitute_sync_delay = 0.0;
  /// Score time on network as elapsed session time instead of the stored value.
  bool session_time_criterion = false;
  bool record_messages = true;
  bool record_trace = false;
};

enum class JoinStatus : std::uint8_t { accepted, id_collision, cluster_full };

struct JoinResult {
  JoinStatus status = JoinStatus::accepted;
  bool activated_cluster = false;
  bool became_head = false;
  std::optional<NodeId> displaced;  ///< real ID of the head replaced by exchange
};

enum class LeaveStatus : std::uint8_t { regular, head, unknown };

struct LeaveResult {
  LeaveStatus status = LeaveStatus::unknown;
  std::optional<NodeId> successor;  ///< node holding the departed head position afterwards
  bool election_exchange = false;
  bool cluster_failed = false;      ///< head left without a ready substitute
  bool cluster_deactivated = false;
};

struct LookupResult {
  bool found = false;
  std::uint32_t inter_cluster_hops = 0;
  std::uint32_t inter_section_hops = 0;
  std::uint32_t forwarding_steps = 0;
  std::optional<NodeId> holder;  ///< real ID of the node holding the target's data
};

/// One replayable protocol event with the signals it produced.
struct TraceRecord {
  enum class Kind : std::uint8_t { join, leave, refresh, exchange, lookup };
  double time = 0.0;
  Kind kind{};
  NodeId actor;
  std::optional<NodeId> other;  ///< bootstrap (join), partner (exchange), target (lookup)
  std::optional<AttributeVector> attrs;
  SignalCounts signals{};

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

std::string_view trace_kind_name(TraceRecord::Kind k);
std::optional<TraceRecord::Kind> parse_trace_kind(std::string_view name);

struct FailureCounts {
  std::uint64_t orphaned = 0;  ///< head left, members remained, no ready substitute
  std::uint64_t emptied = 0;   ///< head left and nobody remained to serve the cluster
  std::uint64_t total() const { return orphaned + emptied; }
};

/// Complete overlay state. Owned by one event loop; copyable for independent runs.
class Network {
 public:
  explicit Network(NetworkGeometry geometry, ProtocolOptions options = {});

  const NetworkGeometry& geometry() const noexcept { return geometry_; }
  const ProtocolOptions& options() const noexcept { return options_; }

  double now() const noexcept { return now_; }
  /// Moves the clock forward; time never goes backwards.
  void advance_clock(double t);

  // --- membership operations ---------------------------------------------

  /// `bootstrap` is the head position the newcomer contacts first; defaults to
  /// the lowest active head.
  JoinResult join(NodeId id, const AttributeVector& attrs, std::optional<NodeId> bootstrap = std::nullopt);
  LeaveResult leave(NodeId id);

  /// Moves head duty between a head holder and a non-head node. Throws
  /// protocol_error unless exactly one of them holds a head position.
  void id_exchange(NodeId a, NodeId b);

  /// Re-scores a non-head member after an attribute report and exchanges it
  /// with the weakest head if it now outranks it. Returns true on exchange.
  bool promote_on_improvement(NodeId id, const AttributeVector& new_attrs);

  /// Re-designates the substitutes of the cluster headed at `head`.
  void maintain_substitute(NodeId head);

  LookupResult lookup(NodeId origin, NodeId target);

  // --- queries -----------------------------------------------------------

  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  const NodeRecord& node(NodeId id) const;
  const std::map<NodeId, NodeRecord>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  const ActivationMap& activation() const noexcept { return activation_; }
  /// Real ID of the node holding the head position of `cluster`.
  std::optional<NodeId> head_of_cluster(std::uint64_t cluster) const;
  /// Head position (cluster head ID) a node holds, if any.
  std::optional<NodeId> head_position_of(NodeId real_id) const;
  std::vector<NodeId> active_head_positions() const;
  std::vector<NodeId> substitutes_of(std::uint64_t cluster) const;
  /// Present real IDs of a cluster, including a native head.
  const std::set<NodeId>& members_of(std::uint64_t cluster) const;
  std::optional<NodeId> supreme_of(std::uint64_t section) const;

  SearchTable search_table(NodeId head_position) const;
  RoutingTable routing_table(NodeId head_position) const;

  /// Effective attributes used for scoring (session time substituted when enabled).
  AttributeVector effective_attrs(NodeId id) const;

  const SignalCounter& signals() const noexcept { return signals_; }
  SignalCounter& signals() noexcept { return signals_; }
  const std::vector<Message>& messages() const noexcept { return messages_; }
  void clear_messages() { messages_.clear(); }
  const std::vector<TraceRecord>& trace() const noexcept { return trace_; }

  std::uint64_t exchange_count() const noexcept { return exchanges_; }
  const FailureCounts& failures() const noexcept { return failures_; }

  /// Every head has processed the latest update of every scope it belongs to.
  bool routing_views_fresh() const;

  /// Structural invariants; empty when the state is consistent.
  std::vector<std::string> check_invariants() const;

 private:
  struct ClusterState {
    std::set<NodeId> members;
    std::optional<NodeId> head;  // real ID of the holder
    std::vector<NodeId> substitutes;
    std::map<NodeId, double> ready_at;
    std::uint64_t seen_version = 0;
  };

  struct Scores {
    std::vector<NodeId> ids;
    std::vector<double> closeness;
  };

  std::size_t scope_of(std::uint64_t cluster) const;
  std::vector<std::uint64_t> active_clusters_in_scope(std::size_t scope) const;
  std::vector<std::uint64_t> active_clusters() const;

  Scores score_ids(const std::vector<NodeId>& ids) const;
  std::vector<NodeId> eligible_members(std::uint64_t cluster) const;
  std::optional<std::pair<NodeId, double>> best_eligible(std::uint64_t cluster) const;
  /// Head cluster with the lowest closeness when scored together with `challenger`,
  /// if the challenger strictly beats it.
  std::optional<std::uint64_t> beaten_head(NodeId challenger);

  void emit(MessageKind kind, NodeId from, NodeId to, std::optional<NodeId> subject = std::nullopt,
            std::vector<Proposal> proposals = {});
  void announce(std::uint64_t cluster, MessageKind kind);
  void announce_supremes(std::uint64_t section);

  void install_head(std::uint64_t cluster, NodeId real_id);
  void clear_head(std::uint64_t cluster);
  void activate(std::uint64_t cluster, NodeId real_id);
  void deactivate(std::uint64_t cluster);
  void refresh_supreme(std::uint64_t section);
  void vacate(std::uint64_t cluster, LeaveResult& result);
  void run_election(std::uint64_t cluster, LeaveResult& result);
  void exchange_into(std::uint64_t cluster, NodeId newcomer);
  void redesignate(std::uint64_t cluster, bool sync);
  void drop_substitute(NodeId id);

  std::uint64_t cluster_index_of_head(NodeId real_id) const;
  void record(TraceRecord::Kind kind, NodeId actor, std::optional<NodeId> other,
              std::optional<AttributeVector> attrs, const SignalCounts& before);

  NetworkGeometry geometry_;
  ProtocolOptions options_;
  CriteriaBounds benefit_bounds_;
  double now_ = 0.0;

  std::map<NodeId, NodeRecord> nodes_;
  std::map<NodeId, std::uint64_t> heading_;  // real ID -> cluster index it heads
  std::vector<ClusterState> clusters_;
  ActivationMap activation_;
  std::vector<std::optional<NodeId>> supremes_;  // per section, real ID
  std::vector<std::uint64_t> supreme_seen_;
  std::vector<std::uint64_t> scope_version_;  // per scope; last entry is the supreme ring

  SignalCounter signals_;
  std::vector<Message> messages_;
  std::vector<TraceRecord> trace_;
  std::uint64_t exchanges_ = 0;
  FailureCounts failures_;
};

}  // namespace bsrone
