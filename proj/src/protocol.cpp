#include "bsrone/protocol.hpp"

#include <algorithm>
#include <sstream>

#include "bsrone/errors.hpp"

namespace bsrone {

namespace {

constexpr std::array<std::string_view, kMessageKinds> kKindNames = {
    "JoinRequest",     "JoinAccept",        "IdExchange",     "SuperNodeUpdate",     "ReplacementQuery",
    "ReplacementAnswer", "SubstituteSync", "SubstitutePromotion", "LookupRequest", "LookupReply"};

constexpr std::array<std::string_view, 5> kTraceNames = {"join", "leave", "refresh", "exchange", "lookup"};

std::string describe(NodeId id) {
  std::ostringstream os;
  os << id;
  return os.str();
}

}  // namespace

std::string_view role_name(Role r) {
  switch (r) {
    case Role::regular: return "regular";
    case Role::super: return "super";
    case Role::supreme: return "supreme";
    case Role::substitute: return "substitute";
  }
  return "?";
}

std::string_view message_kind_name(MessageKind k) { return kKindNames.at(static_cast<std::size_t>(k)); }

std::optional<MessageKind> parse_message_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<MessageKind>(i);
  }
  return std::nullopt;
}

std::string_view trace_kind_name(TraceRecord::Kind k) { return kTraceNames.at(static_cast<std::size_t>(k)); }

std::optional<TraceRecord::Kind> parse_trace_kind(std::string_view name) {
  for (std::size_t i = 0; i < kTraceNames.size(); ++i) {
    if (kTraceNames[i] == name) return static_cast<TraceRecord::Kind>(i);
  }
  return std::nullopt;
}

std::uint64_t broadcast_total(const SignalCounts& c) {
  return c[static_cast<std::size_t>(MessageKind::super_node_update)] +
         c[static_cast<std::size_t>(MessageKind::substitute_promotion)];
}

std::uint64_t total(const SignalCounts& c) {
  std::uint64_t sum = 0;
  for (auto v : c) sum += v;
  return sum;
}

void SignalCounter::set_phase(std::string phase) { phase_ = std::move(phase); }

void SignalCounter::add(MessageKind k, std::uint64_t n) { counts_[phase_][static_cast<std::size_t>(k)] += n; }

SignalCounts SignalCounter::totals() const {
  SignalCounts sum{};
  for (const auto& [phase, counts] : counts_) {
    for (std::size_t i = 0; i < kMessageKinds; ++i) sum[i] += counts[i];
  }
  return sum;
}

SignalCounts SignalCounter::phase_totals(const std::string& phase) const {
  auto it = counts_.find(phase);
  return it == counts_.end() ? SignalCounts{} : it->second;
}

// ---------------------------------------------------------------------------

Network::Network(NetworkGeometry geometry, ProtocolOptions options)
    : geometry_(geometry),
      options_(std::move(options)),
      benefit_bounds_(benefit_bounds(options_.bounds)),
      clusters_(geometry.cluster_count()),
      activation_(geometry) {
  options_.bounds.validate();
  benefit_bounds_.validate();
  if (options_.substitute_count == 0) throw domain_error("substitute count must be at least 1");
  if (options_.supreme_backup_count == 0) throw domain_error("supreme backup count must be at least 1");
  if (options_.substitute_sync_delay < 0) throw domain_error("substitute sync delay must be >= 0");
  if (geometry_.scalable()) {
    supremes_.resize(geometry_.section_count());
    supreme_seen_.resize(geometry_.section_count(), 0);
    scope_version_.resize(geometry_.section_count() + 1, 0);
  } else {
    scope_version_.resize(1, 0);
  }
}

void Network::advance_clock(double t) {
  if (t < now_) throw domain_error("simulation time cannot go backwards");
  now_ = t;
}

const NodeRecord& Network::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw domain_error("node " + describe(id) + " is not in the network");
  return it->second;
}

std::optional<NodeId> Network::head_of_cluster(std::uint64_t cluster) const { return clusters_.at(cluster).head; }

std::optional<NodeId> Network::head_position_of(NodeId real_id) const {
  auto it = heading_.find(real_id);
  if (it == heading_.end()) return std::nullopt;
  return cluster_head_at(it->second, geometry_);
}

std::vector<NodeId> Network::active_head_positions() const {
  std::vector<NodeId> out;
  for (auto c : active_clusters()) out.push_back(cluster_head_at(c, geometry_));
  return out;
}

std::vector<NodeId> Network::substitutes_of(std::uint64_t cluster) const { return clusters_.at(cluster).substitutes; }

const std::set<NodeId>& Network::members_of(std::uint64_t cluster) const { return clusters_.at(cluster).members; }

std::optional<NodeId> Network::supreme_of(std::uint64_t section) const {
  if (!geometry_.scalable()) throw mode_error("supreme-nodes exist only in scalable mode");
  return supremes_.at(section);
}

SearchTable Network::search_table(NodeId head_position) const {
  const auto c = cluster_of(head_position, geometry_);
  std::vector<NodeId> members;
  for (NodeId m : clusters_[c].members) {
    if (m != head_position) members.push_back(m);
  }
  return build_search_table(cluster_head_at(c, geometry_), members, geometry_);
}

RoutingTable Network::routing_table(NodeId head_position) const {
  return geometry_.scalable() ? build_section_routing_table(head_position, activation_, geometry_)
                              : build_default_routing_table(head_position, activation_, geometry_);
}

AttributeVector Network::effective_attrs(NodeId id) const {
  const auto& n = node(id);
  AttributeVector a = n.attrs;
  if (options_.session_time_criterion) a.time_on_network = now_ - n.joined_at;
  return a;
}

// --- scopes ------------------------------------------------------------------

std::size_t Network::scope_of(std::uint64_t cluster) const {
  if (!geometry_.scalable()) return 0;
  return static_cast<std::size_t>(cluster / geometry_.clusters_per_section());
}

std::vector<std::uint64_t> Network::active_clusters() const {
  std::vector<std::uint64_t> out;
  out.reserve(heading_.size());
  for (std::uint64_t c = 0; c < clusters_.size(); ++c) {
    if (clusters_[c].head) out.push_back(c);
  }
  return out;
}

std::vector<std::uint64_t> Network::active_clusters_in_scope(std::size_t scope) const {
  if (!geometry_.scalable()) return active_clusters();
  std::vector<std::uint64_t> out;
  const auto per = geometry_.clusters_per_section();
  for (std::uint64_t c = scope * per; c < (scope + 1) * per; ++c) {
    if (clusters_[c].head) out.push_back(c);
  }
  return out;
}

// --- scoring -----------------------------------------------------------------

Network::Scores Network::score_ids(const std::vector<NodeId>& ids) const {
  Scores s{ids, {}};
  if (ids.empty()) return s;
  std::vector<AttributeVector> attrs;
  attrs.reserve(ids.size());
  for (NodeId id : ids) attrs.push_back(effective_attrs(id));
  const auto d = build_decision_matrix(attrs, options_.bounds);
  s.closeness = score(d, options_.weights, benefit_bounds_, {options_.variant, ZeroColumnPolicy::neutral}).values;
  return s;
}

std::vector<NodeId> Network::eligible_members(std::uint64_t cluster) const {
  std::vector<NodeId> out;
  for (NodeId m : clusters_[cluster].members) {
    if (!heading_.count(m)) out.push_back(m);
  }
  return out;
}

std::optional<std::pair<NodeId, double>> Network::best_eligible(std::uint64_t cluster) const {
  const auto eligible = eligible_members(cluster);
  if (eligible.empty()) return std::nullopt;
  const auto s = score_ids(eligible);
  const auto order = rank(s.closeness, s.ids);
  return std::pair{s.ids[order.front()], s.closeness[order.front()]};
}

std::optional<std::uint64_t> Network::beaten_head(NodeId challenger) {
  const auto heads = active_clusters_in_scope(scope_of(cluster_of(challenger, geometry_)));
  if (heads.empty()) return std::nullopt;
  std::vector<NodeId> ids{challenger};
  for (auto c : heads) ids.push_back(*clusters_[c].head);
  const auto s = score_ids(ids);
  const auto order = rank(s.closeness, s.ids);
  // Weakest head: last head in rank order.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (*it == 0) continue;
    if (s.closeness[0] > s.closeness[*it]) return heads[*it - 1];
    return std::nullopt;
  }
  return std::nullopt;
}

// --- messaging -----------------------------------------------------------------

void Network::emit(MessageKind kind, NodeId from, NodeId to, std::optional<NodeId> subject,
                   std::vector<Proposal> proposals) {
  signals_.add(kind);
  if (options_.record_messages) messages_.push_back({kind, from, to, subject, std::move(proposals)});
}

void Network::announce(std::uint64_t cluster, MessageKind kind) {
  const auto scope = scope_of(cluster);
  const auto version = ++scope_version_[scope];
  const auto from = cluster_head_at(cluster, geometry_);
  clusters_[cluster].seen_version = version;
  for (auto c : active_clusters_in_scope(scope)) {
    if (c == cluster) continue;
    emit(kind, from, cluster_head_at(c, geometry_));
    clusters_[c].seen_version = version;
  }
}

void Network::announce_supremes(std::uint64_t section) {
  const auto version = ++scope_version_.back();
  const auto from = section_head_at(section, geometry_);
  supreme_seen_[section] = version;
  for (std::uint64_t s = 0; s < supremes_.size(); ++s) {
    if (s == section || !supremes_[s]) continue;
    emit(MessageKind::super_node_update, from, section_head_at(s, geometry_));
    supreme_seen_[s] = version;
  }
}

// --- head bookkeeping ----------------------------------------------------------

std::uint64_t Network::cluster_index_of_head(NodeId real_id) const { return heading_.at(real_id); }

void Network::install_head(std::uint64_t cluster, NodeId real_id) {
  drop_substitute(real_id);
  const auto position = cluster_head_at(cluster, geometry_);
  auto& n = nodes_.at(real_id);
  n.symlink_id = real_id == position ? std::nullopt : std::optional{position};
  n.role = Role::super;
  heading_[real_id] = cluster;
  clusters_[cluster].head = real_id;
}

void Network::clear_head(std::uint64_t cluster) {
  auto& st = clusters_[cluster];
  if (!st.head) return;
  auto it = nodes_.find(*st.head);
  if (it != nodes_.end()) {
    it->second.symlink_id.reset();
    it->second.role = Role::regular;
  }
  heading_.erase(*st.head);
  st.head.reset();
}

void Network::activate(std::uint64_t cluster, NodeId real_id) {
  activation_.set_cluster(cluster, true);
  install_head(cluster, real_id);
  if (geometry_.scalable()) refresh_supreme(scope_of(cluster));
}

void Network::deactivate(std::uint64_t cluster) {
  auto& st = clusters_[cluster];
  std::optional<NodeId> former = st.head;
  clear_head(cluster);
  for (NodeId s : st.substitutes) {
    auto it = nodes_.find(s);
    if (it != nodes_.end() && it->second.role == Role::substitute) it->second.role = Role::regular;
  }
  st.substitutes.clear();
  st.ready_at.clear();
  activation_.set_cluster(cluster, false);
  announce(cluster, MessageKind::super_node_update);
  if (geometry_.scalable()) refresh_supreme(scope_of(cluster));
  // A foreign holder goes back to being an ordinary member of its own cluster.
  if (former && nodes_.count(*former)) {
    const auto home = cluster_of(*former, geometry_);
    if (home != cluster) redesignate(home, false);
  }
}

void Network::refresh_supreme(std::uint64_t section) {
  std::optional<NodeId> holder;
  std::optional<std::uint64_t> holder_cluster;
  for (auto c : active_clusters_in_scope(section)) {
    holder = clusters_[c].head;
    holder_cluster = c;
    break;
  }
  const auto previous = supremes_[section];
  if (previous == holder) {
    if (holder) nodes_.at(*holder).role = Role::supreme;
    return;
  }
  std::optional<std::uint64_t> previous_cluster;
  if (previous && heading_.count(*previous)) {
    previous_cluster = heading_.at(*previous);
    nodes_.at(*previous).role = Role::super;
  }
  supremes_[section] = holder;
  activation_.set_section(section, holder.has_value());
  if (holder) nodes_.at(*holder).role = Role::supreme;
  announce_supremes(section);
  // Backup counts differ between plain and supreme clusters.
  if (previous_cluster && clusters_[*previous_cluster].head) redesignate(*previous_cluster, false);
  if (holder_cluster) redesignate(*holder_cluster, false);
}

void Network::drop_substitute(NodeId id) {
  auto& st = clusters_[cluster_of(id, geometry_)];
  auto it = std::find(st.substitutes.begin(), st.substitutes.end(), id);
  if (it == st.substitutes.end()) return;
  st.substitutes.erase(it);
  st.ready_at.erase(id);
  auto n = nodes_.find(id);
  if (n != nodes_.end() && n->second.role == Role::substitute) n->second.role = Role::regular;
}

void Network::redesignate(std::uint64_t cluster, bool sync) {
  auto& st = clusters_[cluster];
  if (!st.head) return;
  std::size_t wanted = options_.substitute_count;
  if (geometry_.scalable() && supremes_[scope_of(cluster)] == st.head) {
    wanted = std::max(wanted, options_.supreme_backup_count);
  }
  const auto eligible = eligible_members(cluster);
  std::vector<NodeId> chosen;
  if (eligible.size() <= 1) {
    chosen = eligible;
  } else {
    const auto s = score_ids(eligible);
    const auto order = rank(s.closeness, s.ids);
    for (std::size_t i = 0; i < order.size() && chosen.size() < wanted; ++i) chosen.push_back(s.ids[order[i]]);
  }
  if (chosen.size() > wanted) chosen.resize(wanted);

  std::map<NodeId, double> ready;
  std::vector<NodeId> fresh;
  for (NodeId id : chosen) {
    auto it = st.ready_at.find(id);
    if (it != st.ready_at.end()) {
      ready[id] = it->second;
    } else {
      ready[id] = now_ + options_.substitute_sync_delay;
      fresh.push_back(id);
    }
  }
  for (NodeId old : st.substitutes) {
    if (ready.count(old)) continue;
    auto n = nodes_.find(old);
    if (n != nodes_.end() && n->second.role == Role::substitute) n->second.role = Role::regular;
  }
  for (NodeId id : chosen) nodes_.at(id).role = Role::substitute;
  st.substitutes = chosen;
  st.ready_at = std::move(ready);

  const auto from = cluster_head_at(cluster, geometry_);
  for (NodeId id : chosen) {
    if (sync || std::find(fresh.begin(), fresh.end(), id) != fresh.end()) {
      emit(MessageKind::substitute_sync, from, id);
    }
  }
}

// --- exchanges and departures ----------------------------------------------------

void Network::exchange_into(std::uint64_t cluster, NodeId newcomer) {
  const auto position = cluster_head_at(cluster, geometry_);
  const NodeId old = *clusters_[cluster].head;
  clear_head(cluster);
  install_head(cluster, newcomer);
  ++nodes_.at(old).attrs.id_exchanges;
  ++nodes_.at(newcomer).attrs.id_exchanges;
  ++exchanges_;
  emit(MessageKind::id_exchange, position, newcomer, position);
  if (geometry_.scalable()) refresh_supreme(scope_of(cluster));
  announce(cluster, MessageKind::super_node_update);
  redesignate(cluster, true);
  const auto old_home = cluster_of(old, geometry_);
  if (old_home != cluster) redesignate(old_home, false);
}

void Network::run_election(std::uint64_t cluster, LeaveResult& result) {
  const auto position = cluster_head_at(cluster, geometry_);
  const NodeId incumbent = *clusters_[cluster].head;

  // Clockwise over active heads, starting after the vacated position.
  auto ring = active_clusters_in_scope(scope_of(cluster));
  std::vector<std::uint64_t> order;
  auto split = std::upper_bound(ring.begin(), ring.end(), cluster);
  order.insert(order.end(), split, ring.end());
  order.insert(order.end(), ring.begin(), split);
  order.erase(std::remove(order.begin(), order.end(), cluster), order.end());

  // The promotion broadcast wakes the successor head, which opens the ring;
  // every head appends its proposal and the last one answers the substitute.
  std::vector<Proposal> table;
  auto payload = [&] { return options_.record_messages ? table : std::vector<Proposal>{}; };
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto head = cluster_head_at(order[i], geometry_);
    if (auto best = best_eligible(order[i])) table.push_back({head, best->first, best->second});
    if (i + 1 < order.size()) {
      emit(MessageKind::replacement_query, head, cluster_head_at(order[i + 1], geometry_), position, payload());
    } else {
      emit(MessageKind::replacement_answer, head, position, position, payload());
    }
  }

  if (!table.empty()) {
    std::vector<NodeId> ids{incumbent};
    for (const auto& p : table) ids.push_back(p.candidate);
    const auto s = score_ids(ids);
    const auto winner = rank(s.closeness, s.ids).front();
    if (winner != 0 && s.closeness[winner] > s.closeness[0]) {
      const NodeId chosen = ids[winner];
      exchange_into(cluster, chosen);
      redesignate(cluster_of(chosen, geometry_), false);
      result.successor = chosen;
      result.election_exchange = true;
      return;
    }
  }
  // Final holder announcement: the substitute keeps the position.
  announce(cluster, MessageKind::super_node_update);
}

void Network::vacate(std::uint64_t cluster, LeaveResult& result) {
  auto& st = clusters_[cluster];
  std::optional<NodeId> ready;
  for (NodeId s : st.substitutes) {
    if (st.ready_at.at(s) <= now_) {
      ready = s;
      break;
    }
  }
  if (ready) {
    install_head(cluster, *ready);
    if (geometry_.scalable()) refresh_supreme(scope_of(cluster));
    announce(cluster, MessageKind::substitute_promotion);
    result.successor = *ready;
    run_election(cluster, result);
    if (!result.election_exchange) redesignate(cluster, true);
    return;
  }

  const auto eligible = eligible_members(cluster);
  if (!eligible.empty()) {
    ++failures_.orphaned;
    result.cluster_failed = true;
    NodeId best = eligible.front();
    if (eligible.size() > 1) {
      const auto s = score_ids(eligible);
      best = s.ids[rank(s.closeness, s.ids).front()];
    }
    install_head(cluster, best);
    if (geometry_.scalable()) refresh_supreme(scope_of(cluster));
    announce(cluster, MessageKind::super_node_update);
    redesignate(cluster, true);
    result.successor = best;
    return;
  }

  if (!st.members.empty()) {
    // Every remaining member serves another cluster; the lowest one comes home
    // and its foreign cluster goes through the same handover.
    ++failures_.orphaned;
    result.cluster_failed = true;
    const NodeId home = *st.members.begin();
    const auto foreign = heading_.at(home);
    clear_head(foreign);
    install_head(cluster, home);
    if (geometry_.scalable()) refresh_supreme(scope_of(cluster));
    announce(cluster, MessageKind::super_node_update);
    redesignate(cluster, true);
    result.successor = home;
    LeaveResult nested;
    vacate(foreign, nested);
    return;
  }

  ++failures_.emptied;
  result.cluster_failed = true;
  result.cluster_deactivated = true;
  deactivate(cluster);
}

// --- public operations ------------------------------------------------------------

void Network::record(TraceRecord::Kind kind, NodeId actor, std::optional<NodeId> other,
                     std::optional<AttributeVector> attrs, const SignalCounts& before) {
  if (!options_.record_trace) return;
  TraceRecord r{now_, kind, actor, other, attrs, {}};
  const auto after = signals_.totals();
  for (std::size_t i = 0; i < kMessageKinds; ++i) r.signals[i] = after[i] - before[i];
  trace_.push_back(std::move(r));
}

JoinResult Network::join(NodeId id, const AttributeVector& attrs, std::optional<NodeId> bootstrap) {
  geometry_.check(id);
  attrs.validate();
  const auto cluster = cluster_of(id, geometry_);
  auto& st = clusters_[cluster];
  JoinResult result;
  if (nodes_.count(id)) {
    result.status = st.members.size() == geometry_.cluster_size() ? JoinStatus::cluster_full : JoinStatus::id_collision;
    return result;
  }
  const auto before = signals_.totals();
  const bool empty_network = heading_.empty();

  std::optional<NodeId> contact;
  if (!empty_network) {
    contact = bootstrap ? *bootstrap : cluster_head_at(active_clusters().front(), geometry_);
    if (cluster_head(*contact, geometry_) != *contact || !clusters_[cluster_of(*contact, geometry_)].head) {
      throw protocol_error("bootstrap " + describe(*contact) + " is not an active head position");
    }
  }

  nodes_[id] = NodeRecord{id, std::nullopt, Role::regular, attrs, now_};
  st.members.insert(id);

  if (empty_network) {
    activate(cluster, id);
    announce(cluster, MessageKind::super_node_update);
    result.activated_cluster = true;
    result.became_head = true;
  } else {
    emit(MessageKind::join_request, id, *contact);
    if (!activation_.cluster_active(cluster)) {
      emit(MessageKind::join_accept, *contact, id);
      activate(cluster, id);
      announce(cluster, MessageKind::super_node_update);
      result.activated_cluster = true;
      result.became_head = true;
    } else {
      std::optional<std::uint64_t> target = beaten_head(id);
      if (target) {
        result.displaced = clusters_[*target].head;
        result.became_head = true;
        exchange_into(*target, id);
      }
      emit(MessageKind::join_accept, cluster_head_at(cluster, geometry_), id);
      if (!target || *target != cluster) redesignate(cluster, true);
    }
  }
  record(TraceRecord::Kind::join, id, contact, attrs, before);
  return result;
}

LeaveResult Network::leave(NodeId id) {
  LeaveResult result;
  if (!nodes_.count(id)) return result;  // unknown: no-op
  const auto before = signals_.totals();
  const auto home = cluster_of(id, geometry_);

  auto handle_member_loss = [&](std::uint64_t cluster) {
    if (!clusters_[cluster].head) return;
    if (clusters_[cluster].members.empty()) {
      result.cluster_deactivated = true;
      deactivate(cluster);
    } else {
      redesignate(cluster, true);
    }
  };

  auto heading = heading_.find(id);
  if (heading != heading_.end()) {
    result.status = LeaveStatus::head;
    const auto cluster = heading->second;
    clear_head(cluster);
    nodes_.erase(id);
    clusters_[home].members.erase(id);
    if (home != cluster) handle_member_loss(home);
    vacate(cluster, result);
  } else {
    result.status = LeaveStatus::regular;
    drop_substitute(id);
    nodes_.erase(id);
    clusters_[home].members.erase(id);
    handle_member_loss(home);
  }
  record(TraceRecord::Kind::leave, id, std::nullopt, std::nullopt, before);
  return result;
}

void Network::id_exchange(NodeId a, NodeId b) {
  if (!contains(a) || !contains(b)) throw protocol_error("id exchange between absent nodes");
  const bool a_head = heading_.count(a) != 0;
  const bool b_head = heading_.count(b) != 0;
  if (a_head == b_head) throw protocol_error("id exchange needs exactly one head holder");
  const auto before = signals_.totals();
  const NodeId holder = a_head ? a : b;
  const NodeId other = a_head ? b : a;
  const auto cluster = heading_.at(holder);
  exchange_into(cluster, other);
  redesignate(cluster_of(other, geometry_), false);
  record(TraceRecord::Kind::exchange, a, b, std::nullopt, before);
}

bool Network::promote_on_improvement(NodeId id, const AttributeVector& new_attrs) {
  auto& n = nodes_.at(id);
  if (heading_.count(id)) throw protocol_error("attribute refresh applies to non-head members only");
  new_attrs.validate();
  AttributeVector updated = new_attrs;
  updated.id_exchanges = n.attrs.id_exchanges;  // the protocol owns the exchange count
  const auto before = signals_.totals();
  if (updated == n.attrs && !options_.session_time_criterion) {
    record(TraceRecord::Kind::refresh, id, std::nullopt, updated, before);
    return false;
  }
  n.attrs = updated;
  bool exchanged = false;
  if (auto target = beaten_head(id)) {
    exchange_into(*target, id);
    redesignate(cluster_of(id, geometry_), false);
    exchanged = true;
  }
  record(TraceRecord::Kind::refresh, id, std::nullopt, updated, before);
  return exchanged;
}

void Network::maintain_substitute(NodeId head) {
  const auto cluster = cluster_of(head, geometry_);
  if (!clusters_[cluster].head) throw domain_error("cluster " + describe(head) + " is inactive");
  redesignate(cluster, false);
}

LookupResult Network::lookup(NodeId origin, NodeId target) {
  geometry_.check(target);
  if (!contains(origin)) throw domain_error("lookup origin " + describe(origin) + " is not in the network");
  const auto before = signals_.totals();
  LookupResult result;

  auto serving = heading_.find(origin);
  std::uint64_t at = serving != heading_.end() ? serving->second : cluster_of(origin, geometry_);
  const auto goal = cluster_of(target, geometry_);

  auto hop_to = [&](std::uint64_t next) {
    emit(MessageKind::lookup_request, cluster_head_at(at, geometry_), cluster_head_at(next, geometry_));
    ++result.inter_cluster_hops;
    at = next;
  };

  bool reachable = true;
  if (at != goal) {
    if (!geometry_.scalable() || scope_of(at) == scope_of(goal)) {
      if (clusters_[goal].head) hop_to(goal);
      else reachable = false;
    } else {
      const auto from_section = scope_of(at);
      const auto from_supreme = heading_.at(*supremes_[from_section]);
      if (at != from_supreme) hop_to(from_supreme);
      const SupremeRouter router(geometry_, activation_);
      const auto route = router.route(section_head_at(from_section, geometry_), target);
      for (std::size_t i = 1; i < route.path.size(); ++i) {
        const auto section = section_of(route.path[i], geometry_);
        hop_to(heading_.at(*supremes_[section]));
        ++result.inter_section_hops;
      }
      if (!route.reached) {
        reachable = false;
      } else if (at != goal) {
        if (clusters_[goal].head) hop_to(goal);
        else reachable = false;
      }
    }
  }

  if (reachable && clusters_[goal].head && contains(target)) {
    result.found = true;
    result.holder = target;
    const NodeId position = cluster_head_at(goal, geometry_);
    const bool symlinked_position = target == position && *clusters_[goal].head != target;
    const bool serving_elsewhere = heading_.count(target) && cluster_head_at(heading_.at(target), geometry_) != target;
    if (symlinked_position || serving_elsewhere) {
      ++result.forwarding_steps;
      emit(MessageKind::lookup_request, cluster_head_at(at, geometry_), target);
    }
    emit(MessageKind::lookup_reply, target, origin);
  }
  record(TraceRecord::Kind::lookup, origin, target, std::nullopt, before);
  return result;
}

// --- consistency ---------------------------------------------------------------------

bool Network::routing_views_fresh() const {
  for (std::uint64_t c = 0; c < clusters_.size(); ++c) {
    if (clusters_[c].head && clusters_[c].seen_version != scope_version_[scope_of(c)]) return false;
  }
  if (geometry_.scalable()) {
    for (std::uint64_t s = 0; s < supremes_.size(); ++s) {
      if (supremes_[s] && supreme_seen_[s] != scope_version_.back()) return false;
    }
  }
  return true;
}

std::vector<std::string> Network::check_invariants() const {
  std::vector<std::string> bad;
  auto fail = [&](std::string what) { bad.push_back(std::move(what)); };

  std::size_t active = 0;
  for (std::uint64_t c = 0; c < clusters_.size(); ++c) {
    const auto& st = clusters_[c];
    const auto position = cluster_head_at(c, geometry_);
    const bool on = activation_.cluster_active(c);
    if (on != st.head.has_value()) fail("cluster " + describe(position) + " activation disagrees with head");
    if (on != !st.members.empty()) fail("cluster " + describe(position) + " activation disagrees with membership");
    for (NodeId m : st.members) {
      if (!nodes_.count(m)) fail("cluster " + describe(position) + " lists absent member " + describe(m));
      if (cluster_of(m, geometry_) != c) fail("member " + describe(m) + " filed under wrong cluster");
    }
    if (st.head) {
      ++active;
      auto it = nodes_.find(*st.head);
      if (it == nodes_.end()) {
        fail("head of " + describe(position) + " is absent");
        continue;
      }
      const auto& n = it->second;
      if (heading_.count(*st.head) == 0 || heading_.at(*st.head) != c) fail("head index out of sync");
      const auto expected = n.real_id == position ? std::nullopt : std::optional{position};
      if (n.symlink_id != expected) fail("symlink of " + describe(n.real_id) + " does not match its head position");
      if (n.role != Role::super && n.role != Role::supreme) fail("head " + describe(n.real_id) + " has non-head role");
    } else if (!st.substitutes.empty()) {
      fail("inactive cluster " + describe(position) + " keeps substitutes");
    }
    for (NodeId s : st.substitutes) {
      auto it = nodes_.find(s);
      if (it == nodes_.end() || it->second.role != Role::substitute) fail("substitute " + describe(s) + " inconsistent");
      if (cluster_of(s, geometry_) != c) fail("substitute " + describe(s) + " outside its cluster");
    }
  }
  if (active != heading_.size()) fail("more head holders than active clusters");
  if (active != activation_.active_cluster_count()) fail("activation count out of sync");

  for (const auto& [id, n] : nodes_) {
    if (!clusters_[cluster_of(id, geometry_)].members.count(id)) fail("node " + describe(id) + " missing from its cluster");
    const bool heads = heading_.count(id) != 0;
    if (!heads && n.symlink_id) fail("non-head " + describe(id) + " holds a symlink");
    if (!heads && (n.role == Role::super || n.role == Role::supreme)) fail("non-head " + describe(id) + " has head role");
    if (n.role == Role::substitute) {
      const auto& st = clusters_[cluster_of(id, geometry_)];
      if (!st.head || std::find(st.substitutes.begin(), st.substitutes.end(), id) == st.substitutes.end()) {
        fail("substitute " + describe(id) + " shadows no live head");
      }
    }
  }

  if (geometry_.scalable()) {
    for (std::uint64_t s = 0; s < supremes_.size(); ++s) {
      const auto heads = active_clusters_in_scope(s);
      const bool on = activation_.section_active(s);
      if (on != !heads.empty()) fail("section activation disagrees with its clusters");
      if (on != supremes_[s].has_value()) fail("section activation disagrees with supreme claim");
      if (supremes_[s]) {
        if (clusters_[heads.front()].head != supremes_[s]) fail("supreme is not the first active head of its section");
        if (nodes_.at(*supremes_[s]).role != Role::supreme) fail("supreme holder lacks supreme role");
      }
    }
  }
  if (!routing_views_fresh()) fail("some head holds a stale routing view");
  return bad;
}

}  // namespace bsrone
