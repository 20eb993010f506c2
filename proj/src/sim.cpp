#include "bsrone/sim.hpp"

#include <algorithm>
#include <deque>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "bsrone/errors.hpp"
#include "json.hpp"

namespace bsrone {

// --- engine ----------------------------------------------------------------------

void EventQueue::push(double time, EventKind kind, NodeId id) {
  if (time < last_) throw domain_error("event scheduled in the past");
  heap_.push(Event{time, pushed_++, kind, id});
}

Event EventQueue::pop() {
  if (heap_.empty()) throw domain_error("pop from an empty event queue");
  Event e = heap_.top();
  heap_.pop();
  ++popped_;
  last_ = e.time;
  return e;
}

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(salt),
                    static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

AttributeVector AttributeModel::draw(std::mt19937_64& rng) const {
  AttributeVector a;
  if (bandwidth_log_sigma > 0.0) {
    a.bandwidth = std::lognormal_distribution<double>(bandwidth_log_mean, bandwidth_log_sigma)(rng);
  } else {
    a.bandwidth = std::exp(bandwidth_log_mean);
  }
  a.time_on_network = session_fixed ? session_mean : std::exponential_distribution<double>(1.0 / session_mean)(rng);
  a.id_exchanges = 0;
  a.willingness = std::uniform_int_distribution<std::uint32_t>(willingness_min, willingness_max)(rng);
  return a;
}

// --- configuration ------------------------------------------------------------------

void SimConfig::validate() const {
  if (ring_exp == 0 || ring_exp > 20) throw domain_error("ring_exp must be in [1, 20]");
  const std::uint64_t ring = std::uint64_t{1} << ring_exp;
  if (cluster_sizes.empty()) throw domain_error("at least one cluster size is required");
  for (auto c : cluster_sizes) {
    if (!std::has_single_bit(c) || c < 2 || c > ring) throw domain_error("cluster sizes must be powers of two in [2, 2^n]");
  }
  if (!std::has_single_bit(section_size) || section_size < 2) throw domain_error("section_size must be a power of two");
  if (initial_population > ring) throw domain_error("initial population exceeds the ring");
  if (target_population > ring) throw domain_error("target population exceeds the ring");
  if (sync_delay < 0 || refresh_interval <= 0) throw domain_error("times must be non-negative");
  if (snapshot_every == 0 || cohort_size == 0) throw domain_error("snapshot and cohort sizes must be positive");
  if (!(attributes.bandwidth_log_sigma >= 0) || !(attributes.session_mean > 0) || attributes.willingness_max > 10 ||
      attributes.willingness_min > attributes.willingness_max) {
    throw domain_error("attribute model parameters out of range");
  }
  CriteriaWeights{weights};
  bounds.validate();
  protocol_options();
}

ProtocolOptions SimConfig::protocol_options() const {
  ProtocolOptions o;
  o.weights = CriteriaWeights{weights};
  o.bounds = bounds;
  o.variant = variant;
  o.substitute_count = substitutes;
  o.supreme_backup_count = supreme_backups;
  o.substitute_sync_delay = sync_delay;
  o.session_time_criterion = session_time_criterion;
  o.record_messages = false;
  o.record_trace = record_trace;
  return o;
}

SimConfig default_config(const std::string& experiment) {
  SimConfig c;
  c.experiment = experiment;
  if (experiment == "route") {
    c.ring_exp = 11;
    c.cluster_sizes = {4};
    c.steps = 6;
  } else if (experiment == "join-overhead") {
    c.initial_population = 20;
    c.batch_start = 17;
    c.batch_step = 2;
  } else if (experiment == "leave-overhead") {
    c.initial_population = 120;
    c.batch_start = 100;
    c.batch_step = 100;
    c.replenish = true;
  } else if (experiment == "fault") {
    c.ring_exp = 12;
    c.initial_population = 4096;
    c.departures = 4000;
    c.snapshot_every = 500;
  } else if (experiment == "stability") {
    c.cluster_sizes = {4};
    c.initial_population = 50;
    c.target_population = 100;
    c.weights = {0.1, 0.7, 0.1, 0.1};
  } else {
    throw domain_error("unknown experiment '" + experiment + "'");
  }
  return c;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <class T>
std::string join_list(const T& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ',';
    out += fmt(static_cast<double>(v));
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& c) {
  return {
      {"experiment", c.experiment},
      {"seed", std::to_string(c.seed)},
      {"ring_exp", std::to_string(c.ring_exp)},
      {"cluster_sizes", join_list(c.cluster_sizes)},
      {"section_size", std::to_string(c.section_size)},
      {"initial_population", std::to_string(c.initial_population)},
      {"steps", std::to_string(c.steps)},
      {"batch_start", std::to_string(c.batch_start)},
      {"batch_step", std::to_string(c.batch_step)},
      {"messages_per_step", std::to_string(c.messages_per_step)},
      {"replenish", c.replenish ? "true" : "false"},
      {"weights", join_list(c.weights)},
      {"bounds_upper", join_list(c.bounds.upper)},
      {"bounds_lower", join_list(c.bounds.lower)},
      {"variant", c.variant == TopsisVariant::weighted ? "weighted" : "literal"},
      {"substitutes", std::to_string(c.substitutes)},
      {"supreme_backups", std::to_string(c.supreme_backups)},
      {"sync_delay", fmt(c.sync_delay)},
      {"session_time_criterion", c.session_time_criterion ? "true" : "false"},
      {"bandwidth_log_mean", fmt(c.attributes.bandwidth_log_mean)},
      {"bandwidth_log_sigma", fmt(c.attributes.bandwidth_log_sigma)},
      {"session_mean", fmt(c.attributes.session_mean)},
      {"session_fixed", c.attributes.session_fixed ? "true" : "false"},
      {"willingness_min", std::to_string(c.attributes.willingness_min)},
      {"willingness_max", std::to_string(c.attributes.willingness_max)},
      {"snapshot_every", std::to_string(c.snapshot_every)},
      {"departures", std::to_string(c.departures)},
      {"target_population", std::to_string(c.target_population)},
      {"refresh_interval", fmt(c.refresh_interval)},
      {"cohort_size", std::to_string(c.cohort_size)},
      {"cohorts", std::to_string(c.cohorts)},
  };
}

// --- shared helpers ---------------------------------------------------------------------

namespace {

unsigned exponent_of(std::uint64_t power_of_two) { return static_cast<unsigned>(std::countr_zero(power_of_two)); }

std::size_t batch_of(const SimConfig& c, std::size_t step) { return c.batch_start + (step - 1) * c.batch_step; }

/// Every ring ID in a seeded random order.
std::vector<NodeId> shuffled_ids(std::uint64_t ring, std::mt19937_64& rng) {
  std::vector<NodeId> ids(ring);
  for (std::uint64_t v = 0; v < ring; ++v) ids[v] = NodeId{v};
  std::shuffle(ids.begin(), ids.end(), rng);
  return ids;
}

/// Applies queued membership events to one network.
class Driver {
 public:
  Driver(Network& net, const SimConfig& cfg, std::uint64_t salt)
      : net_(net),
        model_(cfg.attributes),
        attrs_(make_stream(cfg.seed, Stream::attributes, salt)),
        boot_(make_stream(cfg.seed, Stream::bootstrap, salt)) {}

  EventQueue& queue() { return queue_; }

  /// Processes events up to and including time `until`.
  void run(double until = std::numeric_limits<double>::infinity()) {
    while (!queue_.empty() && queue_.next_time() <= until) apply(queue_.pop());
  }

  std::uint64_t applied() const { return applied_; }
  std::uint64_t departed() const { return departed_; }

 private:
  void apply(const Event& e) {
    net_.advance_clock(e.time);
    switch (e.kind) {
      case EventKind::join: {
        std::optional<NodeId> contact;
        const auto heads = net_.active_head_positions();
        if (!heads.empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, heads.size() - 1);
          contact = heads[pick(boot_)];
        }
        if (net_.join(e.id, model_.draw(attrs_), contact).status == JoinStatus::accepted) ++applied_;
        break;
      }
      case EventKind::leave:
        if (net_.leave(e.id).status != LeaveStatus::unknown) {
          ++applied_;
          ++departed_;
        }
        break;
      default:
        break;
    }
  }

  Network& net_;
  AttributeModel model_;
  std::mt19937_64 attrs_;
  std::mt19937_64 boot_;
  EventQueue queue_;
  std::uint64_t applied_ = 0;
  std::uint64_t departed_ = 0;
};

std::uint64_t signal(const SignalCounts& c, MessageKind k) { return c[static_cast<std::size_t>(k)]; }

void keep_trace(Metrics& m, const Network& net) {
  if (net.options().record_trace) m.trace.push_back({net.geometry(), net.options(), net.trace()});
}

}  // namespace

// --- experiments ---------------------------------------------------------------------------

Metrics run_routing_experiment(const SimConfig& cfg) {
  cfg.validate();
  Metrics m;
  m.experiment = "route";
  if (cfg.record_trace) m.notices.push_back("routing runs on the tables alone, so the trace is empty");
  const unsigned s = exponent_of(cfg.section_size);
  const unsigned x = std::min(exponent_of(cfg.cluster_sizes.front()), s);
  auto rng = make_stream(cfg.seed, Stream::lookups);
  for (std::size_t k = 0; k <= cfg.steps; ++k) {
    const unsigned n = s + static_cast<unsigned>(k);
    const NetworkGeometry g(n, x, s);
    if (g.section_count() < 2) {
      m.notices.push_back("step " + std::to_string(k) + " skipped: fewer than 2 active sections");
      continue;
    }
    const SupremeRouter router(g, ActivationMap::all_active(g));
    const auto& heads = router.active_heads();
    std::uniform_int_distribution<std::size_t> pick(0, heads.size() - 1);
    RoutingStep step{k, g.section_count(), cfg.messages_per_step, 0.0, 0};
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < cfg.messages_per_step; ++i) {
      const auto a = pick(rng);
      auto b = pick(rng);
      while (b == a) b = pick(rng);
      const auto r = router.route(heads[a], heads[b]);
      if (!r.reached) throw routing_failure("fully active network failed to route");
      total += r.hops();
      step.max_hops = std::max(step.max_hops, r.hops());
      ++m.events_processed;
    }
    step.mean_hops = cfg.messages_per_step ? static_cast<double>(total) / cfg.messages_per_step : 0.0;
    m.routing.push_back(step);
  }
  return m;
}

Metrics run_join_overhead(const SimConfig& cfg) {
  cfg.validate();
  Metrics m;
  m.experiment = "join-overhead";
  for (auto c : cfg.cluster_sizes) {
    const NetworkGeometry g(cfg.ring_exp, exponent_of(c));
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
      // Same IDs and attributes for every cluster size at a given step.
      Network net(g, cfg.protocol_options());
      Driver driver(net, cfg, k);
      auto id_rng = make_stream(cfg.seed, Stream::ids, k);
      const auto order = shuffled_ids(g.ring_size(), id_rng);
      const auto batch = batch_of(cfg, k);
      const auto wanted = std::min<std::size_t>(cfg.initial_population + batch, order.size());
      double t = 0;
      net.signals().set_phase("setup");
      for (std::size_t i = 0; i < std::min(cfg.initial_population, wanted); ++i) driver.queue().push(t++, EventKind::join, order[i]);
      driver.run();
      const auto exchanges_before = net.exchange_count();
      const auto applied_before = driver.applied();
      net.signals().set_phase("join");
      for (std::size_t i = cfg.initial_population; i < wanted; ++i) driver.queue().push(t++, EventKind::join, order[i]);
      driver.run();
      const auto s = net.signals().phase_totals("join");
      m.overhead.push_back({c, k, batch, static_cast<std::size_t>(driver.applied() - applied_before), broadcast_total(s),
                            signal(s, MessageKind::replacement_query) + signal(s, MessageKind::replacement_answer),
                            total(s), net.exchange_count() - exchanges_before});
      m.events_processed += driver.queue().popped();
      if (!net.check_invariants().empty()) throw protocol_error("invariant violated: " + net.check_invariants().front());
      keep_trace(m, net);
    }
  }
  return m;
}

Metrics run_leave_overhead(const SimConfig& cfg) {
  cfg.validate();
  Metrics m;
  m.experiment = "leave-overhead";
  for (auto c : cfg.cluster_sizes) {
    const NetworkGeometry g(cfg.ring_exp, exponent_of(c));
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
      Network net(g, cfg.protocol_options());
      Driver driver(net, cfg, k);
      auto id_rng = make_stream(cfg.seed, Stream::ids, k);
      const auto order = shuffled_ids(g.ring_size(), id_rng);
      double t = 0;
      net.signals().set_phase("setup");
      for (std::size_t i = 0; i < cfg.initial_population; ++i) driver.queue().push(t++, EventKind::join, order[i]);
      driver.run();
      t += cfg.sync_delay;

      // Departures drawn from the present population in a seeded order.
      std::vector<NodeId> present(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.initial_population));
      auto churn = make_stream(cfg.seed, Stream::churn, k);
      std::shuffle(present.begin(), present.end(), churn);
      const auto batch = batch_of(cfg, k);
      if (batch > present.size() && !cfg.replenish) {
        m.notices.push_back("cluster " + std::to_string(c) + " step " + std::to_string(k) +
                            ": batch exceeds population, run ends when the network is empty");
      }
      const auto applied_before = driver.departed();
      const auto exchanges_before = net.exchange_count();
      if (!cfg.replenish) {
        net.signals().set_phase("leave");
        for (std::size_t i = 0; i < std::min(batch, present.size()); ++i) driver.queue().push(t++, EventKind::leave, present[i]);
        driver.run();
      } else {
        // Arrivals take unused IDs in the seeded order, departed IDs go to the
        // back of that queue. Arrival signals are booked under their own phase.
        std::deque<NodeId> free_ids(order.begin() + static_cast<std::ptrdiff_t>(cfg.initial_population), order.end());
        std::vector<NodeId> pool = present;
        for (std::size_t i = 0; i < batch && !pool.empty(); ++i) {
          std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
          const auto j = pick(churn);
          const NodeId gone = pool[j];
          pool[j] = pool.back();
          pool.pop_back();
          net.signals().set_phase("leave");
          driver.queue().push(t++, EventKind::leave, gone);
          driver.run();
          free_ids.push_back(gone);
          const NodeId fresh = free_ids.front();
          free_ids.pop_front();
          net.signals().set_phase("refill");
          driver.queue().push(t++, EventKind::join, fresh);
          driver.run();
          if (net.contains(fresh)) pool.push_back(fresh);
        }
      }
      const auto s = net.signals().phase_totals("leave");
      m.overhead.push_back({c, k, batch, static_cast<std::size_t>(driver.departed() - applied_before), broadcast_total(s),
                            signal(s, MessageKind::replacement_query) + signal(s, MessageKind::replacement_answer),
                            total(s), net.exchange_count() - exchanges_before});
      m.events_processed += driver.queue().popped();
      if (!net.check_invariants().empty()) throw protocol_error("invariant violated: " + net.check_invariants().front());
      keep_trace(m, net);
    }
  }
  return m;
}

Metrics run_fault_tolerance(const SimConfig& cfg) {
  cfg.validate();
  Metrics m;
  m.experiment = "fault";
  const std::uint64_t ring = std::uint64_t{1} << cfg.ring_exp;
  for (auto c : cfg.cluster_sizes) {
    const NetworkGeometry g(cfg.ring_exp, exponent_of(c));
    Network net(g, cfg.protocol_options());
    Driver driver(net, cfg, 0);
    auto id_rng = make_stream(cfg.seed, Stream::ids);
    const auto order = shuffled_ids(ring, id_rng);
    const auto population = std::min<std::size_t>(cfg.initial_population, order.size());
    for (std::size_t i = 0; i < population; ++i) driver.queue().push(0.0, EventKind::join, order[i]);
    driver.run();

    // The departure sequence depends on the seed only, so runs that differ in
    // cluster size or substitute count lose the same nodes in the same order.
    std::vector<NodeId> leaving(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(population));
    std::sort(leaving.begin(), leaving.end());
    auto churn = make_stream(cfg.seed, Stream::churn);
    std::shuffle(leaving.begin(), leaving.end(), churn);
    const auto departures = std::min(cfg.departures, leaving.size());
    const double start = cfg.sync_delay + 1.0;
    for (std::size_t i = 0; i < departures; ++i) driver.queue().push(start + static_cast<double>(i), EventKind::leave, leaving[i]);

    m.faults.push_back({c, cfg.substitutes, 0, 0, 0, 0, net.activation().active_cluster_count()});
    for (std::size_t done = 0; done < departures;) {
      const auto next = std::min(departures, done + cfg.snapshot_every);
      driver.run(start + static_cast<double>(next - 1));
      done = next;
      const auto& f = net.failures();
      m.faults.push_back({c, cfg.substitutes, done, f.total(), f.orphaned, f.emptied, net.activation().active_cluster_count()});
    }
    m.events_processed += driver.queue().popped();
    if (!net.check_invariants().empty()) throw protocol_error("invariant violated: " + net.check_invariants().front());
    keep_trace(m, net);
  }
  return m;
}

Metrics run_stability(const SimConfig& cfg) {
  cfg.validate();
  Metrics m;
  m.experiment = "stability";
  const NetworkGeometry g(cfg.ring_exp, exponent_of(cfg.cluster_sizes.front()));
  Network net(g, cfg.protocol_options());
  auto id_rng = make_stream(cfg.seed, Stream::ids);
  auto attr_rng = make_stream(cfg.seed, Stream::attributes);
  auto boot_rng = make_stream(cfg.seed, Stream::bootstrap);

  std::vector<NodeId> free_ids = shuffled_ids(g.ring_size(), id_rng);
  std::map<NodeId, double> expiry;
  std::uint64_t retired_k = 0;
  auto k_total = [&] {
    std::uint64_t sum = retired_k;
    for (const auto& [id, rec] : net.nodes()) sum += rec.attrs.id_exchanges;
    return sum;
  };
  auto arrive = [&](NodeId id) {
    const auto attrs = cfg.attributes.draw(attr_rng);
    std::optional<NodeId> contact;
    const auto heads = net.active_head_positions();
    if (!heads.empty()) contact = heads[std::uniform_int_distribution<std::size_t>(0, heads.size() - 1)(boot_rng)];
    net.join(id, attrs, contact);
    expiry[id] = net.now() + attrs.time_on_network;
  };
  auto depart_earliest = [&] {
    auto it = std::min_element(expiry.begin(), expiry.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    const NodeId id = it->first;
    retired_k += net.node(id).attrs.id_exchanges;
    net.leave(id);
    expiry.erase(it);
    free_ids.push_back(id);
  };
  auto take_free = [&] {
    std::uniform_int_distribution<std::size_t> pick(0, free_ids.size() - 1);
    const auto i = pick(id_rng);
    const NodeId id = free_ids[i];
    free_ids[i] = free_ids.back();
    free_ids.pop_back();
    return id;
  };

  EventQueue queue;
  for (std::size_t i = 0; i < cfg.initial_population; ++i) arrive(take_free());
  const std::size_t arrivals = cfg.cohort_size * cfg.cohorts;
  for (std::size_t i = 1; i <= arrivals; ++i) queue.push(static_cast<double>(i), EventKind::join);
  for (double t = cfg.refresh_interval; t <= static_cast<double>(arrivals); t += cfg.refresh_interval) {
    queue.push(t, EventKind::refresh);
  }

  Cohort current{0, 0, 0, 0};
  auto exchanges_mark = net.exchange_count();
  auto k_mark = k_total();
  while (!queue.empty()) {
    const Event e = queue.pop();
    net.advance_clock(e.time);
    if (e.kind == EventKind::refresh) {
      std::vector<NodeId> members;
      for (const auto& [id, rec] : net.nodes()) {
        if (!net.head_position_of(id)) members.push_back(id);
      }
      for (NodeId id : members) {
        if (net.contains(id) && !net.head_position_of(id)) net.promote_on_improvement(id, net.node(id).attrs);
      }
      continue;
    }
    if (net.size() >= cfg.target_population || free_ids.empty()) depart_earliest();
    arrive(take_free());
    ++current.arrivals;
    if (current.arrivals == cfg.cohort_size) {
      current.exchanges = net.exchange_count() - exchanges_mark;
      current.k_increments = k_total() - k_mark;
      m.cohorts.push_back(current);
      current = Cohort{current.index + 1, 0, 0, 0};
      exchanges_mark = net.exchange_count();
      k_mark = k_total();
    }
  }
  m.events_processed = queue.popped();
  if (!net.check_invariants().empty()) throw protocol_error("invariant violated: " + net.check_invariants().front());
  keep_trace(m, net);
  return m;
}

Metrics run_experiment(const SimConfig& cfg) {
  if (cfg.experiment == "route") return run_routing_experiment(cfg);
  if (cfg.experiment == "join-overhead") return run_join_overhead(cfg);
  if (cfg.experiment == "leave-overhead") return run_leave_overhead(cfg);
  if (cfg.experiment == "fault") return run_fault_tolerance(cfg);
  if (cfg.experiment == "stability") return run_stability(cfg);
  throw domain_error("unknown experiment '" + cfg.experiment + "'");
}

// --- metrics views ------------------------------------------------------------------------

std::vector<Table> Metrics::tables() const {
  std::vector<Table> out;
  auto s = [](auto v) { return std::to_string(v); };
  if (!routing.empty()) {
    Table t{"hops", {"step", "sections", "messages", "mean_hops", "max_hops"}, {}};
    for (const auto& r : routing) t.rows.push_back({s(r.step), s(r.sections), s(r.messages), fmt(r.mean_hops), s(r.max_hops)});
    out.push_back(std::move(t));
  }
  if (!overhead.empty()) {
    Table t{"signals",
            {"cluster_size", "step", "batch", "applied", "broadcast_signals", "ring_hops", "total_messages", "exchanges"},
            {}};
    for (const auto& r : overhead) {
      t.rows.push_back({s(r.cluster_size), s(r.step), s(r.batch), s(r.applied), s(r.broadcast), s(r.ring_hops), s(r.total),
                        s(r.exchanges)});
    }
    out.push_back(std::move(t));
  }
  if (!faults.empty()) {
    Table t{"failed_clusters",
            {"cluster_size", "substitutes", "departures", "failed", "orphaned", "emptied", "active_clusters"},
            {}};
    for (const auto& r : faults) {
      t.rows.push_back({s(r.cluster_size), s(r.substitutes), s(r.departures), s(r.failed), s(r.orphaned), s(r.emptied),
                        s(r.active_clusters)});
    }
    out.push_back(std::move(t));
  }
  if (!cohorts.empty()) {
    Table t{"exchanges", {"cohort", "arrivals", "exchanges", "k_increments"}, {}};
    for (const auto& r : cohorts) t.rows.push_back({s(r.index), s(r.arrivals), s(r.exchanges), s(r.k_increments)});
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> Metrics::check() const {
  std::vector<std::string> bad;
  for (const auto& r : routing) {
    if (r.mean_hops > static_cast<double>(r.max_hops)) bad.push_back("mean hops above max at step " + std::to_string(r.step));
  }
  for (const auto& r : overhead) {
    if (r.broadcast + r.ring_hops > r.total) bad.push_back("signal classes exceed total");
    if (r.applied > r.batch) bad.push_back("more events applied than scheduled");
  }
  for (const auto& r : faults) {
    if (r.failed != r.orphaned + r.emptied) bad.push_back("failure classes do not add up");
  }
  for (const auto& r : cohorts) {
    if (r.k_increments != 2 * r.exchanges) bad.push_back("cohort " + std::to_string(r.index) + " K sum is not twice its exchanges");
  }
  return bad;
}

// --- output ---------------------------------------------------------------------------------

void write_csv(std::ostream& os, const Table& table, const SimConfig& cfg) {
  os << "# bsrone " << cfg.experiment << " / " << table.name << '\n';
  for (const auto& [k, v] : config_entries(cfg)) os << "# " << k << " = " << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

std::string summary_json(const Metrics& m, const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["experiment"] = m.experiment;
  j["seed"] = cfg.seed;
  auto& config = j["config"];
  for (const auto& [k, v] : config_entries(cfg)) config[k] = v;
  j["events_processed"] = m.events_processed;
  j["notices"] = m.notices;
  auto& agg = j["aggregates"];
  if (!m.routing.empty()) {
    const auto& last = m.routing.back();
    agg["final_sections"] = last.sections;
    agg["final_mean_hops"] = last.mean_hops;
    agg["final_max_hops"] = last.max_hops;
  }
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> per_cluster;
  for (const auto& r : m.overhead) {
    auto& p = per_cluster[r.cluster_size];
    p.first += r.broadcast;
    p.second += r.ring_hops;
  }
  for (const auto& [c, p] : per_cluster) {
    agg["cluster_" + std::to_string(c)] = {{"broadcast_signals", p.first}, {"ring_hops", p.second}};
  }
  for (const auto& r : m.faults) agg["cluster_" + std::to_string(r.cluster_size)]["failed_clusters"] = r.failed;
  if (!m.cohorts.empty()) {
    std::uint64_t total = 0;
    for (const auto& r : m.cohorts) total += r.exchanges;
    agg["total_exchanges"] = total;
    agg["last_cohort_exchanges"] = m.cohorts.back().exchanges;
  }
  if (agg.is_null()) agg = nlohmann::ordered_json::object();
  j["invariant_violations"] = m.check();
  return j.dump(2);
}

}  // namespace bsrone
