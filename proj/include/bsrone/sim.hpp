#pragma once

// Deterministic discrete-event harness and the four experiment families
// (routing, join/leave overhead, fault tolerance, stability).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bsrone/protocol.hpp"
#include "bsrone/trace.hpp"

namespace bsrone {

enum class EventKind : std::uint8_t { join, leave, refresh, lookup, snapshot };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;  ///< insertion order, breaks timestamp ties
  EventKind kind{};
  NodeId id;
};

/// Min-queue on (time, seq). Counts what goes in and out so that a run can
/// prove nothing was dropped.
class EventQueue {
 public:
  void push(double time, EventKind kind, NodeId id = {});
  Event pop();
  bool empty() const noexcept { return heap_.empty(); }
  /// Time of the next event; the queue must not be empty.
  double next_time() const { return heap_.top().time; }
  std::size_t size() const noexcept { return heap_.size(); }
  std::uint64_t pushed() const noexcept { return pushed_; }
  std::uint64_t popped() const noexcept { return popped_; }
  double last_time() const noexcept { return last_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t pushed_ = 0;
  std::uint64_t popped_ = 0;
  double last_ = 0.0;
};

/// Independent generator per concern, all derived from one seed.
enum class Stream : std::uint64_t { ids = 1, attributes, churn, lookups, bootstrap };

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream, std::uint64_t salt = 0);

struct AttributeModel {
  double bandwidth_log_mean = 1.5;   ///< log-normal location
  double bandwidth_log_sigma = 0.75; ///< log-normal scale; 0 gives a constant
  double session_mean = 3600.0;      ///< exponential mean
  bool session_fixed = false;        ///< every session lasts exactly session_mean
  std::uint32_t willingness_min = 0;
  std::uint32_t willingness_max = 10;

  AttributeVector draw(std::mt19937_64& rng) const;
};

struct SimConfig {
  std::string experiment = "route";
  std::uint64_t seed = 1;

  unsigned ring_exp = 7;
  std::vector<std::uint64_t> cluster_sizes{4, 8, 16, 32};
  std::uint64_t section_size = 32;

  std::size_t initial_population = 20;
  std::size_t steps = 5;
  /// Batch of step k (1-based) is batch_start + (k - 1) * batch_step.
  std::size_t batch_start = 10;
  std::size_t batch_step = 10;

  std::size_t messages_per_step = 1000;
  /// Leave overhead: every departure is followed by a fresh arrival, keeping
  /// the population constant so batches may exceed it.
  bool replenish = false;

  CriteriaVector weights{0.25, 0.25, 0.25, 0.25};
  CriteriaBounds bounds{{10.0, 7200.0, 10.0, 10.0}, {1.0, 300.0, 0.0, 0.0}};
  TopsisVariant variant = TopsisVariant::weighted;
  std::size_t substitutes = 1;
  std::size_t supreme_backups = 2;
  double sync_delay = 0.0;
  bool session_time_criterion = false;

  AttributeModel attributes;

  // Fault tolerance.
  std::size_t snapshot_every = 500;
  std::size_t departures = 4000;

  // Stability.
  std::size_t target_population = 100;
  double refresh_interval = 100.0;
  std::size_t cohort_size = 1000;
  std::size_t cohorts = 6;

  bool record_trace = false;

  /// Throws domain_error on inconsistent values.
  void validate() const;
  ProtocolOptions protocol_options() const;
};

/// Defaults tuned for each experiment family.
SimConfig default_config(const std::string& experiment);

/// Ordered key/value view of every field, as written into CSV headers.
std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& cfg);

// --- metrics -------------------------------------------------------------------

struct RoutingStep {
  std::size_t step = 0;
  std::uint64_t sections = 0;
  std::size_t messages = 0;
  double mean_hops = 0.0;
  std::size_t max_hops = 0;
};

struct OverheadStep {
  std::uint64_t cluster_size = 0;
  std::size_t step = 0;
  std::size_t batch = 0;
  std::size_t applied = 0;  ///< events that actually happened (joins accepted, nodes removed)
  std::uint64_t broadcast = 0;
  std::uint64_t ring_hops = 0;
  std::uint64_t total = 0;
  std::uint64_t exchanges = 0;
};

struct FaultSnapshot {
  std::uint64_t cluster_size = 0;
  std::size_t substitutes = 0;
  std::size_t departures = 0;
  std::uint64_t failed = 0;
  std::uint64_t orphaned = 0;
  std::uint64_t emptied = 0;
  std::uint64_t active_clusters = 0;
};

struct Cohort {
  std::size_t index = 0;
  std::size_t arrivals = 0;
  std::uint64_t exchanges = 0;
  std::uint64_t k_increments = 0;
};

/// Column-oriented table written as one CSV.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Metrics {
  std::string experiment;
  std::vector<RoutingStep> routing;
  std::vector<OverheadStep> overhead;
  std::vector<FaultSnapshot> faults;
  std::vector<Cohort> cohorts;
  std::vector<std::string> notices;
  std::uint64_t events_processed = 0;
  std::vector<TraceSegment> trace;  ///< one per network instance, filled when record_trace is set

  std::vector<Table> tables() const;
  /// Per-type invariants (mean <= max, counts consistent); empty when fine.
  std::vector<std::string> check() const;
};

Metrics run_routing_experiment(const SimConfig& cfg);
Metrics run_join_overhead(const SimConfig& cfg);
Metrics run_leave_overhead(const SimConfig& cfg);
Metrics run_fault_tolerance(const SimConfig& cfg);
Metrics run_stability(const SimConfig& cfg);

/// Dispatches on cfg.experiment.
Metrics run_experiment(const SimConfig& cfg);

// --- output ------------------------------------------------------------------------

/// CSV with a `#` header block holding every config entry.
void write_csv(std::ostream& os, const Table& table, const SimConfig& cfg);
std::string summary_json(const Metrics& m, const SimConfig& cfg);

}  // namespace bsrone
