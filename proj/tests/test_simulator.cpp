#include <gtest/gtest.h>

#include "json.hpp"
#include <sstream>

#include "bsrone/errors.hpp"
#include "bsrone/sim.hpp"
#include "bsrone/trace.hpp"

using namespace bsrone;

namespace {

std::string all_csv(const Metrics& m, const SimConfig& cfg) {
  std::ostringstream os;
  for (const auto& t : m.tables()) write_csv(os, t, cfg);
  return os.str();
}

SimConfig small(const std::string& experiment) {
  auto c = default_config(experiment);
  if (experiment == "fault") {
    c.ring_exp = 8;
    c.initial_population = 256;
    c.departures = 240;
    c.snapshot_every = 60;
  } else if (experiment == "stability") {
    c.cohort_size = 200;
    c.cohorts = 3;
  } else if (experiment == "route") {
    c.steps = 3;
    c.messages_per_step = 50;
  } else {
    c.steps = 2;
  }
  return c;
}

}  // namespace

TEST(EventQueue, PopsByTimeThenInsertionOrder) {
  EventQueue q;
  q.push(2.0, EventKind::leave, NodeId{1});
  q.push(1.0, EventKind::join, NodeId{2});
  q.push(2.0, EventKind::join, NodeId{3});
  q.push(1.0, EventKind::refresh, NodeId{4});
  std::vector<std::uint64_t> ids;
  double last = 0.0;
  while (!q.empty()) {
    const auto e = q.pop();
    EXPECT_GE(e.time, last);
    last = e.time;
    ids.push_back(e.id.value);
  }
  EXPECT_EQ(ids, (std::vector<std::uint64_t>{2, 4, 1, 3}));
  EXPECT_EQ(q.pushed(), 4u);
  EXPECT_EQ(q.popped(), 4u);
}

TEST(EventQueue, RejectsThePastAndEmptyPops) {
  EventQueue q;
  q.push(5.0, EventKind::join);
  q.pop();
  EXPECT_THROW(q.push(4.0, EventKind::join), domain_error);
  EXPECT_NO_THROW(q.push(5.0, EventKind::join));
  q.pop();
  EXPECT_THROW(q.pop(), domain_error);
}

TEST(EventQueue, AccountsForEveryEvent) {
  EventQueue q;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dt(0.0, 3.0);
  double t = 0;
  for (int round = 0; round < 50; ++round) {
    for (int i = 0; i < 5; ++i) q.push(t + dt(rng), EventKind::join);
    for (int i = 0; i < 3; ++i) t = q.pop().time;
    EXPECT_EQ(q.pushed(), q.popped() + q.size());
  }
}

TEST(Streams, IndependentAndReproducible) {
  auto a = make_stream(9, Stream::ids);
  auto b = make_stream(9, Stream::ids);
  auto c = make_stream(9, Stream::churn);
  auto d = make_stream(10, Stream::ids);
  auto e = make_stream(9, Stream::ids, 1);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  EXPECT_NE(x, e());
}

TEST(Attributes, DrawsStayInRange) {
  AttributeModel m;
  auto rng = make_stream(3, Stream::attributes);
  for (int i = 0; i < 1000; ++i) {
    const auto a = m.draw(rng);
    EXPECT_GT(a.bandwidth, 0.0);
    EXPECT_GE(a.time_on_network, 0.0);
    EXPECT_LE(a.willingness, 10u);
    EXPECT_EQ(a.id_exchanges, 0u);
  }
}

TEST(Attributes, DegenerateModelIsConstant) {
  AttributeModel m;
  m.bandwidth_log_sigma = 0;
  m.session_fixed = true;
  m.willingness_min = m.willingness_max = 5;
  auto rng = make_stream(3, Stream::attributes);
  const auto first = m.draw(rng);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(m.draw(rng), first);
}

TEST(Config, ValidationRejectsBadValues) {
  auto c = default_config("join-overhead");
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.initial_population = 1000;
  EXPECT_THROW(bad.validate(), domain_error);
  bad = c;
  bad.cluster_sizes = {6};
  EXPECT_THROW(bad.validate(), domain_error);
  bad = c;
  bad.weights = {0.5, 0.5, 0.5, 0.5};
  EXPECT_THROW(bad.validate(), domain_error);
  bad = c;
  bad.sync_delay = -1;
  EXPECT_THROW(bad.validate(), domain_error);
  EXPECT_THROW(default_config("nonsense"), domain_error);
}

TEST(Config, EntriesCoverSeedAndExperiment) {
  auto c = default_config("fault");
  c.seed = 77;
  const auto entries = config_entries(c);
  std::map<std::string, std::string> m(entries.begin(), entries.end());
  EXPECT_EQ(m.at("seed"), "77");
  EXPECT_EQ(m.at("experiment"), "fault");
  EXPECT_EQ(m.at("ring_exp"), "12");
  EXPECT_EQ(m.size(), entries.size());
}

TEST(Routing, SkipsSingleSectionStepsAndKeepsMeanBelowMax) {
  const auto cfg = small("route");
  const auto m = run_routing_experiment(cfg);
  ASSERT_FALSE(m.notices.empty());
  ASSERT_EQ(m.routing.size(), cfg.steps);
  EXPECT_EQ(m.routing.front().sections, 2u);
  EXPECT_EQ(m.routing.front().max_hops, 1u);
  for (const auto& r : m.routing) {
    EXPECT_LE(r.mean_hops, static_cast<double>(r.max_hops));
    EXPECT_LE(r.max_hops, static_cast<std::size_t>(std::bit_width(r.sections - 1)));
  }
  EXPECT_TRUE(m.check().empty());
}

TEST(Overhead, ZeroBatchCostsNothing) {
  auto cfg = small("join-overhead");
  cfg.batch_start = 0;
  cfg.batch_step = 0;
  for (const auto& r : run_join_overhead(cfg).overhead) {
    EXPECT_EQ(r.total, 0u);
    EXPECT_EQ(r.broadcast, 0u);
  }
  cfg = small("leave-overhead");
  cfg.batch_start = 0;
  cfg.batch_step = 0;
  for (const auto& r : run_leave_overhead(cfg).overhead) EXPECT_EQ(r.total, 0u);
}

TEST(Overhead, JoinSignalsShrinkWithClusterSize) {
  const auto m = run_join_overhead(small("join-overhead"));
  std::map<std::uint64_t, std::uint64_t> by_cluster;
  for (const auto& r : m.overhead) {
    EXPECT_EQ(r.applied, r.batch);
    by_cluster[r.cluster_size] += r.broadcast;
  }
  EXPECT_GT(by_cluster[4], by_cluster[32]);
  EXPECT_TRUE(m.check().empty());
}

TEST(Overhead, LeaveWithoutReplenishmentEndsEarlyWithANotice) {
  auto cfg = small("leave-overhead");
  cfg.replenish = false;
  cfg.batch_start = 200;
  cfg.cluster_sizes = {8};
  const auto m = run_leave_overhead(cfg);
  EXPECT_FALSE(m.notices.empty());
  for (const auto& r : m.overhead) EXPECT_EQ(r.applied, cfg.initial_population);
}

TEST(Overhead, ReplenishedLeaveAppliesTheWholeBatch) {
  const auto cfg = small("leave-overhead");
  const auto m = run_leave_overhead(cfg);
  for (const auto& r : m.overhead) {
    EXPECT_EQ(r.applied, r.batch);
    EXPECT_GT(r.ring_hops, 0u);
  }
  EXPECT_TRUE(m.check().empty());
}

TEST(Fault, StartsFromZeroAndNeverDecreases) {
  const auto m = run_fault_tolerance(small("fault"));
  std::map<std::uint64_t, std::uint64_t> last;
  for (const auto& r : m.faults) {
    if (r.departures == 0) EXPECT_EQ(r.failed, 0u);
    EXPECT_GE(r.failed, last[r.cluster_size]);
    last[r.cluster_size] = r.failed;
  }
  EXPECT_TRUE(m.check().empty());
}

TEST(Stability, IdenticalNodesNeverExchange) {
  auto cfg = small("stability");
  cfg.attributes.bandwidth_log_sigma = 0;
  cfg.attributes.session_fixed = true;
  cfg.attributes.willingness_min = cfg.attributes.willingness_max = 5;
  for (const auto& c : run_stability(cfg).cohorts) {
    EXPECT_EQ(c.exchanges, 0u);
    EXPECT_EQ(c.k_increments, 0u);
  }
}

TEST(Stability, KSumIsTwiceTheExchanges) {
  const auto m = run_stability(small("stability"));
  std::uint64_t exchanges = 0;
  for (const auto& c : m.cohorts) {
    EXPECT_EQ(c.arrivals, 200u);
    EXPECT_EQ(c.k_increments, 2 * c.exchanges);
    exchanges += c.exchanges;
  }
  EXPECT_GT(exchanges, 0u);
}

TEST(Determinism, SameSeedSameCsvDifferentSeedDifferentCsv) {
  for (const std::string e : {"route", "join-overhead", "leave-overhead", "fault", "stability"}) {
    auto cfg = small(e);
    const auto a = all_csv(run_experiment(cfg), cfg);
    EXPECT_EQ(a, all_csv(run_experiment(cfg), cfg)) << e;
    cfg.seed = 2;
    EXPECT_NE(a, all_csv(run_experiment(cfg), cfg)) << e;
  }
}

TEST(Output, CsvHeaderEmbedsEveryConfigEntry) {
  auto cfg = small("join-overhead");
  cfg.seed = 42;
  const auto m = run_experiment(cfg);
  std::ostringstream os;
  write_csv(os, m.tables().front(), cfg);
  const auto text = os.str();
  for (const auto& [k, v] : config_entries(cfg)) EXPECT_NE(text.find("# " + k + " = " + v + "\n"), std::string::npos) << k;
  EXPECT_NE(text.find("\ncluster_size,step,batch,"), std::string::npos);
}

TEST(Output, SummaryJsonParsesAndCarriesAggregates) {
  const auto cfg = small("fault");
  const auto j = nlohmann::json::parse(summary_json(run_experiment(cfg), cfg));
  EXPECT_EQ(j.at("experiment"), "fault");
  EXPECT_EQ(j.at("seed"), cfg.seed);
  EXPECT_TRUE(j.at("aggregates").contains("cluster_4"));
  EXPECT_TRUE(j.at("invariant_violations").empty());
}

TEST(Trace, RoundTripsAndReplays) {
  auto cfg = small("join-overhead");
  cfg.record_trace = true;
  cfg.cluster_sizes = {4, 16};
  const auto m = run_experiment(cfg);
  ASSERT_EQ(m.trace.size(), 4u);
  std::stringstream ss;
  write_trace(ss, m.trace);
  const auto text = ss.str();
  const auto back = read_trace(ss);
  ASSERT_EQ(back.size(), m.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i].records, m.trace[i].records);
  std::ostringstream again;
  write_trace(again, back);
  EXPECT_EQ(again.str(), text);

  const auto report = replay(back);
  EXPECT_TRUE(report.ok()) << report.mismatches.front();
  std::size_t records = 0;
  for (const auto& s : back) records += s.records.size();
  EXPECT_EQ(report.records, records);
}

TEST(Trace, StabilityTraceWithRefreshesReplays) {
  auto cfg = small("stability");
  cfg.record_trace = true;
  cfg.session_time_criterion = true;
  const auto m = run_experiment(cfg);
  std::stringstream ss;
  write_trace(ss, m.trace);
  const auto report = replay(read_trace(ss));
  EXPECT_TRUE(report.ok()) << report.mismatches.front();
}

TEST(Trace, TamperedCountsAreReported) {
  auto cfg = small("leave-overhead");
  cfg.record_trace = true;
  cfg.cluster_sizes = {4};
  auto m = run_experiment(cfg);
  auto& rec = m.trace.front().records.back();
  rec.signals[static_cast<std::size_t>(MessageKind::super_node_update)] += 1;
  const auto report = replay(m.trace);
  ASSERT_EQ(report.mismatches.size(), 1u);
  EXPECT_NE(report.mismatches.front().find("segment 1"), std::string::npos);
}

TEST(Trace, MalformedLinesNameTheLine) {
  std::istringstream bad("{\"type\":\"event\",\"t\":0}\n");
  EXPECT_THROW(read_trace(bad), format_error);
  std::istringstream junk("\n{not json}\n");
  try {
    read_trace(junk);
    FAIL() << "expected format_error";
  } catch (const format_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}
