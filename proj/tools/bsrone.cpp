// Command-line harness: runs one experiment family, scores a candidate file,
// or replays an event trace.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bsrone/errors.hpp"
#include "bsrone/sim.hpp"
#include "bsrone/trace.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bsrone;

namespace {

const std::vector<std::string> kExperiments = {"route", "join-overhead", "leave-overhead", "fault", "stability"};

/// Options that override the per-experiment defaults. Each registration keeps
/// its storage alive and applies it only when given on the command line or in
/// the config file.
class Overrides {
 public:
  explicit Overrides(CLI::App& app) : app_(app) {}

  template <class T, class Set>
  CLI::Option* add(const std::string& names, const std::string& help, Set set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_.add_option(names, *value, help);
    appliers_.push_back([opt, value, set](SimConfig& c) {
      if (opt->count()) set(c, *value);
    });
    return opt;
  }

  void apply(SimConfig& c) const {
    for (const auto& f : appliers_) f(c);
  }

 private:
  CLI::App& app_;
  std::vector<std::function<void(SimConfig&)>> appliers_;
};

CriteriaVector four(const std::vector<double>& v, const std::string& what) {
  if (v.size() != kCriteria) throw domain_error(what + " needs exactly four values");
  return {v[0], v[1], v[2], v[3]};
}

TopsisVariant variant_of(const std::string& s) {
  if (s == "weighted") return TopsisVariant::weighted;
  if (s == "literal") return TopsisVariant::literal;
  throw domain_error("variant must be 'weighted' or 'literal'");
}

void register_overrides(Overrides& o) {
  o.add<std::uint64_t>("--seed", "RNG seed", [](SimConfig& c, auto v) { c.seed = v; });
  o.add<unsigned>("--ring-exp,--ring_exp", "ring holds 2^n IDs", [](SimConfig& c, auto v) { c.ring_exp = v; });
  o.add<std::vector<std::uint64_t>>("--cluster-size,--cluster_sizes", "cluster size(s), comma separated",
                                    [](SimConfig& c, const auto& v) { c.cluster_sizes = v; })
      ->delimiter(',');
  o.add<std::uint64_t>("--section-size,--section_size", "section size in scalable mode",
                       [](SimConfig& c, auto v) { c.section_size = v; });
  o.add<std::size_t>("--initial,--initial_population", "nodes present before measuring",
                     [](SimConfig& c, auto v) { c.initial_population = v; });
  o.add<std::size_t>("--steps", "number of sweep steps", [](SimConfig& c, auto v) { c.steps = v; });
  o.add<std::size_t>("--batch-start,--batch_start", "batch of the first step", [](SimConfig& c, auto v) { c.batch_start = v; });
  o.add<std::size_t>("--batch-step,--batch_step", "batch growth per step", [](SimConfig& c, auto v) { c.batch_step = v; });
  o.add<std::size_t>("--messages,--messages_per_step", "lookups per routing step",
                     [](SimConfig& c, auto v) { c.messages_per_step = v; });
  o.add<bool>("--replenish", "leave sweep: follow every departure by an arrival",
              [](SimConfig& c, auto v) { c.replenish = v; });
  o.add<std::vector<double>>("--weights", "criteria weights B,T,K,W",
                             [](SimConfig& c, const auto& v) { c.weights = four(v, "--weights"); })
      ->delimiter(',');
  o.add<std::vector<double>>("--bounds-upper,--bounds_upper", "upper bounds B,T,K,W",
                             [](SimConfig& c, const auto& v) { c.bounds.upper = four(v, "--bounds-upper"); })
      ->delimiter(',');
  o.add<std::vector<double>>("--bounds-lower,--bounds_lower", "lower bounds B,T,K,W",
                             [](SimConfig& c, const auto& v) { c.bounds.lower = four(v, "--bounds-lower"); })
      ->delimiter(',');
  o.add<std::string>("--variant", "weighted or literal", [](SimConfig& c, const auto& v) { c.variant = variant_of(v); });
  o.add<std::size_t>("--substitutes", "substitutes per head", [](SimConfig& c, auto v) { c.substitutes = v; });
  o.add<std::size_t>("--supreme-backups,--supreme_backups", "substitutes kept by supreme-nodes",
                     [](SimConfig& c, auto v) { c.supreme_backups = v; });
  o.add<double>("--sync-delay,--sync_delay", "time before a new substitute can take over",
                [](SimConfig& c, auto v) { c.sync_delay = v; });
  o.add<bool>("--session-time,--session_time_criterion", "score elapsed session time",
              [](SimConfig& c, auto v) { c.session_time_criterion = v; });
  o.add<double>("--bandwidth-log-mean,--bandwidth_log_mean", "", [](SimConfig& c, auto v) { c.attributes.bandwidth_log_mean = v; });
  o.add<double>("--bandwidth-log-sigma,--bandwidth_log_sigma", "", [](SimConfig& c, auto v) { c.attributes.bandwidth_log_sigma = v; });
  o.add<double>("--session-mean,--session_mean", "", [](SimConfig& c, auto v) { c.attributes.session_mean = v; });
  o.add<bool>("--session-fixed,--session_fixed", "", [](SimConfig& c, auto v) { c.attributes.session_fixed = v; });
  o.add<std::uint32_t>("--willingness-min,--willingness_min", "", [](SimConfig& c, auto v) { c.attributes.willingness_min = v; });
  o.add<std::uint32_t>("--willingness-max,--willingness_max", "", [](SimConfig& c, auto v) { c.attributes.willingness_max = v; });
  o.add<std::size_t>("--snapshot-every,--snapshot_every", "fault: departures between snapshots",
                     [](SimConfig& c, auto v) { c.snapshot_every = v; });
  o.add<std::size_t>("--departures", "fault: total departures", [](SimConfig& c, auto v) { c.departures = v; });
  o.add<std::size_t>("--target,--target_population", "stability: population kept by matched churn",
                     [](SimConfig& c, auto v) { c.target_population = v; });
  o.add<double>("--refresh-interval,--refresh_interval", "stability: time between attribute reports",
                [](SimConfig& c, auto v) { c.refresh_interval = v; });
  o.add<std::size_t>("--cohort-size,--cohort_size", "stability: arrivals per cohort", [](SimConfig& c, auto v) { c.cohort_size = v; });
  o.add<std::size_t>("--cohorts", "stability: number of cohorts", [](SimConfig& c, auto v) { c.cohorts = v; });
}

std::string config_text(const SimConfig& cfg) {
  std::ostringstream os;
  os << "# bsrone configuration, readable with --config\n";
  for (const auto& [k, v] : config_entries(cfg)) {
    if (k == "experiment") os << "# experiment = " << v << '\n';
    else os << k << " = " << v << '\n';
  }
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct OutputFlags {
  std::string out_dir;
  std::string trace_path;
  bool csv = false;
  bool json = false;
};

int run_experiment_command(const std::string& experiment, const Overrides& overrides, const OutputFlags& flags,
                           bool print_config) {
  SimConfig cfg = default_config(experiment);
  overrides.apply(cfg);
  if (!flags.trace_path.empty()) cfg.record_trace = true;
  cfg.validate();
  if (print_config) {
    std::cout << config_text(cfg);
    return 0;
  }

  const Metrics m = run_experiment(cfg);
  const auto tables = m.tables();
  const std::string summary = summary_json(m, cfg);

  if (!flags.out_dir.empty()) {
    fs::create_directories(flags.out_dir);
    for (const auto& t : tables) {
      std::ostringstream os;
      write_csv(os, t, cfg);
      write_file(fs::path(flags.out_dir) / (experiment + "_" + t.name + ".csv"), os.str());
    }
    write_file(fs::path(flags.out_dir) / (experiment + "_summary.json"), summary + "\n");
  }
  if (!flags.trace_path.empty()) {
    std::ostringstream os;
    write_trace(os, m.trace);
    write_file(flags.trace_path, os.str());
  }
  const bool csv_to_stdout = flags.csv || (!flags.json && flags.out_dir.empty());
  if (csv_to_stdout) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (i) std::cout << '\n';
      write_csv(std::cout, tables[i], cfg);
    }
  }
  if (flags.json) std::cout << summary << '\n';
  for (const auto& n : m.notices) std::cerr << "notice: " << n << '\n';

  const auto violations = m.check();
  for (const auto& v : violations) std::cerr << "invariant violated: " << v << '\n';
  return violations.empty() ? 0 : 2;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  return out;
}

/// Candidate file: CSV with columns id,bandwidth,time_on_network,id_exchanges,willingness
/// in any order; `#` lines are comments.
std::pair<std::vector<NodeId>, std::vector<AttributeVector>> read_candidates(std::istream& is) {
  const std::vector<std::string> wanted = {"id", "bandwidth", "time_on_network", "id_exchanges", "willingness"};
  std::vector<std::size_t> column(wanted.size(), std::string::npos);
  std::vector<NodeId> ids;
  std::vector<AttributeVector> attrs;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++number;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (!have_header) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t w = 0; w < wanted.size(); ++w) {
          if (cells[i] == wanted[w]) column[w] = i;
        }
      }
      for (std::size_t w = 0; w < wanted.size(); ++w) {
        if (column[w] == std::string::npos) throw format_error("candidate file lacks column '" + wanted[w] + "'");
      }
      have_header = true;
      continue;
    }
    try {
      auto cell = [&](std::size_t w) -> const std::string& { return cells.at(column[w]); };
      ids.push_back(NodeId{std::stoull(cell(0))});
      attrs.push_back({std::stod(cell(1)), std::stod(cell(2)), static_cast<std::uint32_t>(std::stoul(cell(3))),
                       static_cast<std::uint32_t>(std::stoul(cell(4)))});
    } catch (const std::exception& e) {
      throw format_error("candidate line " + std::to_string(number) + ": " + e.what());
    }
  }
  if (ids.empty()) throw format_error("candidate file has no rows");
  return {ids, attrs};
}

int run_topsis_command(const std::string& path, const Overrides& overrides, const OutputFlags& flags, bool print_config) {
  SimConfig cfg = default_config("route");
  overrides.apply(cfg);
  cfg.experiment = "topsis";
  if (print_config) {
    std::cout << config_text(cfg);
    return 0;
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  const auto [ids, attrs] = read_candidates(in);
  const auto d = build_decision_matrix(attrs, cfg.bounds);
  const auto c = score(d, CriteriaWeights{cfg.weights}, benefit_bounds(cfg.bounds), {cfg.variant, ZeroColumnPolicy::neutral});
  const auto order = rank(c.values, ids);

  Table t{"scores", {"rank", "id", "closeness"}, {}};
  for (std::size_t r = 0; r < order.size(); ++r) {
    std::ostringstream v;
    v << std::setprecision(17) << c.values[order[r]];
    t.rows.push_back({std::to_string(r + 1), std::to_string(ids[order[r]].value), v.str()});
  }
  nlohmann::ordered_json j;
  j["candidates"] = ids.size();
  j["best"] = ids[order.front()].value;
  j["best_closeness"] = c.values[order.front()];
  std::vector<std::uint64_t> degenerate;
  for (auto i : c.degenerate_rows) degenerate.push_back(ids[i].value);
  j["degenerate_bounds"] = degenerate;

  if (!flags.out_dir.empty()) {
    fs::create_directories(flags.out_dir);
    std::ostringstream os;
    write_csv(os, t, cfg);
    write_file(fs::path(flags.out_dir) / "topsis_scores.csv", os.str());
    write_file(fs::path(flags.out_dir) / "topsis_summary.json", j.dump(2) + "\n");
  }
  if (flags.csv || (!flags.json && flags.out_dir.empty())) write_csv(std::cout, t, cfg);
  if (flags.json) std::cout << j.dump(2) << '\n';
  for (auto i : c.degenerate_rows) std::cerr << "warning: candidate " << ids[i] << " sits on degenerate bounds\n";
  return 0;
}

int run_replay_command(const std::string& path, const OutputFlags& flags) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  const auto report = replay(read_trace(in));
  nlohmann::ordered_json j;
  j["segments"] = report.segments;
  j["records"] = report.records;
  auto& s = j["signals"];
  s = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < kMessageKinds; ++i) s[std::string(message_kind_name(static_cast<MessageKind>(i)))] = report.signals[i];
  j["mismatches"] = report.mismatches;
  j["ok"] = report.ok();
  if (!flags.out_dir.empty()) {
    fs::create_directories(flags.out_dir);
    write_file(fs::path(flags.out_dir) / "replay_summary.json", j.dump(2) + "\n");
  }
  if (flags.json || flags.out_dir.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << (report.ok() ? "replay ok: " : "replay FAILED: ") << report.records << " records in " << report.segments
              << " segments\n";
  }
  for (const auto& m : report.mismatches) std::cerr << "mismatch: " << m << '\n';
  return report.ok() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BSROne overlay simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file (see --print-config)");
  app.allow_config_extras(false);

  Overrides overrides(app);
  register_overrides(overrides);
  OutputFlags flags;
  bool print_config = false;
  app.add_option("--out", flags.out_dir, "directory for CSV, JSON and summary files");
  app.add_flag("--csv", flags.csv, "write CSV tables to stdout");
  app.add_flag("--json", flags.json, "write the JSON summary to stdout");
  app.add_option("--trace", flags.trace_path, "write an NDJSON event trace to this file");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");

  std::map<std::string, CLI::App*> experiments;
  for (const auto& e : kExperiments) experiments[e] = app.add_subcommand(e, "run the " + e + " experiment")->fallthrough();
  std::string candidates_path;
  auto* topsis = app.add_subcommand("topsis", "score a candidate CSV file")->fallthrough();
  topsis->add_option("candidates", candidates_path, "CSV with id,bandwidth,time_on_network,id_exchanges,willingness")
      ->required();
  std::string trace_path;
  auto* replay_cmd = app.add_subcommand("replay", "replay an NDJSON event trace and verify its signal counts")->fallthrough();
  replay_cmd->add_option("trace", trace_path, "trace file written with --trace")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [name, sub] : experiments) {
      if (sub->parsed()) return run_experiment_command(name, overrides, flags, print_config);
    }
    if (topsis->parsed()) return run_topsis_command(candidates_path, overrides, flags, print_config);
    if (replay_cmd->parsed()) return run_replay_command(trace_path, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
