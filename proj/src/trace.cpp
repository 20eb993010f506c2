#include "bsrone/trace.hpp"

#include <istream>
#include <ostream>

#include "bsrone/errors.hpp"
#include "json.hpp"

namespace bsrone {

namespace {

using json = nlohmann::ordered_json;

json vector_json(const CriteriaVector& v) { return json::array({v[0], v[1], v[2], v[3]}); }

CriteriaVector vector_from(const json& j) {
  if (!j.is_array() || j.size() != kCriteria) throw format_error("expected an array of four numbers");
  CriteriaVector v{};
  for (std::size_t i = 0; i < kCriteria; ++i) v[i] = j.at(i).get<double>();
  return v;
}

json header_json(const TraceSegment& s) {
  const auto& o = s.options;
  json h;
  h["type"] = "network";
  h["ring_exp"] = s.geometry.ring_exp();
  h["cluster_exp"] = s.geometry.cluster_exp();
  h["section_exp"] = s.geometry.section_exp() ? json(*s.geometry.section_exp()) : json(nullptr);
  h["weights"] = vector_json(o.weights.values());
  h["upper"] = vector_json(o.bounds.upper);
  h["lower"] = vector_json(o.bounds.lower);
  h["variant"] = o.variant == TopsisVariant::weighted ? "weighted" : "literal";
  h["substitutes"] = o.substitute_count;
  h["supreme_backups"] = o.supreme_backup_count;
  h["sync_delay"] = o.substitute_sync_delay;
  h["session_time_criterion"] = o.session_time_criterion;
  return h;
}

TraceSegment segment_from(const json& h) {
  std::optional<unsigned> section;
  if (!h.at("section_exp").is_null()) section = h.at("section_exp").get<unsigned>();
  TraceSegment s{NetworkGeometry(h.at("ring_exp").get<unsigned>(), h.at("cluster_exp").get<unsigned>(), section), {}, {}};
  auto& o = s.options;
  o.weights = CriteriaWeights{vector_from(h.at("weights"))};
  o.bounds = {vector_from(h.at("upper")), vector_from(h.at("lower"))};
  const auto variant = h.at("variant").get<std::string>();
  if (variant != "weighted" && variant != "literal") throw format_error("unknown variant '" + variant + "'");
  o.variant = variant == "weighted" ? TopsisVariant::weighted : TopsisVariant::literal;
  o.substitute_count = h.at("substitutes").get<std::size_t>();
  o.supreme_backup_count = h.at("supreme_backups").get<std::size_t>();
  o.substitute_sync_delay = h.at("sync_delay").get<double>();
  o.session_time_criterion = h.at("session_time_criterion").get<bool>();
  o.record_messages = false;
  o.record_trace = true;
  return s;
}

json record_json(const TraceRecord& r) {
  json e;
  e["type"] = "event";
  e["t"] = r.time;
  e["kind"] = trace_kind_name(r.kind);
  e["actor"] = r.actor.value;
  e["other"] = r.other ? json(r.other->value) : json(nullptr);
  if (r.attrs) {
    e["attrs"] = {{"bandwidth", r.attrs->bandwidth},
                  {"time_on_network", r.attrs->time_on_network},
                  {"id_exchanges", r.attrs->id_exchanges},
                  {"willingness", r.attrs->willingness}};
  } else {
    e["attrs"] = nullptr;
  }
  json signals = json::object();
  for (std::size_t i = 0; i < kMessageKinds; ++i) {
    if (r.signals[i]) signals[std::string(message_kind_name(static_cast<MessageKind>(i)))] = r.signals[i];
  }
  e["signals"] = signals;
  return e;
}

TraceRecord record_from(const json& e) {
  TraceRecord r;
  r.time = e.at("t").get<double>();
  const auto kind = parse_trace_kind(e.at("kind").get<std::string>());
  if (!kind) throw format_error("unknown event kind '" + e.at("kind").get<std::string>() + "'");
  r.kind = *kind;
  r.actor = NodeId{e.at("actor").get<std::uint64_t>()};
  if (!e.at("other").is_null()) r.other = NodeId{e.at("other").get<std::uint64_t>()};
  if (!e.at("attrs").is_null()) {
    const auto& a = e.at("attrs");
    r.attrs = AttributeVector{a.at("bandwidth").get<double>(), a.at("time_on_network").get<double>(),
                              a.at("id_exchanges").get<std::uint32_t>(), a.at("willingness").get<std::uint32_t>()};
  }
  for (const auto& [name, count] : e.at("signals").items()) {
    const auto k = parse_message_kind(name);
    if (!k) throw format_error("unknown message kind '" + name + "'");
    r.signals[static_cast<std::size_t>(*k)] = count.get<std::uint64_t>();
  }
  return r;
}

std::string describe(const TraceRecord& r) {
  return std::string(trace_kind_name(r.kind)) + " of " + std::to_string(r.actor.value) + " at t=" + std::to_string(r.time);
}

}  // namespace

void write_trace(std::ostream& os, const std::vector<TraceSegment>& segments) {
  for (const auto& s : segments) {
    os << header_json(s).dump() << '\n';
    for (const auto& r : s.records) os << record_json(r).dump() << '\n';
  }
}

std::vector<TraceSegment> read_trace(std::istream& is) {
  std::vector<TraceSegment> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "network") {
        out.push_back(segment_from(j));
      } else if (type == "event") {
        if (out.empty()) throw format_error("event before any network header");
        out.back().records.push_back(record_from(j));
      } else {
        throw format_error("unknown line type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw format_error("trace line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

ReplayReport replay(const std::vector<TraceSegment>& segments) {
  ReplayReport report;
  for (const auto& seg : segments) {
    ++report.segments;
    auto options = seg.options;
    options.record_trace = true;
    options.record_messages = false;
    Network net(seg.geometry, options);
    for (const auto& r : seg.records) {
      ++report.records;
      const auto before = net.trace().size();
      try {
        net.advance_clock(r.time);
        switch (r.kind) {
          case TraceRecord::Kind::join:
            if (!r.attrs) throw format_error("join without attributes");
            net.join(r.actor, *r.attrs, r.other);
            break;
          case TraceRecord::Kind::leave:
            net.leave(r.actor);
            break;
          case TraceRecord::Kind::refresh:
            if (!r.attrs) throw format_error("refresh without attributes");
            net.promote_on_improvement(r.actor, *r.attrs);
            break;
          case TraceRecord::Kind::exchange:
            if (!r.other) throw format_error("exchange without partner");
            net.id_exchange(r.actor, *r.other);
            break;
          case TraceRecord::Kind::lookup:
            if (!r.other) throw format_error("lookup without target");
            net.lookup(r.actor, *r.other);
            break;
        }
      } catch (const std::exception& e) {
        report.mismatches.push_back("segment " + std::to_string(report.segments) + ", " + describe(r) + ": " + e.what());
        break;  // later records depend on this one
      }
      if (net.trace().size() != before + 1) {
        report.mismatches.push_back("segment " + std::to_string(report.segments) + ", " + describe(r) +
                                    ": event had no effect on replay");
        break;
      }
      const auto& got = net.trace().back();
      if (got != r) {
        std::string what = describe(r) + ": replay produced " + std::to_string(total(got.signals)) + " messages, trace has " +
                           std::to_string(total(r.signals));
        report.mismatches.push_back("segment " + std::to_string(report.segments) + ", " + what);
        break;
      }
      for (std::size_t i = 0; i < kMessageKinds; ++i) report.signals[i] += r.signals[i];
    }
  }
  return report;
}

}  // namespace bsrone
