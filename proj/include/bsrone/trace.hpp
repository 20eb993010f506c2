#pragma once

// NDJSON event traces. A file is a sequence of segments, one per network
// instance: a header line carrying geometry and protocol options, then one
// line per protocol event with the signals it produced. Replaying a segment
// rebuilds the network from scratch and must regenerate the same records.

#include <iosfwd>
#include <string>
#include <vector>

#include "bsrone/protocol.hpp"

namespace bsrone {

struct TraceSegment {
  NetworkGeometry geometry;
  ProtocolOptions options;
  std::vector<TraceRecord> records;
};

void write_trace(std::ostream& os, const std::vector<TraceSegment>& segments);
/// Throws format_error with the offending line number.
std::vector<TraceSegment> read_trace(std::istream& is);

struct ReplayReport {
  std::size_t segments = 0;
  std::size_t records = 0;
  SignalCounts signals{};
  std::vector<std::string> mismatches;  ///< empty when the replay reproduced every record

  bool ok() const noexcept { return mismatches.empty(); }
};

ReplayReport replay(const std::vector<TraceSegment>& segments);

}  // namespace bsrone
