#include "fid/trace.hpp"

#include <cstdio>

namespace fid {

const char* to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::Trim: return "TRIM";
    case TraceKind::Certain: return "CERTAIN";
    case TraceKind::Compute: return "COMPUTE";
    case TraceKind::Remove: return "REMOVE";
    case TraceKind::Reverse: return "REVERSE";
    case TraceKind::Instantiate: return "INSTANTIATE";
    case TraceKind::Combine: return "COMBINE";
    case TraceKind::Partition: return "PARTITION";
    case TraceKind::Ird: return "IRD";
    case TraceKind::Module: return "MODULE";
    case TraceKind::Note: return "NOTE";
  }
  return "?";
}

std::string format_probability(double p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", p);
  return buf;
}

std::string format_id_set(const std::set<NodeId>& ids) {
  std::string out = "{";
  bool first = true;
  for (const auto& id : ids) {
    if (!first) out += ",";
    out += id;
    first = false;
  }
  out += "}";
  return out;
}

void Trace::add(TraceKind kind, std::vector<std::string> subjects,
                std::optional<double> value, std::vector<NodeId> removed) {
  events_.push_back(TraceEvent{kind, std::move(subjects), value, std::move(removed)});
}

std::size_t Trace::count(TraceKind kind) const {
  std::size_t n = 0;
  for (const auto& e : events_) {
    if (e.kind == kind) ++n;
  }
  return n;
}

std::string Trace::render() const {
  std::string out;
  for (const auto& e : events_) {
    out += to_string(e.kind);
    for (const auto& s : e.subjects) {
      out += '\t';
      out += s;
    }
    if (e.value) {
      out += '\t';
      out += format_probability(*e.value);
    }
    out += '\n';
  }
  return out;
}

}  // namespace fid
