#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fid/model.hpp"

namespace fid {

enum class TraceKind {
  Trim,
  Certain,
  Compute,
  Remove,
  Reverse,
  Instantiate,
  Combine,
  Partition,
  Ird,
  Module,
  Note,
};

const char* to_string(TraceKind kind);

/// One reduction step. `subjects` are rendered tab separated after the kind;
/// `value` is a probability rendered with 6 significant digits. `removed`
/// records the node deletions the step performed (bookkeeping, not rendered).
struct TraceEvent {
  TraceKind kind;
  std::vector<std::string> subjects;
  std::optional<double> value;
  std::vector<NodeId> removed;
};

class Trace {
 public:
  void add(TraceKind kind, std::vector<std::string> subjects,
           std::optional<double> value = std::nullopt,
           std::vector<NodeId> removed = {});

  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  std::size_t count(TraceKind kind) const;

  /// One line per event: EVENT<TAB>subject[<TAB>subject2][<TAB>value]
  std::string render() const;

 private:
  std::vector<TraceEvent> events_;
};

/// Probability with 6 significant digits, as used in trace lines.
std::string format_probability(double p);

/// Set of ids rendered as {a,b,c} with members sorted.
std::string format_id_set(const std::set<NodeId>& ids);

}  // namespace fid
