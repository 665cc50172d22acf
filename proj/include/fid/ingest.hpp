#pragma once

#include <cstdint>
#include <string>

#include "fid/model.hpp"

namespace fid {

/// Parses the JSON diagram format and validates the result.
/// JSON-level problems raise SyntaxError with line/column; structural
/// problems raise the corresponding validate_diagram error.
FaultDiagram parse_diagram(const std::string& text);

/// Canonical serialization: nodes sorted by id, cpt keys sorted,
/// probabilities rendered with the shortest round-trip decimal.
/// parse_diagram(serialize_diagram(d)) is structurally identical to d.
std::string serialize_diagram(const FaultDiagram& d);

/// Graphviz rendering. Chance nodes are ellipses (labelled with their
/// probability when parentless), logical nodes are boxes, the top event gets
/// a doubled border. Nodes and arcs come out in lexicographic order.
std::string export_dot(const FaultDiagram& d);

struct GeneratorParams {
  std::size_t chance_count = 8;
  std::size_t logical_count = 4;
  std::size_t max_parents = 3;
  double shared_subsystem_bias = 0.5;
  std::uint64_t seed = 1;
};

/// Deterministic random diagram for differential testing. Chance nodes draw
/// parents only from earlier chance nodes; a higher bias makes nodes that
/// already feed something more likely to be picked again, producing shared
/// subsystems. CPT entries are drawn from [0.05, 0.95].
FaultDiagram generate_random(const GeneratorParams& params);

}  // namespace fid
