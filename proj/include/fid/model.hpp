#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fid/error.hpp"

namespace fid {

/// Node identifier: non-empty token over letters, digits and underscore.
using NodeId = std::string;

enum class Outcome { Success, Failure };

inline char outcome_char(Outcome v) { return v == Outcome::Success ? 's' : 'f'; }

enum class NodeType { And, Or, Not, Chance };

const char* to_string(NodeType kind);

/// Success-probability table of a chance node. Keys are strings over {s,f},
/// position i giving the outcome of parents[i]; the empty key for no parents.
using CptTable = std::map<std::string, double>;

struct Node {
  NodeType kind = NodeType::Chance;
  std::vector<NodeId> parents;
  CptTable table;  // chance nodes only

  bool operator==(const Node&) const = default;
};

inline bool is_chance(const Node& n) { return n.kind == NodeType::Chance; }
inline bool is_logical(const Node& n) { return n.kind != NodeType::Chance; }

/// Parsed but unchecked node description, as it comes out of a file.
struct RawNode {
  NodeId id;
  NodeType kind = NodeType::Chance;
  std::vector<NodeId> parents;
  CptTable table;
};

struct RawDiagram {
  NodeId top;
  std::vector<RawNode> nodes;
};

/// A validated fault influence diagram: an acyclic graph of binary nodes,
/// chance nodes carrying CPTs over their (chance) parents, logical nodes
/// evaluated deterministically, and a designated sink as the top event.
struct FaultDiagram {
  std::map<NodeId, Node> nodes;
  NodeId top;

  bool operator==(const FaultDiagram&) const = default;
};

/// Checks every structural invariant and returns the diagram.
/// Throws Error with codes CycleDetected, TopMissing, TopHasSuccessor,
/// ChanceWithLogicalParent, NotArityViolation, EmptyLogicalParents,
/// CptShapeMismatch, ProbabilityOutOfRange, DuplicateNodeId, DuplicateParent,
/// DanglingParentRef or InvalidNodeId.
FaultDiagram validate_diagram(const RawDiagram& raw);

RawDiagram to_raw(const FaultDiagram& d);

const Node& node_at(const FaultDiagram& d, const NodeId& id);

/// Parents-before-children order, ties broken lexicographically.
std::vector<NodeId> topological_order(const FaultDiagram& d);

/// The set of nodes with a directed path to the top event (top included).
std::set<NodeId> reaches_top(const FaultDiagram& d);

/// Children of every node, each list sorted lexicographically.
std::map<NodeId, std::vector<NodeId>> successor_map(const FaultDiagram& d);

/// Stored success probability of chance node n under the given parent
/// assignment key.
double cpt_probability(const FaultDiagram& d, const NodeId& n, const std::string& key);

/// All 2^k assignment keys for k parents.
std::vector<std::string> all_assignment_keys(std::size_t parent_count);

/// Key over `parents` read from a full row assignment (id -> outcome char).
std::string project_key(const std::map<NodeId, char>& row, const std::vector<NodeId>& parents);

bool is_valid_token(const NodeId& id);

}  // namespace fid
