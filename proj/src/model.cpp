#include "fid/model.hpp"

#include <cctype>
#include <queue>

namespace fid {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::TopMissing: return "TopMissing";
    case ErrorCode::TopHasSuccessor: return "TopHasSuccessor";
    case ErrorCode::ChanceWithLogicalParent: return "ChanceWithLogicalParent";
    case ErrorCode::NotArityViolation: return "NotArityViolation";
    case ErrorCode::EmptyLogicalParents: return "EmptyLogicalParents";
    case ErrorCode::CptShapeMismatch: return "CptShapeMismatch";
    case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::DuplicateParent: return "DuplicateParent";
    case ErrorCode::DanglingParentRef: return "DanglingParentRef";
    case ErrorCode::InvalidNodeId: return "InvalidNodeId";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::InfeasibleParams: return "InfeasibleParams";
    case ErrorCode::NotAChanceNode: return "NotAChanceNode";
    case ErrorCode::AssignmentShapeMismatch: return "AssignmentShapeMismatch";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorCode::PreconditionNotMet: return "PreconditionNotMet";
    case ErrorCode::NoPathToTop: return "NoPathToTop";
    case ErrorCode::NotAChanceBlock: return "NotAChanceBlock";
    case ErrorCode::ModuleNotReducible: return "ModuleNotReducible";
  }
  return "UnknownError";
}

const char* to_string(NodeType kind) {
  switch (kind) {
    case NodeType::And: return "and";
    case NodeType::Or: return "or";
    case NodeType::Not: return "not";
    case NodeType::Chance: return "chance";
  }
  return "?";
}

bool is_valid_token(const NodeId& id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

std::vector<std::string> all_assignment_keys(std::size_t parent_count) {
  std::vector<std::string> keys;
  keys.reserve(std::size_t{1} << parent_count);
  for (std::size_t mask = 0; mask < (std::size_t{1} << parent_count); ++mask) {
    std::string key(parent_count, 'f');
    for (std::size_t i = 0; i < parent_count; ++i) {
      if (mask & (std::size_t{1} << i)) key[i] = 's';
    }
    keys.push_back(std::move(key));
  }
  return keys;
}

std::string project_key(const std::map<NodeId, char>& row, const std::vector<NodeId>& parents) {
  std::string key;
  key.reserve(parents.size());
  for (const auto& p : parents) key.push_back(row.at(p));
  return key;
}

namespace {

// Maximum parent count we are willing to tabulate (2^k CPT rows).
constexpr std::size_t kMaxCptParents = 20;

// Names a node that sits on a directed cycle of the parent relation.
NodeId find_cycle_node(const std::map<NodeId, Node>& nodes, const std::set<NodeId>& unresolved) {
  NodeId cur = *unresolved.begin();
  std::set<NodeId> seen;
  while (!seen.count(cur)) {
    seen.insert(cur);
    for (const auto& p : nodes.at(cur).parents) {
      if (unresolved.count(p)) {
        cur = p;
        break;
      }
    }
  }
  return cur;
}

}  // namespace

FaultDiagram validate_diagram(const RawDiagram& raw) {
  std::map<NodeId, Node> nodes;
  for (const auto& rn : raw.nodes) {
    if (!is_valid_token(rn.id)) {
      throw Error(ErrorCode::InvalidNodeId, "node id '" + rn.id + "' is not a valid token");
    }
    if (nodes.count(rn.id)) {
      throw Error(ErrorCode::DuplicateNodeId, "node '" + rn.id + "' defined twice");
    }
    nodes.emplace(rn.id, Node{rn.kind, rn.parents, rn.table});
  }

  if (!nodes.count(raw.top)) {
    throw Error(ErrorCode::TopMissing, "top event '" + raw.top + "' is not a node");
  }

  for (const auto& [id, n] : nodes) {
    std::set<NodeId> seen;
    for (const auto& p : n.parents) {
      if (!nodes.count(p)) {
        throw Error(ErrorCode::DanglingParentRef,
                    "node '" + id + "' references unknown parent '" + p + "'");
      }
      if (!seen.insert(p).second) {
        throw Error(ErrorCode::DuplicateParent,
                    "node '" + id + "' lists parent '" + p + "' twice");
      }
    }
  }

  for (const auto& [id, n] : nodes) {
    switch (n.kind) {
      case NodeType::Not:
        if (n.parents.size() != 1) {
          throw Error(ErrorCode::NotArityViolation,
                      "NOT node '" + id + "' must have exactly one parent");
        }
        break;
      case NodeType::And:
      case NodeType::Or:
        if (n.parents.empty()) {
          throw Error(ErrorCode::EmptyLogicalParents,
                      "logical node '" + id + "' has no parents");
        }
        break;
      case NodeType::Chance:
        break;
    }
    if (is_logical(n) && !n.table.empty()) {
      throw Error(ErrorCode::CptShapeMismatch,
                  "logical node '" + id + "' must not carry a cpt");
    }
    if (is_chance(n)) {
      for (const auto& p : n.parents) {
        if (is_logical(nodes.at(p))) {
          throw Error(ErrorCode::ChanceWithLogicalParent,
                      "arc " + p + " -> " + id + " makes a chance node depend on a logical one");
        }
      }
      if (n.parents.size() > kMaxCptParents) {
        throw Error(ErrorCode::CptShapeMismatch,
                    "node '" + id + "' has too many parents to tabulate");
      }
      const std::size_t want = std::size_t{1} << n.parents.size();
      if (n.table.size() != want) {
        throw Error(ErrorCode::CptShapeMismatch,
                    "node '" + id + "' needs " + std::to_string(want) + " cpt rows, has " +
                        std::to_string(n.table.size()));
      }
      for (const auto& [key, p] : n.table) {
        if (key.size() != n.parents.size() ||
            key.find_first_not_of("sf") != std::string::npos) {
          throw Error(ErrorCode::CptShapeMismatch,
                      "node '" + id + "' has malformed cpt key '" + key + "'");
        }
        if (!(p >= 0.0 && p <= 1.0)) {  // also rejects NaN
          throw Error(ErrorCode::ProbabilityOutOfRange,
                      "node '" + id + "' key '" + key + "' has probability outside [0,1]");
        }
      }
    }
  }

  // Acyclicity via Kahn's algorithm over parent arcs.
  std::map<NodeId, std::size_t> indegree;
  std::map<NodeId, std::vector<NodeId>> children;
  for (const auto& [id, n] : nodes) {
    indegree[id] = n.parents.size();
    for (const auto& p : n.parents) children[p].push_back(id);
  }
  std::set<NodeId> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.insert(id);
  }
  std::size_t resolved = 0;
  std::set<NodeId> unresolved;
  for (const auto& [id, n] : nodes) unresolved.insert(id);
  while (!ready.empty()) {
    NodeId id = *ready.begin();
    ready.erase(ready.begin());
    unresolved.erase(id);
    ++resolved;
    for (const auto& c : children[id]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (resolved != nodes.size()) {
    throw Error(ErrorCode::CycleDetected,
                "node '" + find_cycle_node(nodes, unresolved) + "' lies on a cycle");
  }

  for (const auto& [id, n] : nodes) {
    for (const auto& p : n.parents) {
      if (p == raw.top) {
        throw Error(ErrorCode::TopHasSuccessor,
                    "top event '" + raw.top + "' has successor '" + id + "'");
      }
    }
  }

  return FaultDiagram{std::move(nodes), raw.top};
}

RawDiagram to_raw(const FaultDiagram& d) {
  RawDiagram raw;
  raw.top = d.top;
  for (const auto& [id, n] : d.nodes) {
    raw.nodes.push_back(RawNode{id, n.kind, n.parents, n.table});
  }
  return raw;
}

const Node& node_at(const FaultDiagram& d, const NodeId& id) {
  auto it = d.nodes.find(id);
  if (it == d.nodes.end()) {
    throw Error(ErrorCode::UnknownNode, "no node named '" + id + "'");
  }
  return it->second;
}

std::vector<NodeId> topological_order(const FaultDiagram& d) {
  std::map<NodeId, std::size_t> indegree;
  std::map<NodeId, std::vector<NodeId>> children;
  for (const auto& [id, n] : d.nodes) {
    indegree[id] = n.parents.size();
    for (const auto& p : n.parents) children[p].push_back(id);
  }
  std::set<NodeId> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.insert(id);
  }
  std::vector<NodeId> order;
  order.reserve(d.nodes.size());
  while (!ready.empty()) {
    NodeId id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& c : children[id]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  return order;
}

std::set<NodeId> reaches_top(const FaultDiagram& d) {
  std::set<NodeId> seen{d.top};
  std::queue<NodeId> work;
  work.push(d.top);
  while (!work.empty()) {
    NodeId cur = work.front();
    work.pop();
    for (const auto& p : d.nodes.at(cur).parents) {
      if (seen.insert(p).second) work.push(p);
    }
  }
  return seen;
}

std::map<NodeId, std::vector<NodeId>> successor_map(const FaultDiagram& d) {
  std::map<NodeId, std::vector<NodeId>> succ;
  for (const auto& [id, n] : d.nodes) succ[id];
  for (const auto& [id, n] : d.nodes) {
    for (const auto& p : n.parents) succ[p].push_back(id);
  }
  return succ;
}

double cpt_probability(const FaultDiagram& d, const NodeId& n, const std::string& key) {
  const Node& node = node_at(d, n);
  if (!is_chance(node)) {
    throw Error(ErrorCode::NotAChanceNode, "'" + n + "' is a logical node");
  }
  if (key.size() != node.parents.size() || key.find_first_not_of("sf") != std::string::npos) {
    throw Error(ErrorCode::AssignmentShapeMismatch,
                "assignment '" + key + "' does not fit node '" + n + "'");
  }
  return node.table.at(key);
}

}  // namespace fid
