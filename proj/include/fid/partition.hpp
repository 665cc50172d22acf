#pragma once

#include "fid/model.hpp"
#include "fid/trace.hpp"

namespace fid {

enum class PartitionKind { ChanceBlock, MultiSuccessorLogical };

/// A maximal contiguous block of chance nodes, or a single logical node with
/// two or more successors, together with its immediate reverse dominator:
/// the closest node lying on every directed path from the partition to top.
struct Partition {
  std::set<NodeId> members;
  PartitionKind kind = PartitionKind::ChanceBlock;
  NodeId ird;

  bool operator==(const Partition&) const = default;
};

/// Graph over partitions guiding which module to process next. The synthetic
/// top vertex has the empty key; partition vertices are keyed by their
/// lexicographically smallest member.
struct ControlGraph {
  struct Vertex {
    Partition partition;
    std::set<std::string> edges;  // keys of reachable vertices ("" = top)
    int distance_to_top = 0;
    int out_degree = 0;
    bool actionable = false;  // false for a lone parentless single-successor chance node
  };
  std::map<std::string, Vertex> vertices;
};

/// Cut-vertex plus every node with a directed path to it.
struct Module {
  NodeId cut_vertex;
  std::set<NodeId> members;
};

/// Partition members plus the synthetic sink (*). An edge into the sink marks
/// a member with at least one logical successor.
struct PartitionGraph {
  std::set<NodeId> members;
  std::map<NodeId, std::set<NodeId>> parents;  // arcs within the partition
  std::set<NodeId> feeds_sink;
};

/// Result of inspecting the partition graph's candidate source nodes from
/// sink to source: the arc reversals to perform, the nodes to condition on
/// (classification order) and the nodes reducible by removal.
struct InstantiationPlan {
  std::vector<std::pair<NodeId, NodeId>> reversals;
  std::vector<NodeId> instantiate;
  std::vector<NodeId> integrate;
};

enum class TieOrder { Lex, Paper };

struct SolveOptions {
  TieOrder tie_order = TieOrder::Lex;
};

/// Connected components of the chance-only subgraph plus every logical node
/// with two or more successors, each carrying its IRD. Sorted by smallest
/// member id.
std::vector<Partition> find_partitions(const FaultDiagram& d);

/// Nearest common post-dominator of the partition members, climbed out of the
/// member set. Throws NoPathToTop when a member cannot reach the top event.
NodeId immediate_reverse_dominator(const FaultDiagram& d, const std::set<NodeId>& members);

ControlGraph build_control_graph(const FaultDiagram& d, const std::vector<Partition>& ps);

/// Partition at minimum control-graph distance to top; ties broken by
/// out-degree, then lexicographically (Lex) or reverse-lexicographically
/// (Paper). Partitions that need no processing rank last.
Partition select_partition(const ControlGraph& cg, TieOrder tie_order = TieOrder::Lex);

/// Module for the cut-vertex closest to the partition's IRD (the IRD itself
/// always qualifies and wins). A NOTE trace line lists the candidates.
Module select_module(const FaultDiagram& d, const Partition& p, Trace& trace);

PartitionGraph build_partition_graph(const FaultDiagram& d, const Partition& p);

InstantiationPlan plan_instantiations(const PartitionGraph& pg);

/// Solves the module as a smaller fault diagram rooted at the cut-vertex and
/// replaces it with a single parentless chance node carrying the result.
/// Throws ModuleNotReducible when the module is not self-contained.
FaultDiagram solve_module(const FaultDiagram& d, const Module& m, const SolveOptions& opt,
                          Trace& trace);

/// Unconditional probability of the top event: preprocess, then repeatedly
/// solve self-contained modules, falling back to conditioning on a planned
/// partition node when no module is available.
double solve(const FaultDiagram& d, const SolveOptions& opt, Trace& trace);

}  // namespace fid
