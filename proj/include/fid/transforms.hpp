#pragma once

#include "fid/model.hpp"
#include "fid/trace.hpp"

namespace fid {

/// Deletes every node with no directed path to the top event.
FaultDiagram trim_barren(const FaultDiagram& d, Trace& trace);

/// Fixpoint of the certainty rules: a parentless chance node with probability
/// exactly 0 or 1 informs its successors (OR with a sure-success parent
/// becomes sure success, AND drops sure-success parents, NOT flips, chance
/// CPTs are sliced to the matching rows) and is then deleted. A certain top
/// event is kept.
FaultDiagram propagate_certainty(const FaultDiagram& d, Trace& trace);

/// Replaces logical node n, whose parents are all parentless chance nodes
/// feeding only n, with a parentless chance node: AND takes the product of
/// the parents' success probabilities, OR one minus the product of their
/// failure probabilities, NOT the parent's failure probability.
FaultDiagram compute_logical(const FaultDiagram& d, const NodeId& n, Trace& trace);

/// Marginalizes chance node n into its unique chance successor.
FaultDiagram remove_into_successor(const FaultDiagram& d, const NodeId& n, Trace& trace);

/// Bayes reversal of the arc i -> j (both chance, no other directed path from
/// i to j). Both nodes end up conditioned on the union of their former
/// parents; the joint distribution is unchanged. A zero-mass conditioning row
/// gets the sentinel 0.5 and a NOTE trace line.
FaultDiagram reverse_arc(const FaultDiagram& d, const NodeId& i, const NodeId& j, Trace& trace);

/// Eliminates every grandfather: a chance node whose every directed path to a
/// logical operator is longer than two arcs. Each is reduced by reversing
/// arcs to all but its topologically last successor, then removing it into
/// that successor.
FaultDiagram reduce_grandfathers(const FaultDiagram& d, Trace& trace);

/// Round-robin fixpoint of trim, certainty, computing, removal and
/// grandfather reduction. Preserves the oracle top probability and never
/// grows the node count.
FaultDiagram preprocess(const FaultDiagram& d, Trace& trace);

/// Conditions the diagram on n = v: n (a parentless chance node) is deleted,
/// chance successors keep only the matching CPT rows, logical successors see
/// the certainty and the usual certainty rules cascade.
FaultDiagram instantiate(const FaultDiagram& d, const NodeId& n, Outcome v, Trace& trace);

}  // namespace fid
