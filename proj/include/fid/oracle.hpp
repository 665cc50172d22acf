#pragma once

#include <map>

#include "fid/model.hpp"

namespace fid {

/// Default cap on the chance-node count the brute-force evaluator accepts
/// (2^20 joint assignments).
inline constexpr std::size_t kDefaultOracleCap = 20;

/// One full assignment of the chance nodes together with its probability mass.
struct JointAssignment {
  std::map<NodeId, Outcome> outcomes;
  double weight = 0.0;
};

/// All 2^k assignments of the k chance nodes. The weight of an assignment is
/// the product over chance nodes of the conditional success probability (or
/// its complement) under that assignment.
std::vector<JointAssignment> enumerate_joint(const FaultDiagram& d,
                                             std::size_t cap = kDefaultOracleCap);

/// Exact unconditional probability that the top event evaluates to Success.
/// Logical nodes are evaluated deterministically: AND succeeds iff all parents
/// do, OR iff any does, NOT iff its parent fails.
double oracle_top_probability(const FaultDiagram& d, std::size_t cap = kDefaultOracleCap);

/// Exact probability that node n evaluates to Success under the joint.
double oracle_marginal(const FaultDiagram& d, const NodeId& n,
                       std::size_t cap = kDefaultOracleCap);

/// Marginals for every node, from a single enumeration pass.
std::map<NodeId, double> oracle_marginals(const FaultDiagram& d,
                                          std::size_t cap = kDefaultOracleCap);

}  // namespace fid
