#include "fid/oracle.hpp"


namespace fid {

namespace {

// Index-based form of a diagram so the 2^k enumeration runs on integers
// instead of string-keyed maps.
struct Compiled {
  std::vector<NodeId> ids;                  // topological order
  std::vector<NodeType> kinds;
  std::vector<std::vector<int>> parents;    // indices into ids
  std::vector<std::vector<double>> tables;  // chance: row index bit j = parents[j] success
  std::vector<int> chance;                  // indices of chance nodes, id-sorted
  int top = -1;
};

Compiled compile(const FaultDiagram& d, std::size_t cap) {
  Compiled c;
  c.ids = topological_order(d);
  std::map<NodeId, int> index;
  for (std::size_t i = 0; i < c.ids.size(); ++i) index[c.ids[i]] = static_cast<int>(i);
  c.kinds.resize(c.ids.size());
  c.parents.resize(c.ids.size());
  c.tables.resize(c.ids.size());
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    const Node& n = d.nodes.at(c.ids[i]);
    c.kinds[i] = n.kind;
    for (const auto& p : n.parents) c.parents[i].push_back(index.at(p));
    if (is_chance(n)) {
      c.tables[i].resize(std::size_t{1} << n.parents.size());
      for (const auto& [key, prob] : n.table) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < key.size(); ++j) {
          if (key[j] == 's') row |= std::size_t{1} << j;
        }
        c.tables[i][row] = prob;
      }
    }
  }
  std::vector<NodeId> chance_ids;
  for (const auto& [id, n] : d.nodes) {
    if (is_chance(n)) chance_ids.push_back(id);
  }
  if (chance_ids.size() > cap) {
    throw Error(ErrorCode::TooLargeForOracle,
                std::to_string(chance_ids.size()) + " chance nodes exceed the cap of " +
                    std::to_string(cap));
  }
  for (const auto& id : chance_ids) c.chance.push_back(index.at(id));
  c.top = index.at(d.top);
  return c;
}

// Calls fn(values, weight) for every joint assignment; `values[i]` is the
// evaluated truth of node i (chance nodes as assigned, logical computed).
template <typename Fn>
void for_each_joint(const Compiled& c, Fn&& fn) {
  const std::size_t k = c.chance.size();
  std::vector<char> value(c.ids.size(), 0);
  std::vector<char> assigned(c.ids.size(), 0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    for (std::size_t b = 0; b < k; ++b) {
      assigned[c.chance[b]] = (mask >> b) & 1 ? 1 : 0;
    }
    double weight = 1.0;
    for (std::size_t i = 0; i < c.ids.size(); ++i) {
      const auto& ps = c.parents[i];
      if (c.kinds[i] == NodeType::Chance) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < ps.size(); ++j) {
          if (value[ps[j]]) row |= std::size_t{1} << j;
        }
        const double p = c.tables[i][row];
        value[i] = assigned[i];
        weight *= value[i] ? p : 1.0 - p;
      } else if (c.kinds[i] == NodeType::And) {
        char v = 1;
        for (int p : ps) v = static_cast<char>(v && value[p]);
        value[i] = v;
      } else if (c.kinds[i] == NodeType::Or) {
        char v = 0;
        for (int p : ps) v = static_cast<char>(v || value[p]);
        value[i] = v;
      } else {  // Not
        value[i] = value[ps[0]] ? 0 : 1;
      }
    }
    fn(value, weight);
  }
}

}  // namespace

std::vector<JointAssignment> enumerate_joint(const FaultDiagram& d, std::size_t cap) {
  Compiled c = compile(d, cap);
  std::vector<JointAssignment> out;
  out.reserve(std::size_t{1} << c.chance.size());
  for_each_joint(c, [&](const std::vector<char>& value, double weight) {
    JointAssignment a;
    a.weight = weight;
    for (int i : c.chance) {
      a.outcomes[c.ids[i]] = value[i] ? Outcome::Success : Outcome::Failure;
    }
    out.push_back(std::move(a));
  });
  return out;
}

double oracle_top_probability(const FaultDiagram& d, std::size_t cap) {
  Compiled c = compile(d, cap);
  double total = 0.0;
  for_each_joint(c, [&](const std::vector<char>& value, double weight) {
    if (value[c.top]) total += weight;
  });
  return total;
}

double oracle_marginal(const FaultDiagram& d, const NodeId& n, std::size_t cap) {
  node_at(d, n);  // UnknownNode check
  return oracle_marginals(d, cap).at(n);
}

std::map<NodeId, double> oracle_marginals(const FaultDiagram& d, std::size_t cap) {
  Compiled c = compile(d, cap);
  std::vector<double> sums(c.ids.size(), 0.0);
  for_each_joint(c, [&](const std::vector<char>& value, double weight) {
    for (std::size_t i = 0; i < sums.size(); ++i) {
      if (value[i]) sums[i] += weight;
    }
  });
  std::map<NodeId, double> out;
  for (std::size_t i = 0; i < sums.size(); ++i) out[c.ids[i]] = sums[i];
  return out;
}

}  // namespace fid
