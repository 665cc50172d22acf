#include "fid/transforms.hpp"

#include <algorithm>
#include <queue>

namespace fid {

namespace {

constexpr std::size_t kMaxCptParents = 20;

double scalar_of(const Node& n) { return n.table.at(""); }

bool is_certain_chance(const Node& n) {
  if (!is_chance(n) || !n.parents.empty()) return false;
  const double p = scalar_of(n);
  return p == 0.0 || p == 1.0;  // exact by design: certainty is a modeling statement
}

std::size_t parent_index(const Node& n, const NodeId& p) {
  for (std::size_t i = 0; i < n.parents.size(); ++i) {
    if (n.parents[i] == p) return i;
  }
  throw Error(ErrorCode::PreconditionNotMet, "'" + p + "' is not a parent here");
}

CptTable slice_table(const Node& n, std::size_t index, char v) {
  CptTable out;
  for (const auto& [key, prob] : n.table) {
    if (key[index] != v) continue;
    std::string nk = key;
    nk.erase(nk.begin() + static_cast<std::ptrdiff_t>(index));
    out[nk] = prob;
  }
  return out;
}

void set_certain(Node& n, bool success) {
  n.kind = NodeType::Chance;
  n.parents.clear();
  n.table = CptTable{{"", success ? 1.0 : 0.0}};
}

bool trim_pass(FaultDiagram& d, Trace& tr) {
  const auto keep = reaches_top(d);
  if (keep.size() == d.nodes.size()) return false;
  std::vector<NodeId> gone;
  for (const auto& [id, n] : d.nodes) {
    if (!keep.count(id)) gone.push_back(id);
  }
  for (const auto& id : gone) {
    tr.add(TraceKind::Trim, {id}, std::nullopt, {id});
    d.nodes.erase(id);
  }
  return true;
}

bool certainty_pass(FaultDiagram& d, Trace& tr) {
  bool changed = false;
  for (;;) {
    NodeId u;
    bool found = false;
    for (const auto& [id, n] : d.nodes) {
      if (id != d.top && is_certain_chance(n)) {
        u = id;
        found = true;
        break;
      }
    }
    if (!found) break;

    const bool success = scalar_of(d.nodes.at(u)) == 1.0;
    tr.add(TraceKind::Certain, {u}, success ? 1.0 : 0.0, {u});
    changed = true;

    const auto successors = successor_map(d).at(u);
    for (const auto& sid : successors) {
      Node& s = d.nodes.at(sid);
      switch (s.kind) {
        case NodeType::Chance: {
          const std::size_t idx = parent_index(s, u);
          s.table = slice_table(s, idx, success ? 's' : 'f');
          s.parents.erase(s.parents.begin() + static_cast<std::ptrdiff_t>(idx));
          break;
        }
        case NodeType::Not:
          set_certain(s, !success);
          break;
        case NodeType::And:
          if (!success) {
            set_certain(s, false);
          } else {
            s.parents.erase(s.parents.begin() +
                            static_cast<std::ptrdiff_t>(parent_index(s, u)));
            if (s.parents.empty()) set_certain(s, true);
          }
          break;
        case NodeType::Or:
          if (success) {
            set_certain(s, true);
          } else {
            s.parents.erase(s.parents.begin() +
                            static_cast<std::ptrdiff_t>(parent_index(s, u)));
            if (s.parents.empty()) set_certain(s, false);
          }
          break;
      }
    }
    d.nodes.erase(u);
  }
  return changed;
}

// Logical node whose parents are all parentless chance nodes feeding only it.
bool computable_here(const FaultDiagram& d,
                     const std::map<NodeId, std::vector<NodeId>>& succ, const NodeId& id) {
  const Node& n = d.nodes.at(id);
  if (!is_logical(n)) return false;
  for (const auto& p : n.parents) {
    const Node& pn = d.nodes.at(p);
    if (!is_chance(pn) || !pn.parents.empty()) return false;
    const auto& ps = succ.at(p);
    if (ps.size() != 1 || ps[0] != id) return false;
  }
  return true;
}

void apply_compute(FaultDiagram& d, const NodeId& id, Trace& tr) {
  Node& n = d.nodes.at(id);
  double p = 0.0;
  switch (n.kind) {
    case NodeType::And: {
      p = 1.0;
      for (const auto& q : n.parents) p *= scalar_of(d.nodes.at(q));
      break;
    }
    case NodeType::Or: {
      double fail = 1.0;
      for (const auto& q : n.parents) fail *= 1.0 - scalar_of(d.nodes.at(q));
      p = 1.0 - fail;
      break;
    }
    case NodeType::Not:
      p = 1.0 - scalar_of(d.nodes.at(n.parents[0]));
      break;
    case NodeType::Chance:
      throw Error(ErrorCode::PreconditionNotMet, "'" + id + "' is not a logical node");
  }
  std::vector<NodeId> consumed = n.parents;
  n.kind = NodeType::Chance;
  n.parents.clear();
  n.table = CptTable{{"", p}};
  for (const auto& q : consumed) d.nodes.erase(q);
  tr.add(TraceKind::Compute, {id}, p, consumed);
}

bool compute_all_pass(FaultDiagram& d, Trace& tr) {
  bool changed = false;
  for (;;) {
    const auto succ = successor_map(d);
    NodeId pick;
    for (const auto& [id, n] : d.nodes) {
      if (computable_here(d, succ, id)) {
        pick = id;
        break;
      }
    }
    if (pick.empty()) break;
    apply_compute(d, pick, tr);
    changed = true;
  }
  return changed;
}

void apply_remove(FaultDiagram& d, const NodeId& id, const NodeId& child, Trace& tr) {
  const Node n = d.nodes.at(id);
  Node& c = d.nodes.at(child);

  std::set<NodeId> merged(c.parents.begin(), c.parents.end());
  merged.erase(id);
  merged.insert(n.parents.begin(), n.parents.end());
  const std::vector<NodeId> new_parents(merged.begin(), merged.end());
  if (new_parents.size() > kMaxCptParents) {
    throw Error(ErrorCode::PreconditionNotMet,
                "removing '" + id + "' would give '" + child + "' too many parents");
  }

  CptTable table;
  for (const auto& key : all_assignment_keys(new_parents.size())) {
    std::map<NodeId, char> row;
    for (std::size_t i = 0; i < new_parents.size(); ++i) row[new_parents[i]] = key[i];
    const double pn = n.table.at(project_key(row, n.parents));
    row[id] = 's';
    const double pc_s = c.table.at(project_key(row, c.parents));
    row[id] = 'f';
    const double pc_f = c.table.at(project_key(row, c.parents));
    table[key] = pn * pc_s + (1.0 - pn) * pc_f;
  }
  c.parents = new_parents;
  c.table = std::move(table);
  d.nodes.erase(id);
  tr.add(TraceKind::Remove, {id, child}, std::nullopt, {id});
}

bool remove_all_pass(FaultDiagram& d, Trace& tr) {
  bool changed = false;
  for (;;) {
    const auto succ = successor_map(d);
    NodeId pick, child;
    for (const auto& [id, n] : d.nodes) {
      if (!is_chance(n)) continue;
      const auto& cs = succ.at(id);
      if (cs.size() == 1 && is_chance(d.nodes.at(cs[0]))) {
        pick = id;
        child = cs[0];
        break;
      }
    }
    if (pick.empty()) break;
    apply_remove(d, pick, child, tr);
    changed = true;
  }
  return changed;
}

void apply_reverse(FaultDiagram& d, const NodeId& i, const NodeId& j, Trace& tr) {
  const Node ni = d.nodes.at(i);
  const Node nj = d.nodes.at(j);

  std::set<NodeId> cset(ni.parents.begin(), ni.parents.end());
  cset.insert(nj.parents.begin(), nj.parents.end());
  cset.erase(i);
  const std::vector<NodeId> cond(cset.begin(), cset.end());
  if (cond.size() + 1 > kMaxCptParents) {
    throw Error(ErrorCode::PreconditionNotMet,
                "reversing " + i + " -> " + j + " would build too large a CPT");
  }

  std::set<NodeId> iset = cset;
  iset.insert(j);
  const std::vector<NodeId> new_i_parents(iset.begin(), iset.end());

  CptTable tj, ti;
  bool zero_row = false;
  for (const auto& key : all_assignment_keys(cond.size())) {
    std::map<NodeId, char> row;
    for (std::size_t k = 0; k < cond.size(); ++k) row[cond[k]] = key[k];

    const double pi = ni.table.at(project_key(row, ni.parents));
    row[i] = 's';
    const double pj_is = nj.table.at(project_key(row, nj.parents));
    row[i] = 'f';
    const double pj_if = nj.table.at(project_key(row, nj.parents));
    const double pj = pi * pj_is + (1.0 - pi) * pj_if;
    tj[key] = pj;

    for (char w : {'s', 'f'}) {
      const double denom = w == 's' ? pj : 1.0 - pj;
      const double numer = pi * (w == 's' ? pj_is : 1.0 - pj_is);
      double value;
      if (denom == 0.0) {
        value = 0.5;  // the row carries no probability mass; sentinel
        zero_row = true;
      } else {
        value = std::clamp(numer / denom, 0.0, 1.0);
      }
      row[j] = w;
      ti[project_key(row, new_i_parents)] = value;
    }
  }

  d.nodes.at(j).parents = cond;
  d.nodes.at(j).table = std::move(tj);
  d.nodes.at(i).parents = new_i_parents;
  d.nodes.at(i).table = std::move(ti);
  tr.add(TraceKind::Reverse, {i, j});
  if (zero_row) {
    tr.add(TraceKind::Note,
           {"zero-mass row while reversing " + i + " -> " + j + "; sentinel 0.5 stored"});
  }
}

// True when j is reachable from i without using the direct arc i -> j.
bool has_indirect_path(const FaultDiagram& d, const NodeId& i, const NodeId& j) {
  const auto succ = successor_map(d);
  std::queue<NodeId> work;
  std::set<NodeId> seen;
  for (const auto& c : succ.at(i)) {
    if (c == j) continue;
    if (seen.insert(c).second) work.push(c);
  }
  while (!work.empty()) {
    NodeId cur = work.front();
    work.pop();
    if (cur == j) return true;
    for (const auto& c : succ.at(cur)) {
      if (seen.insert(c).second) work.push(c);
    }
  }
  return false;
}

// Shortest successor-path distance from every node to the nearest logical
// node; nodes with no such path get a large sentinel.
std::map<NodeId, int> logical_distance(const FaultDiagram& d) {
  constexpr int kFar = 1 << 20;
  std::map<NodeId, int> dist;
  std::queue<NodeId> work;
  for (const auto& [id, n] : d.nodes) {
    dist[id] = is_logical(n) ? 0 : kFar;
    if (is_logical(n)) work.push(id);
  }
  while (!work.empty()) {
    NodeId cur = work.front();
    work.pop();
    for (const auto& p : d.nodes.at(cur).parents) {
      if (dist[p] > dist[cur] + 1) {
        dist[p] = dist[cur] + 1;
        work.push(p);
      }
    }
  }
  return dist;
}

bool grandfather_pass(FaultDiagram& d, Trace& tr) {
  bool changed = false;
  std::set<NodeId> skipped;
  for (;;) {
    const auto dist = logical_distance(d);
    const auto succ = successor_map(d);
    NodeId g;
    for (const auto& [id, n] : d.nodes) {
      if (!is_chance(n) || id == d.top || skipped.count(id)) continue;
      if (dist.at(id) <= 2) continue;
      g = id;
      break;
    }
    if (g.empty()) break;
    if (succ.at(g).empty()) {
      tr.add(TraceKind::Note, {"grandfather " + g + " skipped: no successor to remove into"});
      skipped.insert(g);
      continue;
    }
    // Reverse the arc to the topologically earliest successor until a single
    // successor remains, then marginalize into it. The earliest successor
    // never has an alternate path from g, so each reversal is legal.
    for (;;) {
      const auto cs = successor_map(d).at(g);
      if (cs.size() <= 1) break;
      const auto topo = topological_order(d);
      std::map<NodeId, std::size_t> pos;
      for (std::size_t k = 0; k < topo.size(); ++k) pos[topo[k]] = k;
      NodeId earliest = cs[0];
      for (const auto& c : cs) {
        if (pos[c] < pos[earliest]) earliest = c;
      }
      apply_reverse(d, g, earliest, tr);
    }
    apply_remove(d, g, successor_map(d).at(g)[0], tr);
    changed = true;
  }
  return changed;
}

}  // namespace

FaultDiagram trim_barren(const FaultDiagram& d, Trace& trace) {
  FaultDiagram out = d;
  trim_pass(out, trace);
  return out;
}

FaultDiagram propagate_certainty(const FaultDiagram& d, Trace& trace) {
  FaultDiagram out = d;
  certainty_pass(out, trace);
  return out;
}

FaultDiagram compute_logical(const FaultDiagram& d, const NodeId& n, Trace& trace) {
  FaultDiagram out = d;
  const Node& node = node_at(out, n);
  if (!is_logical(node)) {
    throw Error(ErrorCode::PreconditionNotMet, "'" + n + "' is not a logical node");
  }
  const auto succ = successor_map(out);
  for (const auto& p : node.parents) {
    const Node& pn = out.nodes.at(p);
    if (!is_chance(pn) || !pn.parents.empty() || succ.at(p).size() != 1) {
      throw Error(ErrorCode::PreconditionNotMet,
                  "parent '" + p + "' of '" + n + "' is not a singly-connected chance node");
    }
  }
  apply_compute(out, n, trace);
  return out;
}

FaultDiagram remove_into_successor(const FaultDiagram& d, const NodeId& n, Trace& trace) {
  FaultDiagram out = d;
  const Node& node = node_at(out, n);
  if (!is_chance(node)) {
    throw Error(ErrorCode::PreconditionNotMet, "'" + n + "' is not a chance node");
  }
  const auto cs = successor_map(out).at(n);
  if (cs.size() != 1) {
    throw Error(ErrorCode::PreconditionNotMet,
                "'" + n + "' has " + std::to_string(cs.size()) + " successors, needs exactly 1");
  }
  if (!is_chance(out.nodes.at(cs[0]))) {
    throw Error(ErrorCode::PreconditionNotMet,
                "successor '" + cs[0] + "' of '" + n + "' is not a chance node");
  }
  apply_remove(out, n, cs[0], trace);
  return out;
}

FaultDiagram reverse_arc(const FaultDiagram& d, const NodeId& i, const NodeId& j, Trace& trace) {
  FaultDiagram out = d;
  const Node& nj = node_at(out, j);
  const Node& ni = node_at(out, i);
  if (!is_chance(ni) || !is_chance(nj)) {
    throw Error(ErrorCode::PreconditionNotMet, "arc reversal needs two chance nodes");
  }
  if (std::find(nj.parents.begin(), nj.parents.end(), i) == nj.parents.end()) {
    throw Error(ErrorCode::PreconditionNotMet, "no arc " + i + " -> " + j);
  }
  if (has_indirect_path(out, i, j)) {
    throw Error(ErrorCode::PreconditionNotMet,
                "another directed path from " + i + " to " + j + " exists");
  }
  apply_reverse(out, i, j, trace);
  return out;
}

FaultDiagram reduce_grandfathers(const FaultDiagram& d, Trace& trace) {
  FaultDiagram out = d;
  grandfather_pass(out, trace);
  return out;
}

FaultDiagram preprocess(const FaultDiagram& d, Trace& trace) {
  FaultDiagram out = d;
  for (;;) {
    bool any = trim_pass(out, trace);
    any |= certainty_pass(out, trace);
    any |= compute_all_pass(out, trace);
    any |= remove_all_pass(out, trace);
    any |= grandfather_pass(out, trace);
    if (!any) break;
  }
  return out;
}

FaultDiagram instantiate(const FaultDiagram& d, const NodeId& n, Outcome v, Trace& trace) {
  FaultDiagram out = d;
  const Node& node = node_at(out, n);
  if (!is_chance(node)) {
    throw Error(ErrorCode::PreconditionNotMet, "cannot instantiate logical node '" + n + "'");
  }
  if (!node.parents.empty()) {
    throw Error(ErrorCode::PreconditionNotMet,
                "'" + n + "' still has parents and cannot be instantiated");
  }
  out.nodes.at(n).table = CptTable{{"", v == Outcome::Success ? 1.0 : 0.0}};
  certainty_pass(out, trace);
  return out;
}

}  // namespace fid
