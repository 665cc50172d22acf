#include "fid/partition.hpp"

#include <algorithm>
#include <queue>

#include "fid/transforms.hpp"

namespace fid {

namespace {

// Immediate post-dominators of every node that reaches top, computed in one
// sweep over the reversed topological order (a successor's entry is always
// ready before its parents'). The top event maps to the empty id.
struct PostDomTree {
  std::map<NodeId, NodeId> ipdom;
  std::map<NodeId, int> depth;
};

NodeId nearest_common(const PostDomTree& pd, NodeId a, NodeId b) {
  while (a != b) {
    const int da = pd.depth.at(a);
    const int db = pd.depth.at(b);
    if (da >= db) a = pd.ipdom.at(a);
    if (db > da) b = pd.ipdom.at(b);
  }
  return a;
}

PostDomTree post_dominators(const FaultDiagram& d) {
  PostDomTree pd;
  pd.ipdom[d.top] = "";
  pd.depth[d.top] = 0;
  const auto topo = topological_order(d);
  const auto succ = successor_map(d);
  const auto reach = reaches_top(d);
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const NodeId& x = *it;
    if (x == d.top || !reach.count(x)) continue;
    NodeId common;
    for (const auto& c : succ.at(x)) {
      if (!reach.count(c)) continue;
      common = common.empty() ? c : nearest_common(pd, common, c);
    }
    pd.ipdom[x] = common;
    pd.depth[x] = pd.depth.at(common) + 1;
  }
  return pd;
}

// Nodes that still reach top after deleting `removed`.
std::set<NodeId> reaches_top_without(const FaultDiagram& d, const NodeId& removed) {
  std::set<NodeId> seen;
  if (d.top == removed) return seen;
  seen.insert(d.top);
  std::queue<NodeId> work;
  work.push(d.top);
  while (!work.empty()) {
    NodeId cur = work.front();
    work.pop();
    for (const auto& p : d.nodes.at(cur).parents) {
      if (p == removed) continue;
      if (seen.insert(p).second) work.push(p);
    }
  }
  return seen;
}

std::set<NodeId> ancestors_plus_self(const FaultDiagram& d, const NodeId& v) {
  std::set<NodeId> seen{v};
  std::queue<NodeId> work;
  work.push(v);
  while (!work.empty()) {
    NodeId cur = work.front();
    work.pop();
    for (const auto& p : d.nodes.at(cur).parents) {
      if (seen.insert(p).second) work.push(p);
    }
  }
  return seen;
}

// Every member except the cut-vertex must lose its path to top once the
// cut-vertex is deleted, and no member may depend on a node outside the
// module. Together these make the module exchangeable for a single chance
// node carrying its marginal.
bool module_self_contained(const FaultDiagram& d, const Module& m) {
  for (const auto& x : m.members) {
    for (const auto& p : d.nodes.at(x).parents) {
      if (!m.members.count(p)) return false;
    }
  }
  const auto reach = reaches_top_without(d, m.cut_vertex);
  for (const auto& x : m.members) {
    if (x != m.cut_vertex && reach.count(x)) return false;
  }
  return true;
}

std::string partition_key(const Partition& p) { return *p.members.begin(); }

std::vector<const ControlGraph::Vertex*> ordered_vertices(const ControlGraph& cg,
                                                          TieOrder tie_order) {
  std::vector<const ControlGraph::Vertex*> out;
  out.reserve(cg.vertices.size());
  for (const auto& [key, v] : cg.vertices) out.push_back(&v);
  std::stable_sort(out.begin(), out.end(),
                   [&](const ControlGraph::Vertex* a, const ControlGraph::Vertex* b) {
                     if (a->actionable != b->actionable) return a->actionable;
                     if (a->distance_to_top != b->distance_to_top) {
                       return a->distance_to_top < b->distance_to_top;
                     }
                     if (a->out_degree != b->out_degree) return a->out_degree > b->out_degree;
                     const std::string& ka = partition_key(a->partition);
                     const std::string& kb = partition_key(b->partition);
                     return tie_order == TieOrder::Lex ? ka < kb : ka > kb;
                   });
  return out;
}

std::string join_ids(const std::vector<NodeId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ",";
    out += ids[i];
  }
  return out;
}

std::vector<NodeId> graph_topological_order(const std::set<NodeId>& members,
                                            const std::map<NodeId, std::set<NodeId>>& parents) {
  std::map<NodeId, std::size_t> indegree;
  std::map<NodeId, std::set<NodeId>> children;
  for (const auto& m : members) indegree[m] = 0;
  for (const auto& [m, ps] : parents) {
    indegree[m] = ps.size();
    for (const auto& p : ps) children[p].insert(m);
  }
  std::set<NodeId> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.insert(id);
  }
  std::vector<NodeId> order;
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

std::map<NodeId, std::set<NodeId>> children_of(const std::set<NodeId>& members,
                                               const std::map<NodeId, std::set<NodeId>>& parents) {
  std::map<NodeId, std::set<NodeId>> ch;
  for (const auto& m : members) ch[m];
  for (const auto& [m, ps] : parents) {
    for (const auto& p : ps) ch[p].insert(m);
  }
  return ch;
}

double solve_impl(const FaultDiagram& d0, const SolveOptions& opt, Trace& tr);

}  // namespace

std::vector<Partition> find_partitions(const FaultDiagram& d) {
  const auto succ = successor_map(d);
  std::vector<Partition> out;

  std::set<NodeId> assigned;
  for (const auto& [id, n] : d.nodes) {
    if (!is_chance(n) || assigned.count(id)) continue;
    // Flood the chance block through arcs between chance nodes, both ways.
    std::set<NodeId> block;
    std::queue<NodeId> work;
    work.push(id);
    block.insert(id);
    while (!work.empty()) {
      NodeId cur = work.front();
      work.pop();
      for (const auto& p : d.nodes.at(cur).parents) {
        if (is_chance(d.nodes.at(p)) && block.insert(p).second) work.push(p);
      }
      for (const auto& c : succ.at(cur)) {
        if (is_chance(d.nodes.at(c)) && block.insert(c).second) work.push(c);
      }
    }
    assigned.insert(block.begin(), block.end());
    Partition p;
    p.members = std::move(block);
    p.kind = PartitionKind::ChanceBlock;
    p.ird = immediate_reverse_dominator(d, p.members);
    out.push_back(std::move(p));
  }

  for (const auto& [id, n] : d.nodes) {
    if (is_logical(n) && succ.at(id).size() >= 2) {
      Partition p;
      p.members = {id};
      p.kind = PartitionKind::MultiSuccessorLogical;
      p.ird = immediate_reverse_dominator(d, p.members);
      out.push_back(std::move(p));
    }
  }

  std::sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
    return *a.members.begin() < *b.members.begin();
  });
  return out;
}

NodeId immediate_reverse_dominator(const FaultDiagram& d, const std::set<NodeId>& members) {
  const auto reach = reaches_top(d);
  for (const auto& m : members) {
    node_at(d, m);
    if (!reach.count(m)) {
      throw Error(ErrorCode::NoPathToTop, "'" + m + "' has no directed path to the top event");
    }
  }
  const auto pd = post_dominators(d);
  NodeId cur;
  for (const auto& m : members) {
    cur = cur.empty() ? m : nearest_common(pd, cur, m);
  }
  while (members.count(cur) && cur != d.top) cur = pd.ipdom.at(cur);
  return cur;
}

ControlGraph build_control_graph(const FaultDiagram& d, const std::vector<Partition>& ps) {
  const auto succ = successor_map(d);
  std::map<NodeId, std::string> owner;
  for (const auto& p : ps) {
    for (const auto& m : p.members) owner[m] = partition_key(p);
  }

  ControlGraph cg;
  for (const auto& p : ps) {
    const std::string key = partition_key(p);
    ControlGraph::Vertex v;
    v.partition = p;
    if (p.members.count(d.top)) v.edges.insert("");
    std::set<NodeId> seen;
    std::queue<NodeId> work;
    for (const auto& m : p.members) {
      for (const auto& c : succ.at(m)) {
        if (!p.members.count(c) && seen.insert(c).second) work.push(c);
      }
    }
    while (!work.empty()) {
      NodeId cur = work.front();
      work.pop();
      auto it = owner.find(cur);
      if (it != owner.end() && it->second != key) {
        v.edges.insert(it->second);
        continue;
      }
      if (cur == d.top) {
        v.edges.insert("");
        continue;
      }
      for (const auto& c : succ.at(cur)) {
        if (seen.insert(c).second) work.push(c);
      }
    }
    v.out_degree = static_cast<int>(v.edges.size());
    if (p.kind == PartitionKind::MultiSuccessorLogical || p.members.size() >= 2) {
      v.actionable = true;
    } else {
      // A lone chance node is worth processing only if it feeds several places.
      v.actionable = succ.at(*p.members.begin()).size() >= 2;
    }
    cg.vertices.emplace(key, std::move(v));
  }

  // Unweighted distance to the top vertex over the partition edges.
  std::map<std::string, std::set<std::string>> rev;
  for (const auto& [key, v] : cg.vertices) {
    for (const auto& e : v.edges) rev[e].insert(key);
  }
  std::map<std::string, int> dist;
  dist[""] = 0;
  std::queue<std::string> work;
  work.push("");
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop();
    for (const auto& from : rev[cur]) {
      if (!dist.count(from)) {
        dist[from] = dist[cur] + 1;
        work.push(from);
      }
    }
  }
  for (auto& [key, v] : cg.vertices) {
    v.distance_to_top = dist.count(key) ? dist[key] : (1 << 20);
  }
  return cg;
}

Partition select_partition(const ControlGraph& cg, TieOrder tie_order) {
  if (cg.vertices.empty()) {
    throw Error(ErrorCode::PreconditionNotMet, "control graph has no partitions");
  }
  return ordered_vertices(cg, tie_order).front()->partition;
}

Module select_module(const FaultDiagram& d, const Partition& p, Trace& trace) {
  std::vector<NodeId> candidates;
  for (const auto& [id, n] : d.nodes) {
    if (p.members.count(id)) continue;
    const auto reach = reaches_top_without(d, id);
    bool disconnects = true;
    for (const auto& m : p.members) {
      if (reach.count(m)) {
        disconnects = false;
        break;
      }
    }
    if (disconnects) candidates.push_back(id);
  }
  trace.add(TraceKind::Note,
            {"cut-vertex candidates for " + format_id_set(p.members) + ": " + join_ids(candidates)});
  Module m;
  m.cut_vertex = p.ird;
  m.members = ancestors_plus_self(d, p.ird);
  return m;
}

PartitionGraph build_partition_graph(const FaultDiagram& d, const Partition& p) {
  if (p.kind != PartitionKind::ChanceBlock) {
    throw Error(ErrorCode::NotAChanceBlock, "partition graphs exist for chance blocks only");
  }
  const auto succ = successor_map(d);
  PartitionGraph pg;
  pg.members = p.members;
  for (const auto& m : p.members) {
    pg.parents[m];
    for (const auto& par : d.nodes.at(m).parents) {
      if (p.members.count(par)) pg.parents[m].insert(par);
    }
    for (const auto& c : succ.at(m)) {
      if (is_logical(d.nodes.at(c))) {
        pg.feeds_sink.insert(m);
        break;
      }
    }
  }
  return pg;
}

InstantiationPlan plan_instantiations(const PartitionGraph& pg) {
  InstantiationPlan plan;
  const auto original_children = children_of(pg.members, pg.parents);
  const auto topo = graph_topological_order(pg.members, pg.parents);

  // Candidate source nodes, inspected sink-most first.
  std::vector<NodeId> visit;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    if (!original_children.at(*it).empty()) visit.push_back(*it);
  }

  auto work = pg.parents;
  for (const auto& q : visit) {
    const auto ch = children_of(pg.members, work);
    const std::size_t chance_successors = ch.at(q).size();
    if (chance_successors == 0) continue;  // only logical successors remain; computing handles it
    if (chance_successors == 1) {
      plan.integrate.push_back(q);
      continue;
    }
    plan.instantiate.push_back(q);
    while (!work.at(q).empty()) {
      // The topologically last parent has no path to q around the direct arc.
      const auto order = graph_topological_order(pg.members, work);
      std::map<NodeId, std::size_t> pos;
      for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
      NodeId w = *work.at(q).begin();
      for (const auto& cand : work.at(q)) {
        if (pos[cand] > pos[w]) w = cand;
      }
      auto cond = work.at(w);
      cond.insert(work.at(q).begin(), work.at(q).end());
      cond.erase(w);
      work.at(q) = cond;
      cond.insert(q);
      work.at(w) = cond;
      plan.reversals.emplace_back(w, q);
    }
  }
  return plan;
}

FaultDiagram solve_module(const FaultDiagram& d, const Module& m, const SolveOptions& opt,
                          Trace& trace) {
  node_at(d, m.cut_vertex);
  if (!module_self_contained(d, m)) {
    throw Error(ErrorCode::ModuleNotReducible,
                "module at '" + m.cut_vertex + "' is entangled with the rest of the diagram");
  }
  trace.add(TraceKind::Module, {m.cut_vertex});

  FaultDiagram sub;
  sub.top = m.cut_vertex;
  for (const auto& id : m.members) sub.nodes.emplace(id, d.nodes.at(id));
  const double p = solve_impl(sub, opt, trace);

  FaultDiagram out = d;
  std::vector<NodeId> removed;
  for (const auto& id : m.members) {
    if (id != m.cut_vertex) {
      out.nodes.erase(id);
      removed.push_back(id);
    }
  }
  Node& cv = out.nodes.at(m.cut_vertex);
  cv.kind = NodeType::Chance;
  cv.parents.clear();
  cv.table = CptTable{{"", p}};
  trace.add(TraceKind::Combine, {m.cut_vertex}, p, removed);
  return out;
}

namespace {

double solve_impl(const FaultDiagram& d0, const SolveOptions& opt, Trace& tr) {
  FaultDiagram d = d0;
  for (;;) {
    d = preprocess(d, tr);
    if (d.nodes.size() == 1) {
      return d.nodes.begin()->second.table.at("");
    }

    const auto ps = find_partitions(d);
    const auto cg = build_control_graph(d, ps);
    const auto order = ordered_vertices(cg, opt.tie_order);
    for (const auto* v : order) {
      tr.add(TraceKind::Partition, {format_id_set(v->partition.members)});
      tr.add(TraceKind::Ird, {format_id_set(v->partition.members), v->partition.ird});
    }

    // Prefer replacing a whole self-contained module by its marginal.
    bool advanced = false;
    for (const auto* v : order) {
      const Partition& p = v->partition;
      if (p.ird == d.top) continue;
      Module m;
      m.cut_vertex = p.ird;
      m.members = ancestors_plus_self(d, p.ird);
      if (!module_self_contained(d, m)) continue;
      m = select_module(d, p, tr);
      d = solve_module(d, m, opt, tr);
      advanced = true;
      break;
    }
    if (advanced) continue;

    // No module available: condition on a node of the best chance block,
    // after the reversals its partition graph asks for.
    NodeId q;
    for (const auto* v : order) {
      if (v->partition.kind != PartitionKind::ChanceBlock) continue;
      const auto pg = build_partition_graph(d, v->partition);
      const auto plan = plan_instantiations(pg);
      for (const auto& [from, to] : plan.reversals) d = reverse_arc(d, from, to, tr);
      for (const auto& cand : plan.instantiate) {
        if (d.nodes.at(cand).parents.empty()) {
          q = cand;
          break;
        }
      }
      if (q.empty()) {
        for (const auto& member : v->partition.members) {
          if (member != d.top && d.nodes.at(member).parents.empty()) {
            q = member;
            break;
          }
        }
      }
      break;
    }
    if (q.empty()) {
      for (const auto& [id, n] : d.nodes) {
        if (id != d.top && is_chance(n) && n.parents.empty()) {
          q = id;
          break;
        }
      }
    }
    if (q.empty()) {
      throw Error(ErrorCode::ModuleNotReducible,
                  "no self-contained module and no conditioning candidate");
    }

    const double pq = d.nodes.at(q).table.at("");
    tr.add(TraceKind::Instantiate, {q, "s"}, pq, {q});
    const double on_success = solve_impl(instantiate(d, q, Outcome::Success, tr), opt, tr);
    tr.add(TraceKind::Instantiate, {q, "f"}, 1.0 - pq, {q});
    const double on_failure = solve_impl(instantiate(d, q, Outcome::Failure, tr), opt, tr);
    const double result = pq * on_success + (1.0 - pq) * on_failure;
    tr.add(TraceKind::Combine, {d.top}, result);
    return result;
  }
}

}  // namespace

double solve(const FaultDiagram& d, const SolveOptions& opt, Trace& trace) {
  return solve_impl(d, opt, trace);
}

}  // namespace fid
