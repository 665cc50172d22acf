#include "fid/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <random>

#include <json.hpp>

namespace fid {

namespace {

using nlohmann::json;

[[noreturn]] void syntax_error(const std::string& what) {
  throw Error(ErrorCode::SyntaxError, what);
}

std::string line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

NodeType kind_from_string(const std::string& s, const std::string& id) {
  if (s == "and") return NodeType::And;
  if (s == "or") return NodeType::Or;
  if (s == "not") return NodeType::Not;
  if (s == "chance") return NodeType::Chance;
  syntax_error("node '" + id + "' has unknown kind '" + s + "'");
}

std::string shortest_decimal(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

FaultDiagram parse_diagram(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    syntax_error(std::string(e.what()) + " (" + line_and_column(text, e.byte) + ")");
  }

  if (!doc.is_object()) syntax_error("document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "top" && key != "nodes") syntax_error("unknown document key '" + key + "'");
  }
  if (!doc.contains("top") || !doc["top"].is_string()) {
    syntax_error("document needs a string 'top'");
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    syntax_error("document needs a 'nodes' array");
  }

  RawDiagram raw;
  raw.top = doc["top"].get<std::string>();
  for (const auto& jn : doc["nodes"]) {
    if (!jn.is_object()) syntax_error("each node must be an object");
    RawNode rn;
    if (!jn.contains("id") || !jn["id"].is_string()) syntax_error("node without string 'id'");
    rn.id = jn["id"].get<std::string>();
    for (const auto& [key, value] : jn.items()) {
      if (key != "id" && key != "kind" && key != "parents" && key != "cpt") {
        syntax_error("node '" + rn.id + "' has unknown key '" + key + "'");
      }
    }
    if (!jn.contains("kind") || !jn["kind"].is_string()) {
      syntax_error("node '" + rn.id + "' needs a string 'kind'");
    }
    rn.kind = kind_from_string(jn["kind"].get<std::string>(), rn.id);
    if (!jn.contains("parents") || !jn["parents"].is_array()) {
      syntax_error("node '" + rn.id + "' needs a 'parents' array");
    }
    for (const auto& jp : jn["parents"]) {
      if (!jp.is_string()) syntax_error("node '" + rn.id + "' has a non-string parent");
      rn.parents.push_back(jp.get<std::string>());
    }
    const bool has_cpt = jn.contains("cpt");
    if (rn.kind == NodeType::Chance) {
      if (!has_cpt || !jn["cpt"].is_object()) {
        syntax_error("chance node '" + rn.id + "' is missing its cpt");
      }
      for (const auto& [key, value] : jn["cpt"].items()) {
        if (!value.is_number()) {
          syntax_error("node '" + rn.id + "' cpt entry '" + key + "' is not a number");
        }
        rn.table[key] = value.get<double>();
      }
    } else if (has_cpt) {
      syntax_error("logical node '" + rn.id + "' must not carry a cpt");
    }
    raw.nodes.push_back(std::move(rn));
  }

  return validate_diagram(raw);
}

std::string serialize_diagram(const FaultDiagram& d) {
  std::string out = "{\n  \"top\": \"" + d.top + "\",\n  \"nodes\": [\n";
  bool first = true;
  for (const auto& [id, n] : d.nodes) {  // std::map iterates sorted by id
    if (!first) out += ",\n";
    first = false;
    out += "    {\"id\": \"" + id + "\", \"kind\": \"" + to_string(n.kind) + "\", \"parents\": [";
    for (std::size_t i = 0; i < n.parents.size(); ++i) {
      if (i) out += ", ";
      out += "\"" + n.parents[i] + "\"";
    }
    out += "]";
    if (is_chance(n)) {
      out += ", \"cpt\": {";
      bool first_row = true;
      for (const auto& [key, p] : n.table) {  // sorted keys
        if (!first_row) out += ", ";
        first_row = false;
        out += "\"" + key + "\": " + shortest_decimal(p);
      }
      out += "}";
    }
    out += "}";
  }
  out += "\n  ]\n}\n";
  return out;
}

std::string export_dot(const FaultDiagram& d) {
  std::string out = "digraph fault_diagram {\n";
  for (const auto& [id, n] : d.nodes) {
    out += "  \"" + id + "\" [";
    if (is_chance(n)) {
      out += "shape=ellipse";
      if (n.parents.empty()) {
        out += ", label=\"" + id + "\\np=" + shortest_decimal(n.table.at("")) + "\"";
      } else {
        out += ", label=\"" + id + "\"";
      }
    } else {
      std::string op = n.kind == NodeType::And ? "AND" : n.kind == NodeType::Or ? "OR" : "NOT";
      out += "shape=box, label=\"" + id + "\\n" + op + "\"";
    }
    if (id == d.top) out += ", peripheries=2";
    out += "];\n";
  }
  std::vector<std::pair<NodeId, NodeId>> arcs;
  for (const auto& [id, n] : d.nodes) {
    for (const auto& p : n.parents) arcs.emplace_back(p, id);
  }
  std::sort(arcs.begin(), arcs.end());
  for (const auto& [from, to] : arcs) {
    out += "  \"" + from + "\" -> \"" + to + "\";\n";
  }
  out += "}\n";
  return out;
}

namespace {

std::string padded_number(std::size_t i, std::size_t width) {
  std::string s = std::to_string(i);
  while (s.size() < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

FaultDiagram generate_random(const GeneratorParams& params) {
  if (params.chance_count == 0 || params.max_parents == 0 ||
      !(params.shared_subsystem_bias >= 0.0 && params.shared_subsystem_bias <= 1.0)) {
    throw Error(ErrorCode::InfeasibleParams, "generator parameters out of range");
  }
  if (params.max_parents > 8) {
    throw Error(ErrorCode::InfeasibleParams, "max_parents above 8 would blow up CPTs");
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> prob(0.05, 0.95);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t cwidth = std::to_string(params.chance_count).size();
  const std::size_t lwidth = std::to_string(std::max<std::size_t>(params.logical_count, 1)).size();

  RawDiagram raw;
  std::vector<NodeId> chance_ids;
  std::vector<NodeId> all_ids;
  std::map<NodeId, std::size_t> successor_count;

  auto pick_parents = [&](const std::vector<NodeId>& pool, std::size_t count) {
    std::set<NodeId> chosen;
    count = std::min(count, pool.size());
    while (chosen.size() < count) {
      std::vector<NodeId> candidates;
      if (unit(rng) < params.shared_subsystem_bias) {
        for (const auto& id : pool) {
          if (successor_count[id] > 0 && !chosen.count(id)) candidates.push_back(id);
        }
      }
      if (candidates.empty()) {
        for (const auto& id : pool) {
          if (!chosen.count(id)) candidates.push_back(id);
        }
      }
      std::uniform_int_distribution<std::size_t> at(0, candidates.size() - 1);
      chosen.insert(candidates[at(rng)]);
    }
    std::vector<NodeId> parents(chosen.begin(), chosen.end());
    for (const auto& p : parents) ++successor_count[p];
    return parents;
  };

  for (std::size_t i = 0; i < params.chance_count; ++i) {
    RawNode rn;
    rn.id = "c" + padded_number(i + 1, cwidth);
    rn.kind = NodeType::Chance;
    if (!chance_ids.empty()) {
      std::uniform_int_distribution<std::size_t> n_parents(
          0, std::min(params.max_parents, chance_ids.size()));
      rn.parents = pick_parents(chance_ids, n_parents(rng));
    }
    for (const auto& key : all_assignment_keys(rn.parents.size())) {
      rn.table[key] = prob(rng);
    }
    chance_ids.push_back(rn.id);
    all_ids.push_back(rn.id);
    raw.nodes.push_back(std::move(rn));
  }

  if (params.logical_count == 0) {
    // Only possible top: the last chance node, which nothing references.
    raw.top = chance_ids.back();
    return validate_diagram(raw);
  }

  for (std::size_t i = 0; i < params.logical_count; ++i) {
    RawNode rn;
    rn.id = "g" + padded_number(i + 1, lwidth);
    const double k = unit(rng);
    rn.kind = k < 0.1 ? NodeType::Not : k < 0.55 ? NodeType::And : NodeType::Or;
    const bool is_top = (i + 1 == params.logical_count);
    std::vector<NodeId> pool = all_ids;
    if (is_top) {
      // Prefer current sinks so most of the graph bears on the top event.
      std::vector<NodeId> sinks;
      for (const auto& id : all_ids) {
        if (successor_count[id] == 0) sinks.push_back(id);
      }
      if (!sinks.empty() && sinks.size() >= 2) pool = sinks;
    }
    if (rn.kind == NodeType::Not) {
      rn.parents = pick_parents(pool, 1);
    } else {
      const std::size_t hi = std::min(params.max_parents, pool.size());
      const std::size_t lo = std::min<std::size_t>(2, hi);
      std::uniform_int_distribution<std::size_t> n_parents(lo, hi);
      rn.parents = pick_parents(pool, n_parents(rng));
    }
    all_ids.push_back(rn.id);
    raw.nodes.push_back(std::move(rn));
  }

  raw.top = raw.nodes.back().id;
  return validate_diagram(raw);
}

}  // namespace fid
