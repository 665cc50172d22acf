#include <doctest.h>

#include <cmath>

#include "fid/oracle.hpp"
#include "fid/transforms.hpp"
#include "helpers.hpp"

using namespace fid;

namespace {

double oracle_delta(const FaultDiagram& before, const FaultDiagram& after) {
  return std::abs(oracle_top_probability(before) - oracle_top_probability(after));
}

bool has_event(const Trace& tr, TraceKind kind, const std::vector<std::string>& subjects) {
  for (const auto& e : tr.events()) {
    if (e.kind == kind && e.subjects == subjects) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("trim_barren") {
  SUBCASE("fixture: exactly X goes") {
    auto d = fidtest::load_fixture("walkthrough.json");
    Trace tr;
    auto out = trim_barren(d, tr);
    CHECK(out.nodes.size() == 23);
    CHECK(!out.nodes.count("X"));
    CHECK(has_event(tr, TraceKind::Trim, {"X"}));
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
  SUBCASE("identity when every node reaches top") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"a","kind":"chance","parents":[],"cpt":{"":0.4}},
          {"id":"t","kind":"not","parents":["a"]}]})");
    Trace tr;
    CHECK(trim_barren(d, tr) == d);
    CHECK(tr.size() == 0);
  }
  SUBCASE("isolated sub-DAG removed, oracle preserved; idempotent") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      auto d = fidtest::gen(seed, 8, 4);
      Trace tr;
      auto out = trim_barren(d, tr);
      CHECK(oracle_delta(d, out) <= 1e-12);
      Trace tr2;
      CHECK(trim_barren(out, tr2) == out);
    }
  }
}

TEST_CASE("propagate_certainty") {
  SUBCASE("sure-success parent of an OR") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"w","kind":"chance","parents":[],"cpt":{"":1}},
          {"id":"y","kind":"chance","parents":[],"cpt":{"":0.3}},
          {"id":"f","kind":"or","parents":["w","y"]},
          {"id":"t","kind":"not","parents":["f"]}]})");
    Trace tr;
    auto out = propagate_certainty(d, tr);
    CHECK(!out.nodes.count("w"));
    CHECK(!out.nodes.count("f"));
    CHECK(has_event(tr, TraceKind::Certain, {"w"}));
    CHECK(has_event(tr, TraceKind::Certain, {"f"}));
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
  SUBCASE("NOT of a sure success becomes a deleted sure failure") {
    auto d = parse_diagram(
        R"({"top":"c","nodes":[
          {"id":"w","kind":"chance","parents":[],"cpt":{"":1}},
          {"id":"e","kind":"not","parents":["w"]},
          {"id":"y","kind":"chance","parents":[],"cpt":{"":0.4}},
          {"id":"c","kind":"or","parents":["e","y"]}]})");
    Trace tr;
    auto out = propagate_certainty(d, tr);
    CHECK(!out.nodes.count("e"));
    CHECK(out.nodes.at("c").parents == std::vector<NodeId>{"y"});
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
  SUBCASE("AND keeps only its uncertain parent") {
    auto d = parse_diagram(
        R"({"top":"g","nodes":[
          {"id":"a","kind":"chance","parents":[],"cpt":{"":1}},
          {"id":"b","kind":"chance","parents":[],"cpt":{"":0.6}},
          {"id":"g","kind":"and","parents":["a","b"]}]})");
    Trace tr;
    auto out = propagate_certainty(d, tr);
    CHECK(out.nodes.at("g").parents == std::vector<NodeId>{"b"});
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
  SUBCASE("certain parent of a chance node slices its table") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"u","kind":"chance","parents":[],"cpt":{"":0}},
          {"id":"c","kind":"chance","parents":["u"],"cpt":{"s":0.9,"f":0.2}},
          {"id":"t","kind":"not","parents":["c"]}]})");
    Trace tr;
    auto out = propagate_certainty(d, tr);
    CHECK(!out.nodes.count("u"));
    CHECK(out.nodes.at("c").parents.empty());
    CHECK(out.nodes.at("c").table.at("") == 0.2);
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
  SUBCASE("idempotent on generated diagrams with a forced certainty") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      auto d = fidtest::gen(seed, 8, 4);
      for (auto& [id, n] : d.nodes) {
        if (is_chance(n) && n.parents.empty()) {
          n.table[""] = seed % 2 ? 1.0 : 0.0;
          break;
        }
      }
      Trace tr;
      auto out = propagate_certainty(d, tr);
      CHECK(oracle_delta(d, out) <= 1e-12);
      Trace tr2;
      CHECK(propagate_certainty(out, tr2) == out);
    }
  }
}

TEST_CASE("compute_logical") {
  auto build = [](const char* kind) {
    return parse_diagram(std::string(
        R"({"top":"g","nodes":[
          {"id":"a","kind":"chance","parents":[],"cpt":{"":0.9}},
          {"id":"b","kind":"chance","parents":[],"cpt":{"":0.8}},
          {"id":"g","kind":")") + kind + R"(","parents":["a","b"]}]})");
  };
  SUBCASE("AND multiplies") {
    Trace tr;
    auto out = compute_logical(build("and"), "g", tr);
    CHECK(out.nodes.size() == 1);
    CHECK(out.nodes.at("g").table.at("") == doctest::Approx(0.72));
  }
  SUBCASE("OR complements") {
    Trace tr;
    auto out = compute_logical(build("or"), "g", tr);
    CHECK(out.nodes.at("g").table.at("") == doctest::Approx(0.98));
  }
  SUBCASE("NOT at the boundary") {
    auto d = parse_diagram(
        R"({"top":"g","nodes":[
          {"id":"a","kind":"chance","parents":[],"cpt":{"":0}},
          {"id":"g","kind":"not","parents":["a"]}]})");
    Trace tr;
    auto out = compute_logical(d, "g", tr);
    CHECK(out.nodes.at("g").table.at("") == 1.0);
  }
  SUBCASE("blocking parent is named") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"a","kind":"chance","parents":[],"cpt":{"":0.9}},
          {"id":"g","kind":"not","parents":["a"]},
          {"id":"t","kind":"or","parents":["a","g"]}]})");
    // a feeds both g and t, so neither gate is computable
    Trace tr;
    CHECK_THROWS_WITH_AS(compute_logical(d, "g", tr), doctest::Contains("'a'"), Error);
  }
}

TEST_CASE("remove_into_successor") {
  SUBCASE("parentless into one-parent: plain mixture") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"n","kind":"chance","parents":[],"cpt":{"":0.5}},
          {"id":"c","kind":"chance","parents":["n"],"cpt":{"s":0.9,"f":0.1}},
          {"id":"t","kind":"not","parents":["c"]}]})");
    Trace tr;
    auto out = remove_into_successor(d, "n", tr);
    CHECK(!out.nodes.count("n"));
    CHECK(out.nodes.at("c").parents.empty());
    CHECK(out.nodes.at("c").table.at("") == doctest::Approx(0.5));
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
  SUBCASE("certain source degenerates to a row restriction") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"n","kind":"chance","parents":[],"cpt":{"":1}},
          {"id":"c","kind":"chance","parents":["n"],"cpt":{"s":0.9,"f":0.1}},
          {"id":"t","kind":"not","parents":["c"]}]})");
    Trace tr;
    auto out = remove_into_successor(d, "n", tr);
    CHECK(out.nodes.at("c").table.at("") == doctest::Approx(0.9));
  }
  SUBCASE("fixture: M removed into K preserves the oracle") {
    auto d = fidtest::load_fixture("walkthrough.json");
    Trace tr;
    auto out = remove_into_successor(d, "M", tr);
    CHECK(!out.nodes.count("M"));
    const auto& kp = out.nodes.at("K").parents;
    CHECK(std::find(kp.begin(), kp.end(), "M") == kp.end());
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
  SUBCASE("precondition violations") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"n","kind":"chance","parents":[],"cpt":{"":0.5}},
          {"id":"t","kind":"not","parents":["n"]}]})");
    Trace tr;
    CHECK_THROWS_AS(remove_into_successor(d, "n", tr), Error);  // successor is logical
  }
}

TEST_CASE("reverse_arc") {
  SUBCASE("hand Bayes arithmetic") {
    auto d = parse_diagram(
        R"({"top":"j","nodes":[
          {"id":"i","kind":"chance","parents":[],"cpt":{"":0.5}},
          {"id":"j","kind":"chance","parents":["i"],"cpt":{"s":0.9,"f":0.1}}]})");
    Trace tr;
    auto out = reverse_arc(d, "i", "j", tr);
    CHECK(out.nodes.at("j").parents.empty());
    CHECK(out.nodes.at("j").table.at("") == doctest::Approx(0.5));
    CHECK(out.nodes.at("i").parents == std::vector<NodeId>{"j"});
    CHECK(out.nodes.at("i").table.at("s") == doctest::Approx(0.9));
    CHECK(out.nodes.at("i").table.at("f") == doctest::Approx(0.1));
  }
  SUBCASE("certainty passes through, zero-mass rows get the sentinel") {
    auto d = fidtest::load_fixture("boundary_zero_mass.json");
    const auto before = oracle_marginals(d);
    Trace tr;
    auto out = reverse_arc(d, "i", "j", tr);
    CHECK(out.nodes.at("j").table.at("") == doctest::Approx(0.0));
    CHECK(out.nodes.at("i").table.at("s") == 0.5);  // sentinel on the massless row
    bool noted = false;
    for (const auto& e : tr.events()) {
      if (e.kind == TraceKind::Note) noted = true;
    }
    CHECK(noted);
    const auto after = oracle_marginals(out);
    for (const auto& [id, p] : before) CHECK(std::abs(after.at(id) - p) <= 1e-12);
  }
  SUBCASE("every oracle marginal is preserved on random legal reversals") {
    int done = 0;
    for (std::uint64_t seed = 1; done < 40 && seed <= 400; ++seed) {
      auto d = fidtest::gen(seed, 6, 2);
      // first legal chance->chance arc
      NodeId from, to;
      for (const auto& [id, n] : d.nodes) {
        if (!is_chance(n)) continue;
        for (const auto& p : n.parents) {
          Trace probe;
          try {
            auto out = reverse_arc(d, p, id, probe);
            from = p;
            to = id;
            const auto before = oracle_marginals(d);
            const auto after = oracle_marginals(out);
            for (const auto& [mid, mp] : before) CHECK(std::abs(after.at(mid) - mp) <= 1e-12);
            ++done;
          } catch (const Error&) {
            continue;
          }
          break;
        }
        if (!from.empty()) break;
      }
    }
    CHECK(done >= 40);
  }
  SUBCASE("double reversal is oracle-equivalent to the original") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"a","kind":"chance","parents":[],"cpt":{"":0.3}},
          {"id":"b","kind":"chance","parents":["a"],"cpt":{"s":0.8,"f":0.25}},
          {"id":"t","kind":"and","parents":["a","b"]}]})");
    Trace tr;
    auto once = reverse_arc(d, "a", "b", tr);
    auto twice = reverse_arc(once, "b", "a", tr);
    const auto before = oracle_marginals(d);
    const auto after = oracle_marginals(twice);
    for (const auto& [id, p] : before) CHECK(std::abs(after.at(id) - p) <= 1e-12);
  }
  SUBCASE("alternate path blocks the reversal") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"a","kind":"chance","parents":[],"cpt":{"":0.3}},
          {"id":"b","kind":"chance","parents":["a"],"cpt":{"s":0.8,"f":0.25}},
          {"id":"c","kind":"chance","parents":["a","b"],"cpt":{"ss":0.9,"sf":0.4,"fs":0.6,"ff":0.1}},
          {"id":"t","kind":"not","parents":["c"]}]})");
    Trace tr;
    CHECK_THROWS_AS(reverse_arc(d, "a", "c", tr), Error);  // a -> b -> c exists
    CHECK_NOTHROW(reverse_arc(d, "b", "c", tr));
  }
}

TEST_CASE("reduce_grandfathers") {
  SUBCASE("fixture: L reversed through H then removed into K") {
    auto d = fidtest::load_fixture("walkthrough.json");
    Trace tr;
    auto out = reduce_grandfathers(d, tr);
    CHECK(!out.nodes.count("L"));
    CHECK(has_event(tr, TraceKind::Reverse, {"L", "H"}));
    CHECK(has_event(tr, TraceKind::Remove, {"L", "K"}));
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
  SUBCASE("no grandfathers: identity") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"a","kind":"chance","parents":[],"cpt":{"":0.4}},
          {"id":"t","kind":"not","parents":["a"]}]})");
    Trace tr;
    CHECK(reduce_grandfathers(d, tr) == d);
  }
  SUBCASE("three-arc chain head is eliminated") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"c3","kind":"chance","parents":[],"cpt":{"":0.3}},
          {"id":"c2","kind":"chance","parents":["c3"],"cpt":{"s":0.7,"f":0.2}},
          {"id":"c1","kind":"chance","parents":["c2"],"cpt":{"s":0.9,"f":0.4}},
          {"id":"x","kind":"chance","parents":[],"cpt":{"":0.5}},
          {"id":"t","kind":"and","parents":["c1","x"]}]})");
    Trace tr;
    auto out = reduce_grandfathers(d, tr);
    CHECK(!out.nodes.count("c3"));
    CHECK(out.nodes.count("c2"));
    CHECK(oracle_delta(d, out) <= 1e-12);
  }
}

TEST_CASE("preprocess") {
  SUBCASE("already minimal diagram is fixed") {
    auto d = parse_diagram(
        R"({"top":"T","nodes":[{"id":"T","kind":"chance","parents":[],"cpt":{"":0.7}}]})");
    Trace tr;
    CHECK(preprocess(d, tr) == d);
  }
  SUBCASE("fixture reaches the narrated post-preprocessing state") {
    auto d = fidtest::load_fixture("walkthrough.json");
    Trace tr;
    auto out = preprocess(d, tr);
    const std::set<NodeId> want = {"A", "B", "C", "H", "I", "J", "K", "N", "O", "P", "Q", "T"};
    std::set<NodeId> got;
    for (const auto& [id, n] : out.nodes) got.insert(id);
    CHECK(got == want);
    CHECK(oracle_delta(d, out) <= 1e-12);
    Trace tr2;
    CHECK(preprocess(out, tr2) == out);
  }
  SUBCASE("node count strictly drops or the diagram is fixed; oracle preserved") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      auto d = fidtest::gen(seed, 8, 5, 0.1 * (seed % 10));
      Trace tr;
      auto out = preprocess(d, tr);
      CHECK(out.nodes.size() <= d.nodes.size());
      if (out.nodes.size() == d.nodes.size()) CHECK(out == d);
      CHECK(oracle_delta(d, out) <= 1e-12);
    }
  }
  SUBCASE("a certain top terminates the whole diagram") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"w0","kind":"chance","parents":[],"cpt":{"":0}},
          {"id":"x","kind":"chance","parents":[],"cpt":{"":0.6}},
          {"id":"t","kind":"and","parents":["w0","x"]}]})");
    Trace tr;
    auto out = preprocess(d, tr);
    REQUIRE(out.nodes.size() == 1);
    CHECK(out.nodes.at("t").table.at("") == 0.0);
  }
  SUBCASE("trace deletions replay to the output node set") {
    auto d = fidtest::load_fixture("walkthrough.json");
    Trace tr;
    auto out = preprocess(d, tr);
    std::set<NodeId> survivors;
    for (const auto& [id, n] : d.nodes) survivors.insert(id);
    for (const auto& e : tr.events()) {
      for (const auto& gone : e.removed) survivors.erase(gone);
    }
    std::set<NodeId> got;
    for (const auto& [id, n] : out.nodes) got.insert(id);
    CHECK(survivors == got);
  }
}

TEST_CASE("instantiate") {
  SUBCASE("row slice on a chance successor") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"n","kind":"chance","parents":[],"cpt":{"":0.3}},
          {"id":"c","kind":"chance","parents":["n"],"cpt":{"s":0.9,"f":0.2}},
          {"id":"t","kind":"not","parents":["c"]}]})");
    Trace tr;
    auto out = instantiate(d, "n", Outcome::Success, tr);
    CHECK(!out.nodes.count("n"));
    CHECK(out.nodes.at("c").table.at("") == doctest::Approx(0.9));
  }
  SUBCASE("failure into an AND successor kills the gate") {
    auto d = parse_diagram(
        R"({"top":"g","nodes":[
          {"id":"n","kind":"chance","parents":[],"cpt":{"":0.3}},
          {"id":"x","kind":"chance","parents":[],"cpt":{"":0.6}},
          {"id":"g","kind":"and","parents":["n","x"]}]})");
    Trace tr;
    auto out = instantiate(d, "n", Outcome::Failure, tr);
    CHECK(out.nodes.at("g").parents.empty());
    CHECK(out.nodes.at("g").table.at("") == 0.0);
  }
  SUBCASE("parented nodes cannot be instantiated") {
    auto d = parse_diagram(
        R"({"top":"t","nodes":[
          {"id":"n","kind":"chance","parents":[],"cpt":{"":0.3}},
          {"id":"c","kind":"chance","parents":["n"],"cpt":{"s":0.9,"f":0.2}},
          {"id":"t","kind":"not","parents":["c"]}]})");
    Trace tr;
    CHECK_THROWS_AS(instantiate(d, "c", Outcome::Success, tr), Error);
  }
}
