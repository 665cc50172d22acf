#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fid/ingest.hpp"
#include "fid/oracle.hpp"
#include "fid/partition.hpp"
#include "fid/transforms.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotReducible = 2;
constexpr int kExitOracleCap = 3;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fid::Error(fid::ErrorCode::SyntaxError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string probability_line(double p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "P(top=success) = %.9f", p);
  return buf;
}

struct Options {
  std::string file;
  bool trace = false;
  std::string tie_order = "lex";
  bool fallback_oracle = false;
  std::size_t oracle_cap = fid::kDefaultOracleCap;
  std::size_t random_count = 0;
  std::uint64_t seed = 1;
  std::size_t chance = 8;
  std::size_t logical = 4;
  double bias = 0.5;
  std::size_t max_parents = 3;
};

fid::SolveOptions solve_options(const Options& opt) {
  fid::SolveOptions so;
  so.tie_order = opt.tie_order == "paper" ? fid::TieOrder::Paper : fid::TieOrder::Lex;
  return so;
}

double run_solve(const fid::FaultDiagram& d, const Options& opt, fid::Trace& trace) {
  try {
    return fid::solve(d, solve_options(opt), trace);
  } catch (const fid::Error& e) {
    if (e.code() == fid::ErrorCode::ModuleNotReducible && opt.fallback_oracle) {
      trace.add(fid::TraceKind::Note, {"solver gave up; falling back to brute force"});
      return fid::oracle_top_probability(d, opt.oracle_cap);
    }
    throw;
  }
}

int exit_code_for(const fid::Error& e) {
  switch (e.code()) {
    case fid::ErrorCode::ModuleNotReducible: return kExitNotReducible;
    case fid::ErrorCode::TooLargeForOracle: return kExitOracleCap;
    default: return kExitInputError;
  }
}

int cmd_solve(const Options& opt) {
  fid::FaultDiagram d = fid::parse_diagram(read_input(opt.file));
  fid::Trace trace;
  const double p = run_solve(d, opt, trace);
  if (opt.trace) std::cerr << trace.render();
  std::cout << probability_line(p) << "\n";
  return kExitOk;
}

int cmd_oracle(const Options& opt) {
  fid::FaultDiagram d = fid::parse_diagram(read_input(opt.file));
  std::cout << probability_line(fid::oracle_top_probability(d, opt.oracle_cap)) << "\n";
  return kExitOk;
}

int check_one(const fid::FaultDiagram& d, const Options& opt, const std::string& label) {
  fid::Trace trace;
  const double solved = run_solve(d, opt, trace);
  const double exact = fid::oracle_top_probability(d, opt.oracle_cap);
  const double delta = std::abs(solved - exact);
  if (delta <= 1e-9) {
    std::cout << "OK" << label << " delta=" << fid::format_probability(delta) << "\n";
    return kExitOk;
  }
  std::cout << "MISMATCH" << label << " solve=" << fid::format_probability(solved)
            << " oracle=" << fid::format_probability(exact)
            << " delta=" << fid::format_probability(delta) << "\n";
  return kExitInputError;
}

int cmd_check(const Options& opt) {
  if (opt.random_count > 0) {
    int worst = kExitOk;
    for (std::size_t i = 0; i < opt.random_count; ++i) {
      fid::GeneratorParams params;
      params.chance_count = opt.chance;
      params.logical_count = opt.logical;
      params.max_parents = opt.max_parents;
      params.shared_subsystem_bias = opt.bias;
      params.seed = opt.seed + i;
      fid::FaultDiagram d = fid::generate_random(params);
      worst = std::max(worst, check_one(d, opt, " seed=" + std::to_string(params.seed)));
    }
    return worst;
  }
  fid::FaultDiagram d = fid::parse_diagram(read_input(opt.file));
  return check_one(d, opt, "");
}

int cmd_gen(const Options& opt) {
  fid::GeneratorParams params;
  params.chance_count = opt.chance;
  params.logical_count = opt.logical;
  params.max_parents = opt.max_parents;
  params.shared_subsystem_bias = opt.bias;
  params.seed = opt.seed;
  std::cout << fid::serialize_diagram(fid::generate_random(params));
  return kExitOk;
}

int cmd_dot(const Options& opt) {
  fid::FaultDiagram d = fid::parse_diagram(read_input(opt.file));
  std::cout << fid::export_dot(d);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fault influence diagram solver"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd, bool needs_file) {
    if (needs_file) {
      cmd->add_option("file", opt.file, "diagram file, or - for standard input");
    }
    cmd->add_flag("--trace", opt.trace, "write the reduction trace to standard error");
    cmd->add_option("--tie-order", opt.tie_order, "partition tie break: lex or paper")
        ->check(CLI::IsMember({"lex", "paper"}));
    cmd->add_flag("--fallback-oracle", opt.fallback_oracle,
                  "fall back to brute force if the solver gives up");
    cmd->add_option("--oracle-cap", opt.oracle_cap, "max chance nodes for brute force");
  };
  auto add_generator = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "generator seed");
    cmd->add_option("--chance", opt.chance, "chance node count");
    cmd->add_option("--logical", opt.logical, "logical node count");
    cmd->add_option("--bias", opt.bias, "shared subsystem bias in [0,1]");
    cmd->add_option("--max-parents", opt.max_parents, "max parents per node");
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve a diagram file");
  add_common(solve_cmd, true);
  solve_cmd->get_option("file")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force a diagram file");
  add_common(oracle_cmd, true);
  oracle_cmd->get_option("file")->required();

  auto* check_cmd = app.add_subcommand("check", "compare solver against brute force");
  add_common(check_cmd, true);
  check_cmd->add_option("--random", opt.random_count, "check N generated diagrams instead");
  add_generator(check_cmd);

  auto* gen_cmd = app.add_subcommand("gen", "print a generated diagram");
  add_generator(gen_cmd);

  auto* dot_cmd = app.add_subcommand("dot", "print Graphviz DOT for a diagram file");
  add_common(dot_cmd, true);
  dot_cmd->get_option("file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return cmd_solve(opt);
    if (oracle_cmd->parsed()) return cmd_oracle(opt);
    if (check_cmd->parsed()) {
      if (opt.random_count == 0 && opt.file.empty()) {
        std::cerr << "check needs a file or --random N\n";
        return kExitInputError;
      }
      return cmd_check(opt);
    }
    if (gen_cmd->parsed()) return cmd_gen(opt);
    if (dot_cmd->parsed()) return cmd_dot(opt);
  } catch (const fid::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
