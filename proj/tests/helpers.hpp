#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "fid/ingest.hpp"

namespace fidtest {

inline std::string read_file(const std::string& name) {
  std::ifstream in(std::string(FID_TESTS_DIR) + "/fixtures/" + name, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline fid::FaultDiagram load_fixture(const std::string& name) {
  return fid::parse_diagram(read_file(name));
}

inline fid::FaultDiagram gen(std::uint64_t seed, std::size_t chance = 8, std::size_t logical = 4,
                             double bias = 0.5, std::size_t max_parents = 3) {
  fid::GeneratorParams params;
  params.chance_count = chance;
  params.logical_count = logical;
  params.max_parents = max_parents;
  params.shared_subsystem_bias = bias;
  params.seed = seed;
  return fid::generate_random(params);
}

}  // namespace fidtest
