#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bn/network.hpp"

namespace bn {

struct InfeasibleSpec : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Recipe for a random instance. target_cycles is the cyclomatic number
// (edges - nodes + components) of the undirected skeleton: 0 gives a
// tree when max_parents >= 1 and an arc-free network when
// max_parents == 0.
struct GeneratorSpec {
  int node_count = 0;
  std::vector<int> state_counts;  // one per node; empty means all binary
  int target_cycles = 0;
  int max_parents = 3;
  std::uint64_t seed = 0;
  std::string name = "generated";
};

// Deterministic function of the spec (including seed). The result is
// acyclic by construction (arcs follow a random topological order) and
// always passes validate_network; CPT rows are drawn uniformly from the
// probability simplex. Throws InfeasibleSpec when the requested cycle
// count cannot be realized.
Network generate_random_network(const GeneratorSpec& spec);

}  // namespace bn
