#include "bn/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bn/rng.hpp"

namespace bn {

namespace {

// Dirichlet(1,...,1) row via normalized exponentials; entries stay positive.
std::vector<double> random_simplex_row(int k, Rng& rng) {
  std::vector<double> row(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (auto& x : row) {
    double u;
    do {
      u = rng.uniform01();
    } while (u == 0.0);
    x = -std::log(u);
    sum += x;
  }
  for (auto& x : row) x /= sum;
  return row;
}

}  // namespace

Network generate_random_network(const GeneratorSpec& spec) {
  if (spec.node_count < 1)
    throw InfeasibleSpec("node_count must be >= 1");
  if (spec.target_cycles < 0)
    throw InfeasibleSpec("target_cycles must be >= 0");
  if (spec.max_parents < 0)
    throw InfeasibleSpec("max_parents must be >= 0");
  const int n = spec.node_count;

  std::vector<int> cards = spec.state_counts;
  if (cards.empty()) cards.assign(static_cast<std::size_t>(n), 2);
  if (static_cast<int>(cards.size()) != n)
    throw InfeasibleSpec("state_counts has " + std::to_string(cards.size()) +
                         " entries for " + std::to_string(n) + " nodes");
  for (int c : cards)
    if (c < 1) throw InfeasibleSpec("state counts must be >= 1");

  if (spec.max_parents == 0 && spec.target_cycles > 0)
    throw InfeasibleSpec("cycles requested but max_parents is 0");
  if (n == 1 && spec.target_cycles > 0)
    throw InfeasibleSpec("cycles requested on a single-node network");

  Rng rng(spec.seed);

  // parents_of[i] holds node indices; arcs always point from earlier to
  // later positions in a random topological order, so the result is a DAG.
  std::vector<std::vector<int>> parents_of(static_cast<std::size_t>(n));
  if (spec.max_parents > 0 && n > 1) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    // Spanning tree first: skeleton connected with n-1 edges, cyclomatic 0.
    for (int j = 1; j < n; ++j) {
      const int child = order[static_cast<std::size_t>(j)];
      const int parent = order[static_cast<std::size_t>(rng.uniform_int(j))];
      parents_of[static_cast<std::size_t>(child)].push_back(parent);
    }

    // Each extra arc raises the cyclomatic number by exactly one.
    if (spec.target_cycles > 0) {
      struct Candidate {
        int child;
        int parent;
      };
      std::vector<Candidate> candidates;
      for (int j = 1; j < n; ++j) {
        const int child = order[static_cast<std::size_t>(j)];
        for (int i = 0; i < j; ++i) {
          const int parent = order[static_cast<std::size_t>(i)];
          const auto& existing = parents_of[static_cast<std::size_t>(child)];
          if (std::find(existing.begin(), existing.end(), parent) ==
              existing.end())
            candidates.push_back({child, parent});
        }
      }
      rng.shuffle(candidates);
      int added = 0;
      for (const auto& cand : candidates) {
        if (added == spec.target_cycles) break;
        auto& plist = parents_of[static_cast<std::size_t>(cand.child)];
        if (static_cast<int>(plist.size()) >= spec.max_parents) continue;
        plist.push_back(cand.parent);
        ++added;
      }
      if (added < spec.target_cycles)
        throw InfeasibleSpec(
            "cannot realize " + std::to_string(spec.target_cycles) +
            " cycles with node_count " + std::to_string(n) +
            " and max_parents " + std::to_string(spec.max_parents));
    }
  }

  std::vector<NodeSpec> nodes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& node = nodes[static_cast<std::size_t>(i)];
    node.id = std::to_string(i + 1);
    node.state_count = cards[static_cast<std::size_t>(i)];
    auto& plist = parents_of[static_cast<std::size_t>(i)];
    std::sort(plist.begin(), plist.end());
    for (int p : plist) node.parents.push_back(std::to_string(p + 1));
  }

  // CPT rows in declaration order so the draw sequence is reproducible.
  for (int i = 0; i < n; ++i) {
    auto& node = nodes[static_cast<std::size_t>(i)];
    auto& cpt = node.cpt;
    cpt.child_card = node.state_count;
    for (int p : parents_of[static_cast<std::size_t>(i)])
      cpt.parent_cards.push_back(cards[static_cast<std::size_t>(p)]);
    const std::size_t rows = cpt.row_count();
    cpt.probs.reserve(rows * static_cast<std::size_t>(node.state_count));
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = random_simplex_row(node.state_count, rng);
      cpt.probs.insert(cpt.probs.end(), row.begin(), row.end());
    }
  }

  return Network(spec.name, std::move(nodes));
}

}  // namespace bn
