#include "testutil.hpp"

#include <algorithm>
#include <cstddef>
#include <string>

namespace bntest {

std::vector<Scored> brute_force_all(const bn::Network& net,
                                    const std::vector<int>& fixed) {
  int n = net.node_count();
  bn::Assignment a(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    if (fixed[static_cast<std::size_t>(i)] >= 0) {
      a[static_cast<std::size_t>(i)] = fixed[static_cast<std::size_t>(i)];
    }
  }
  std::vector<Scored> out;
  while (true) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      const bn::NodeSpec& node = net.node(i);
      std::size_t row = 0;
      for (std::size_t j = 0; j < node.parents.size(); ++j) {
        int pi = net.index_of(node.parents[j]);
        row = row * static_cast<std::size_t>(node.cpt.parent_cards[j]) +
              static_cast<std::size_t>(a[static_cast<std::size_t>(pi)]);
      }
      p *= node.cpt.probs[row * static_cast<std::size_t>(node.state_count) +
                          static_cast<std::size_t>(
                              a[static_cast<std::size_t>(i)])];
    }
    out.push_back({a, p});
    int i = n - 1;
    for (; i >= 0; --i) {
      if (fixed[static_cast<std::size_t>(i)] >= 0) continue;
      if (++a[static_cast<std::size_t>(i)] < net.node(i).state_count) break;
      a[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  std::sort(out.begin(), out.end(), [](const Scored& x, const Scored& y) {
    if (x.probability != y.probability) return x.probability > y.probability;
    return x.assignment < y.assignment;
  });
  return out;
}

namespace {

bn::NodeSpec make_node(std::string id, int states,
                       std::vector<std::string> parents,
                       std::vector<int> parent_cards,
                       std::vector<double> probs) {
  bn::NodeSpec n;
  n.id = std::move(id);
  n.state_count = states;
  n.parents = std::move(parents);
  n.cpt.parent_cards = std::move(parent_cards);
  n.cpt.child_card = states;
  n.cpt.probs = std::move(probs);
  return n;
}

}  // namespace

bn::Network bn1_network() {
  std::vector<bn::NodeSpec> nodes;
  nodes.push_back(make_node("1", 3, {}, {}, {0.6, 0.3, 0.1}));
  nodes.push_back(make_node("2", 2, {"1", "3"}, {3, 2},
                            {0.9, 0.1, 0.01, 0.99, 0.4, 0.6,
                             0.3, 0.7, 0.99, 0.01, 0.9, 0.1}));
  nodes.push_back(make_node("3", 2, {}, {}, {0.1, 0.9}));
  nodes.push_back(make_node("4", 2, {"1", "9"}, {3, 2},
                            {0.9, 0.1, 0.2, 0.8, 0.2, 0.8,
                             0.05, 0.95, 0.05, 0.95, 0.01, 0.99}));
  nodes.push_back(make_node("5", 2, {"2"}, {2}, {0.1, 0.9, 0.95, 0.05}));
  nodes.push_back(make_node("6", 2, {"5"}, {2}, {0.9, 0.1, 0.1, 0.9}));
  nodes.push_back(make_node("7", 2, {"2"}, {2}, {0.9, 0.1, 0.75, 0.25}));
  nodes.push_back(make_node("8", 2, {"7"}, {2}, {0.2, 0.8, 0.1, 0.9}));
  nodes.push_back(make_node("9", 2, {}, {}, {0.85, 0.15}));
  nodes.push_back(make_node("10", 2, {"9"}, {2}, {0.9, 0.1, 0.2, 0.8}));
  nodes.push_back(make_node("11", 2, {"9"}, {2}, {0.7, 0.3, 0.05, 0.95}));
  nodes.push_back(make_node("12", 2, {"9"}, {2}, {0.75, 0.25, 0.15, 0.85}));
  nodes.push_back(make_node("13", 2, {"9"}, {2}, {0.99, 0.01, 0.01, 0.99}));
  return bn::Network("bn1", std::move(nodes));
}

bn::Network chain3() {
  std::vector<bn::NodeSpec> nodes;
  nodes.push_back(make_node("a", 2, {}, {}, {0.7, 0.3}));
  nodes.push_back(make_node("b", 2, {"a"}, {2}, {0.8, 0.2, 0.4, 0.6}));
  nodes.push_back(make_node("c", 3, {"b"}, {2},
                            {0.5, 0.3, 0.2, 0.1, 0.2, 0.7}));
  return bn::Network("chain3", std::move(nodes));
}

bn::Network priors_only(const std::vector<std::vector<double>>& priors) {
  std::vector<bn::NodeSpec> nodes;
  for (std::size_t i = 0; i < priors.size(); ++i) {
    nodes.push_back(make_node(std::to_string(i + 1),
                              static_cast<int>(priors[i].size()), {}, {},
                              priors[i]));
  }
  return bn::Network("priors", std::move(nodes));
}

}  // namespace bntest
