#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bn {

// One state index per node, aligned with Network node order. States are
// 0-based internally; the file format and CLI display them 1-based.
using Assignment = std::vector<int>;

// Dense conditional probability table. Rows are indexed row-major by the
// parent state tuple in declared parent order (first parent most
// significant). Each row holds one probability per child state. A root
// node has a single row: its prior.
struct Cpt {
  std::vector<int> parent_cards;
  int child_card = 0;
  std::vector<double> probs;

  std::size_t row_count() const {
    std::size_t n = 1;
    for (int c : parent_cards) n *= static_cast<std::size_t>(c);
    return n;
  }
  std::size_t row_index(std::span<const int> parent_states) const {
    std::size_t row = 0;
    for (std::size_t i = 0; i < parent_cards.size(); ++i)
      row = row * static_cast<std::size_t>(parent_cards[i]) +
            static_cast<std::size_t>(parent_states[i]);
    return row;
  }
  double at(std::size_t row, int child_state) const {
    return probs[row * static_cast<std::size_t>(child_card) +
                 static_cast<std::size_t>(child_state)];
  }

  friend bool operator==(const Cpt&, const Cpt&) = default;
};

struct NodeSpec {
  std::string id;
  int state_count = 0;
  std::vector<std::string> parents;
  Cpt cpt;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

// Immutable discrete belief network: a DAG of nodes with priors (roots)
// and CPTs (non-roots). Construction resolves parent references and the
// topological order but does not reject malformed input; call
// validate_network to obtain the full list of violations.
class Network {
 public:
  Network() = default;
  Network(std::string name, std::vector<NodeSpec> nodes);

  const std::string& name() const { return name_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const NodeSpec& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }

  // Index of a node id in declaration order, or -1 if unknown.
  int index_of(const std::string& id) const;

  // Resolved parent indices per node; -1 marks an unresolvable reference.
  const std::vector<int>& parent_indices(int i) const {
    return parent_idx_[static_cast<std::size_t>(i)];
  }

  // Empty when the resolved arcs contain a cycle.
  const std::vector<int>& topological_order() const { return topo_order_; }

  friend bool operator==(const Network& a, const Network& b) {
    return a.name_ == b.name_ && a.nodes_ == b.nodes_;
  }

 private:
  std::string name_;
  std::vector<NodeSpec> nodes_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> parent_idx_;
  std::vector<int> topo_order_;
};

struct Violation {
  enum class Code {
    duplicate_node,
    bad_state_count,
    unknown_parent,
    self_parent,
    duplicate_parent,
    cycle,
    cpt_shape,
    cpt_range,
    cpt_row_sum,
  };
  Code code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Tolerance for CPT row normalization; rows are never renormalized.
inline constexpr double kCptRowSumTolerance = 1e-9;

ValidationReport validate_network(const Network& net);

// Product over nodes of prior(value) for roots and cpt(value | parents)
// otherwise. Throws std::invalid_argument on an assignment whose size or
// state indices do not fit the network.
double joint_probability(const Network& net, const Assignment& a);

// Sum of natural-log factors; -inf iff some factor is zero.
double log_joint_probability(const Network& net, const Assignment& a);

struct StateSpaceOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Product of state counts over all nodes. Throws StateSpaceOverflow
// instead of wrapping when the product exceeds 64 bits.
std::uint64_t state_space_size(const Network& net);

// Same product in floating point, for fractions over huge spaces.
double state_space_size_approx(const Network& net);

// Symmetric adjacency lists (sorted, deduplicated): an edge wherever a
// parent-child arc exists in either direction.
std::vector<std::vector<int>> undirected_skeleton(const Network& net);

// Partial observation: node id -> 0-based state index.
struct Evidence {
  std::vector<std::pair<std::string, int>> bindings;

  bool empty() const { return bindings.empty(); }

  // Resolves against a network: one entry per node, the bound state or -1
  // for free nodes. Throws std::invalid_argument on an unknown node, a
  // duplicate binding, or an out-of-range state.
  std::vector<int> bind(const Network& net) const;
};

// Counts joint-probability evaluations so solver costs are comparable.
class Evaluator {
 public:
  explicit Evaluator(const Network& net) : net_(&net) {}

  double log_joint(const Assignment& a) {
    ++count_;
    return log_joint_probability(*net_, a);
  }
  const Network& network() const { return *net_; }
  std::uint64_t evaluations() const { return count_; }

 private:
  const Network* net_;
  std::uint64_t count_ = 0;
};

}  // namespace bn
