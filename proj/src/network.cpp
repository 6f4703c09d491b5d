#include "bn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace bn {

Network::Network(std::string name, std::vector<NodeSpec> nodes)
    : name_(std::move(name)), nodes_(std::move(nodes)) {
  const int n = node_count();
  for (int i = 0; i < n; ++i) {
    // First declaration wins on duplicate ids; validation reports them.
    index_.emplace(nodes_[static_cast<std::size_t>(i)].id, i);
  }
  parent_idx_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& spec = nodes_[static_cast<std::size_t>(i)];
    auto& resolved = parent_idx_[static_cast<std::size_t>(i)];
    resolved.reserve(spec.parents.size());
    for (const auto& pid : spec.parents) resolved.push_back(index_of(pid));
  }

  // Kahn's algorithm over the resolved arcs; unresolved references are skipped.
  std::vector<int> in_degree(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int p : parent_idx_[static_cast<std::size_t>(i)]) {
      if (p >= 0 && p != i) {
        ++in_degree[static_cast<std::size_t>(i)];
        children[static_cast<std::size_t>(p)].push_back(i);
      }
    }
  }
  std::vector<int> ready;
  for (int i = 0; i < n; ++i)
    if (in_degree[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  topo_order_.reserve(static_cast<std::size_t>(n));
  for (std::size_t head = 0; head < ready.size(); ++head) {
    const int u = ready[head];
    topo_order_.push_back(u);
    for (int c : children[static_cast<std::size_t>(u)])
      if (--in_degree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
  }
  if (static_cast<int>(topo_order_.size()) != n) topo_order_.clear();
}

int Network::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

std::string ValidationReport::to_string() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (const auto& v : violations) out << v.message << '\n';
  return out.str();
}

namespace {

void check_cpt(const NodeSpec& spec, const Network& net, int node_index,
               std::vector<Violation>& out) {
  const auto& parent_idx = net.parent_indices(node_index);
  Cpt expected_shape;
  for (int p : parent_idx) {
    if (p < 0) return;  // unresolved parents already reported
    expected_shape.parent_cards.push_back(net.node(p).state_count);
  }
  const std::size_t rows = expected_shape.row_count();
  const std::size_t want =
      rows * static_cast<std::size_t>(std::max(spec.state_count, 0));
  if (spec.cpt.child_card != spec.state_count ||
      spec.cpt.parent_cards != expected_shape.parent_cards ||
      spec.cpt.probs.size() != want) {
    out.push_back({Violation::Code::cpt_shape,
                   "node " + spec.id + ": CPT shape does not match " +
                       std::to_string(rows) + " parent combination(s) x " +
                       std::to_string(spec.state_count) + " state(s)"});
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int s = 0; s < spec.state_count; ++s) {
      const double p = spec.cpt.at(r, s);
      if (!(p >= 0.0 && p <= 1.0)) {
        out.push_back({Violation::Code::cpt_range,
                       "node " + spec.id + ": probability " +
                           std::to_string(p) + " outside [0,1] in row " +
                           std::to_string(r + 1)});
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kCptRowSumTolerance) {
      out.push_back({Violation::Code::cpt_row_sum,
                     "node " + spec.id + ": CPT row " + std::to_string(r + 1) +
                         " (of " + std::to_string(rows) + ") sums to " +
                         std::to_string(sum)});
    }
  }
}

}  // namespace

ValidationReport validate_network(const Network& net) {
  ValidationReport report;
  auto& out = report.violations;
  const int n = net.node_count();

  std::set<std::string> seen;
  for (int i = 0; i < n; ++i) {
    const auto& spec = net.node(i);
    if (!seen.insert(spec.id).second)
      out.push_back({Violation::Code::duplicate_node,
                     "duplicate node id " + spec.id});
    if (spec.state_count < 1)
      out.push_back({Violation::Code::bad_state_count,
                     "node " + spec.id + ": state count must be >= 1"});
    std::set<std::string> parent_seen;
    for (std::size_t k = 0; k < spec.parents.size(); ++k) {
      const auto& pid = spec.parents[k];
      if (net.parent_indices(i)[k] < 0)
        out.push_back({Violation::Code::unknown_parent,
                       "node " + spec.id + ": unknown parent " + pid});
      if (pid == spec.id)
        out.push_back({Violation::Code::self_parent,
                       "node " + spec.id + " lists itself as a parent"});
      if (!parent_seen.insert(pid).second)
        out.push_back({Violation::Code::duplicate_parent,
                       "node " + spec.id + ": duplicate parent " + pid});
    }
  }

  if (net.topological_order().empty() && n > 0)
    out.push_back({Violation::Code::cycle,
                   "directed graph contains a cycle (no topological order)"});

  for (int i = 0; i < n; ++i) check_cpt(net.node(i), net, i, out);
  return report;
}

namespace {

// Shared factor lookup; validates the assignment entry for node i.
inline double node_factor(const Network& net, const Assignment& a, int i) {
  const auto& spec = net.node(i);
  const int v = a[static_cast<std::size_t>(i)];
  if (v < 0 || v >= spec.state_count)
    throw std::invalid_argument("assignment state " + std::to_string(v + 1) +
                                " out of range for node " + spec.id);
  std::size_t row = 0;
  for (int p : net.parent_indices(i))
    row = row * static_cast<std::size_t>(net.node(p).state_count) +
          static_cast<std::size_t>(a[static_cast<std::size_t>(p)]);
  return spec.cpt.at(row, v);
}

inline void check_size(const Network& net, const Assignment& a) {
  if (static_cast<int>(a.size()) != net.node_count())
    throw std::invalid_argument(
        "assignment has " + std::to_string(a.size()) + " values, network has " +
        std::to_string(net.node_count()) + " nodes");
}

}  // namespace

double joint_probability(const Network& net, const Assignment& a) {
  check_size(net, a);
  double p = 1.0;
  for (int i = 0; i < net.node_count(); ++i) p *= node_factor(net, a, i);
  return p;
}

double log_joint_probability(const Network& net, const Assignment& a) {
  check_size(net, a);
  double lp = 0.0;
  for (int i = 0; i < net.node_count(); ++i) {
    const double f = node_factor(net, a, i);
    if (f <= 0.0) return -std::numeric_limits<double>::infinity();
    lp += std::log(f);
  }
  return lp;
}

std::uint64_t state_space_size(const Network& net) {
  std::uint64_t size = 1;
  for (const auto& spec : net.nodes()) {
    if (__builtin_mul_overflow(size, static_cast<std::uint64_t>(spec.state_count),
                               &size))
      throw StateSpaceOverflow("state space size exceeds 64 bits for network " +
                               net.name());
  }
  return size;
}

double state_space_size_approx(const Network& net) {
  double size = 1.0;
  for (const auto& spec : net.nodes()) size *= spec.state_count;
  return size;
}

std::vector<std::vector<int>> undirected_skeleton(const Network& net) {
  const int n = net.node_count();
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int p : net.parent_indices(i)) {
      if (p >= 0 && p != i) {
        adj[static_cast<std::size_t>(i)].insert(p);
        adj[static_cast<std::size_t>(p)].insert(i);
      }
    }
  }
  std::vector<std::vector<int>> result(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    result[static_cast<std::size_t>(i)].assign(
        adj[static_cast<std::size_t>(i)].begin(),
        adj[static_cast<std::size_t>(i)].end());
  return result;
}

std::vector<int> Evidence::bind(const Network& net) const {
  std::vector<int> fixed(static_cast<std::size_t>(net.node_count()), -1);
  for (const auto& [id, state] : bindings) {
    const int i = net.index_of(id);
    if (i < 0)
      throw std::invalid_argument("evidence refers to unknown node " + id);
    if (fixed[static_cast<std::size_t>(i)] >= 0)
      throw std::invalid_argument("evidence binds node " + id + " twice");
    const int card = net.node(i).state_count;
    if (state < 0 || state >= card)
      throw std::invalid_argument(
          "evidence state " + std::to_string(state + 1) + " out of range for node " +
          id + " (" + std::to_string(card) + " states)");
    fixed[static_cast<std::size_t>(i)] = state;
  }
  return fixed;
}

}  // namespace bn
