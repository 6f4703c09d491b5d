#include "bn/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace bn {

namespace {

bool lex_less(const Assignment& a, const Assignment& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Entry {
  double probability;
  Assignment assignment;
};

// True when x should outrank y in the final ordering.
bool better(const Entry& x, const Entry& y) {
  if (x.probability != y.probability) return x.probability > y.probability;
  return lex_less(x.assignment, y.assignment);
}

// Per-node CPT lookup with precomputed row strides.
struct NodeEval {
  const Cpt* cpt;
  std::vector<int> parents;
  std::vector<std::size_t> strides;

  double factor(const Assignment& a, int state) const {
    std::size_t row = 0;
    for (std::size_t j = 0; j < parents.size(); ++j) {
      row += static_cast<std::size_t>(a[parents[j]]) * strides[j];
    }
    return cpt->at(row, state);
  }
};

std::vector<NodeEval> build_evals(const Network& net) {
  std::vector<NodeEval> evals(net.node_count());
  for (int i = 0; i < net.node_count(); ++i) {
    NodeEval& e = evals[static_cast<std::size_t>(i)];
    e.cpt = &net.node(i).cpt;
    e.parents = net.parent_indices(i);
    e.strides.assign(e.parents.size(), 1);
    for (std::size_t j = e.parents.size(); j-- > 1;) {
      e.strides[j - 1] =
          e.strides[j] * static_cast<std::size_t>(e.cpt->parent_cards[j]);
    }
  }
  return evals;
}

std::vector<int> require_topo(const Network& net) {
  const std::vector<int>& topo = net.topological_order();
  if (net.node_count() > 0 && topo.empty()) {
    throw std::invalid_argument("network is cyclic");
  }
  return topo;
}

std::uint64_t subspace_size(const Network& net, const std::vector<int>& fixed,
                            std::uint64_t cap) {
  std::uint64_t total = 1;
  for (int i = 0; i < net.node_count(); ++i) {
    if (fixed[static_cast<std::size_t>(i)] >= 0) continue;
    std::uint64_t card =
        static_cast<std::uint64_t>(net.node(i).state_count);
    if (__builtin_mul_overflow(total, card, &total) || total > cap) {
      throw CapExceeded("assignment count exceeds enumeration cap");
    }
  }
  return total;
}

class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void offer(double p, const Assignment& a) {
    if (k_ == 0) return;
    Entry cand{p, a};
    if (heap_.size() < k_) {
      heap_.push_back(std::move(cand));
      std::push_heap(heap_.begin(), heap_.end(), better);
      return;
    }
    if (better(cand, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), better);
      heap_.back() = std::move(cand);
      std::push_heap(heap_.begin(), heap_.end(), better);
    }
  }

  std::vector<Entry> sorted() && {
    std::sort(heap_.begin(), heap_.end(), better);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Entry> heap_;
};

}  // namespace

double RankedSolutions::cumulative_mass(std::size_t k) const {
  k = std::min(k, best.size());
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double y = best[i].probability - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

std::size_t RankedSolutions::rank_of(const Assignment& a) const {
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (best[i].assignment == a) return i + 1;
  }
  return 0;
}

RankedSolutions enumerate_top_k(const Network& net, const Evidence& ev,
                                std::size_t k, std::uint64_t cap) {
  std::vector<int> topo = require_topo(net);
  std::vector<int> fixed = ev.bind(net);
  subspace_size(net, fixed, cap);

  RankedSolutions out;
  if (net.node_count() == 0) {
    out.total_mass = 1.0;
    out.visited = 1;
    if (k > 0) out.best.push_back({{}, 1.0, 0.0});
    return out;
  }

  std::vector<NodeEval> evals = build_evals(net);
  Assignment a(static_cast<std::size_t>(net.node_count()), 0);
  TopK top(k);
  double mass = 0.0;
  double carry = 0.0;
  std::uint64_t visited = 0;
  std::size_t last = topo.size() - 1;

  auto record = [&](double p) {
    ++visited;
    double y = p - carry;
    double t = mass + y;
    carry = (t - mass) - y;
    mass = t;
    top.offer(p, a);
  };

  auto dfs = [&](auto&& self, std::size_t pos, double prod) -> void {
    int idx = topo[pos];
    const NodeEval& e = evals[static_cast<std::size_t>(idx)];
    int fv = fixed[static_cast<std::size_t>(idx)];
    int lo = fv >= 0 ? fv : 0;
    int hi = fv >= 0 ? fv + 1 : net.node(idx).state_count;
    for (int s = lo; s < hi; ++s) {
      a[static_cast<std::size_t>(idx)] = s;
      double p = prod * e.factor(a, s);
      if (pos == last) {
        record(p);
      } else {
        self(self, pos + 1, p);
      }
    }
  };
  dfs(dfs, 0, 1.0);

  out.total_mass = mass;
  out.visited = visited;
  for (Entry& e : std::move(top).sorted()) {
    double lp = e.probability > 0.0
                    ? std::log(e.probability)
                    : -std::numeric_limits<double>::infinity();
    out.best.push_back({std::move(e.assignment), e.probability, lp});
  }
  return out;
}

Assignment random_assignment(const Network& net, const std::vector<int>& fixed,
                             Rng& rng) {
  Assignment a(static_cast<std::size_t>(net.node_count()));
  for (int i = 0; i < net.node_count(); ++i) {
    int fv = fixed[static_cast<std::size_t>(i)];
    a[static_cast<std::size_t>(i)] =
        fv >= 0 ? fv : rng.uniform_int(net.node(i).state_count);
  }
  return a;
}

Assignment greedy_ascent(Evaluator& eval, const Evidence& ev,
                         Assignment start) {
  const Network& net = eval.network();
  if (start.size() != static_cast<std::size_t>(net.node_count())) {
    throw std::invalid_argument("start assignment has wrong length");
  }
  std::vector<int> fixed = ev.bind(net);
  for (int i = 0; i < net.node_count(); ++i) {
    if (fixed[static_cast<std::size_t>(i)] >= 0) {
      start[static_cast<std::size_t>(i)] = fixed[static_cast<std::size_t>(i)];
    }
  }

  double cur = eval.log_joint(start);
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < net.node_count(); ++i) {
      if (fixed[static_cast<std::size_t>(i)] >= 0) continue;
      int keep = start[static_cast<std::size_t>(i)];
      int best_state = keep;
      double best_log = cur;
      for (int s = 0; s < net.node(i).state_count; ++s) {
        if (s == keep) continue;
        start[static_cast<std::size_t>(i)] = s;
        double l = eval.log_joint(start);
        if (l > best_log) {
          best_log = l;
          best_state = s;
        }
      }
      start[static_cast<std::size_t>(i)] = best_state;
      if (best_state != keep) {
        cur = best_log;
        improved = true;
      }
    }
  }
  return start;
}

Assignment random_search(Evaluator& eval, const Evidence& ev,
                         std::uint64_t evaluations, Rng& rng) {
  if (evaluations == 0) {
    throw std::invalid_argument("evaluation budget must be positive");
  }
  const Network& net = eval.network();
  std::vector<int> fixed = ev.bind(net);
  Assignment best;
  double best_log = -std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 0; n < evaluations; ++n) {
    Assignment a = random_assignment(net, fixed, rng);
    double l = eval.log_joint(a);
    if (best.empty() || l > best_log) {
      best_log = l;
      best = std::move(a);
    }
  }
  return best;
}

Assignment local_refine(Evaluator& eval, const Evidence& ev,
                        const Assignment& center, int radius,
                        RefineMetric metric, std::uint64_t cap) {
  const Network& net = eval.network();
  if (center.size() != static_cast<std::size_t>(net.node_count())) {
    throw std::invalid_argument("center assignment has wrong length");
  }
  if (radius < 0) throw std::invalid_argument("radius must be non-negative");
  std::vector<int> fixed = ev.bind(net);
  Assignment base = center;
  for (int i = 0; i < net.node_count(); ++i) {
    if (fixed[static_cast<std::size_t>(i)] >= 0) {
      base[static_cast<std::size_t>(i)] = fixed[static_cast<std::size_t>(i)];
    }
  }
  if (net.node_count() == 0) return base;

  Assignment a = base;
  Assignment best = base;
  double best_log = eval.log_joint(base);
  std::uint64_t visited = 1;
  std::size_t n = a.size();

  auto dfs = [&](auto&& self, std::size_t i, int remaining) -> void {
    if (i == n) {
      if (a == base) return;  // center already scored
      if (++visited > cap) {
        throw CapExceeded("refinement ball exceeds enumeration cap");
      }
      double l = eval.log_joint(a);
      if (l > best_log) {
        best_log = l;
        best = a;
      }
      return;
    }
    int c = base[i];
    if (fixed[i] >= 0) {
      a[i] = c;
      self(self, i + 1, remaining);
      return;
    }
    for (int s = 0; s < net.node(static_cast<int>(i)).state_count; ++s) {
      int cost = metric == RefineMetric::state_difference ? std::abs(s - c)
                                                          : (s != c ? 1 : 0);
      if (cost > remaining) continue;
      a[i] = s;
      self(self, i + 1, remaining - cost);
    }
    a[i] = c;
  };
  dfs(dfs, 0, radius);
  return best;
}

}  // namespace bn
