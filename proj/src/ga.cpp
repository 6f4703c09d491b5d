#include "bn/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include "bn/exact.hpp"

namespace bn {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Selector selector_from_string(const std::string& name) {
  if (name == "uniform") return Selector::uniform;
  if (name == "proportional") return Selector::proportional;
  if (name == "transformed") return Selector::transformed;
  throw std::invalid_argument(
      "unknown selector '" + name +
      "' (expected uniform, proportional or transformed)");
}

std::string to_string(Selector s) {
  switch (s) {
    case Selector::uniform: return "uniform";
    case Selector::proportional: return "proportional";
    case Selector::transformed: return "transformed";
  }
  throw std::invalid_argument("invalid selector value");
}

void GaConfig::validate() const {
  if (population_size < 2) {
    throw std::invalid_argument("population size must be at least 2");
  }
  if (!(breeding_selectivity > 0.0 && breeding_selectivity <= 1.0)) {
    throw std::invalid_argument("breeding selectivity must be in (0, 1]");
  }
  if (!(average_lifetime >= 1.0)) {
    throw std::invalid_argument("average lifetime must be at least 1");
  }
  if (!(mutation_frequency >= 0.0 && mutation_frequency <= 1.0)) {
    throw std::invalid_argument("mutation frequency must be in [0, 1]");
  }
  if (!(convergence_threshold > 0.0 && convergence_threshold <= 1.0)) {
    throw std::invalid_argument("convergence threshold must be in (0, 1]");
  }
  if (convergence_patience < 1) {
    throw std::invalid_argument("convergence patience must be at least 1");
  }
  if (max_generations < 1) {
    throw std::invalid_argument("max generations must be at least 1");
  }
}

std::vector<double> selector_weights(Selector s,
                                     const std::vector<Individual>& pool) {
  std::vector<double> w(pool.size(), 1.0);
  if (s == Selector::uniform) return w;
  if (s == Selector::proportional) {
    double max_log = kNegInf;
    for (const Individual& ind : pool) {
      max_log = std::max(max_log, ind.log_phenotype);
    }
    if (!std::isfinite(max_log)) {
      std::fill(w.begin(), w.end(), 0.0);
      return w;
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
      w[i] = std::exp(pool[i].log_phenotype - max_log);
    }
    return w;
  }
  // 1/(ln p)^2, clamped away from ln p = 0 and from denormal range
  constexpr double kLogFloor = -690.7755278982137;  // ln(1e-300)
  constexpr double kLogCeil = -1e-12;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    double l = pool[i].log_phenotype;
    if (l == kNegInf) {
      w[i] = 0.0;
      continue;
    }
    l = std::clamp(l, kLogFloor, kLogCeil);
    w[i] = 1.0 / (l * l);
  }
  return w;
}

std::size_t sample_index(const std::vector<double>& weights, Rng& rng) {
  if (weights.empty()) {
    throw std::invalid_argument("cannot sample from empty weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("weights must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0.0) {
    return static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(weights.size())));
  }
  double r = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  return weights.size() - 1;
}

std::vector<int> cluster_nodes(const Network& net, int center) {
  int n = net.node_count();
  if (center < 0 || center >= n) {
    throw std::invalid_argument("cluster center out of range");
  }
  std::vector<std::vector<int>> adj = undirected_skeleton(net);
  int threshold = (n + 1) / 2;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> cluster;
  std::vector<int> layer{center};
  seen[static_cast<std::size_t>(center)] = 1;
  while (!layer.empty()) {
    cluster.insert(cluster.end(), layer.begin(), layer.end());
    if (static_cast<int>(cluster.size()) >= threshold) break;
    std::vector<int> next;
    for (int u : layer) {
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          next.push_back(v);
        }
      }
    }
    layer = std::move(next);
  }
  std::sort(cluster.begin(), cluster.end());
  return cluster;
}

std::pair<Assignment, Assignment> cluster_crossover(
    const Assignment& parent1, const Assignment& parent2,
    const std::vector<int>& cluster) {
  if (parent1.size() != parent2.size()) {
    throw std::invalid_argument("parents have different lengths");
  }
  Assignment c1 = parent1;
  Assignment c2 = parent2;
  for (int i : cluster) {
    if (i < 0 || static_cast<std::size_t>(i) >= c1.size()) {
      throw std::invalid_argument("cluster node out of range");
    }
    std::swap(c1[static_cast<std::size_t>(i)], c2[static_cast<std::size_t>(i)]);
  }
  return {std::move(c1), std::move(c2)};
}

ConvergenceDetector::ConvergenceDetector(double threshold, int patience)
    : threshold_(threshold), patience_(patience) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("convergence threshold must be in (0, 1]");
  }
  if (patience < 1) {
    throw std::invalid_argument("convergence patience must be at least 1");
  }
}

bool ConvergenceDetector::update(int generation, double mode_fraction) {
  if (converged()) return true;
  if (mode_fraction >= threshold_) {
    if (streak_ == 0) streak_start_ = generation;
    if (++streak_ >= patience_) converged_at_ = streak_start_;
  } else {
    streak_ = 0;
    streak_start_ = -1;
  }
  return converged();
}

GaEngine::GaEngine(const Network& net, const Evidence& ev, GaConfig cfg,
                   std::uint64_t seed)
    : net_(net),
      cfg_(std::move(cfg)),
      fixed_(ev.bind(net)),
      eval_(net),
      rng_(seed),
      detector_(cfg_.convergence_threshold, cfg_.convergence_patience) {
  cfg_.validate();
  if (net_.node_count() == 0) {
    throw std::invalid_argument("network has no nodes");
  }
  if (net_.topological_order().empty()) {
    throw std::invalid_argument("network is cyclic");
  }
  for (int i = 0; i < net_.node_count(); ++i) {
    if (fixed_[static_cast<std::size_t>(i)] < 0 &&
        net_.node(i).state_count >= 2) {
      mutable_nodes_.push_back(i);
    }
  }
  best_.log_phenotype = kNegInf;
  best_.birth_generation = 0;
  population_.reserve(static_cast<std::size_t>(cfg_.population_size));
  for (int i = 0; i < cfg_.population_size; ++i) {
    Individual ind{random_assignment(net_, fixed_, rng_), 0.0, 0};
    ind.log_phenotype = eval_.log_joint(ind.genes);
    note_creation(ind);
    population_.push_back(std::move(ind));
  }
  sort_population();
  record_stats(0, 0, current_mode_fraction());
}

std::uint64_t GaEngine::evaluations() const { return eval_.evaluations(); }

void GaEngine::note_creation(const Individual& ind) {
  if (best_.genes.empty() || ind.log_phenotype > best_.log_phenotype) {
    best_ = ind;
    evaluations_at_best_ = eval_.evaluations();
  }
}

void GaEngine::sort_population() {
  std::stable_sort(population_.begin(), population_.end(),
                   [](const Individual& a, const Individual& b) {
                     return a.log_phenotype > b.log_phenotype;
                   });
}

void GaEngine::step() {
  ++generation_;
  int pop = cfg_.population_size;
  int replace = static_cast<int>(std::llround(pop / cfg_.average_lifetime));
  replace = std::clamp(replace, 0, pop - 1);
  int pool_size = std::clamp(
      static_cast<int>(std::ceil(cfg_.breeding_selectivity * pop)), 1, pop);
  std::vector<Individual> pool(population_.begin(),
                               population_.begin() + pool_size);
  std::vector<double> weights = selector_weights(cfg_.selector, pool);

  std::vector<Individual> children;
  int improved = 0;
  int pairs = (replace + 1) / 2;
  for (int p = 0; p < pairs; ++p) {
    const Individual& pa = pool[sample_index(weights, rng_)];
    const Individual& pb = pool[sample_index(weights, rng_)];
    std::vector<int> cluster =
        cluster_nodes(net_, rng_.uniform_int(net_.node_count()));
    auto [g1, g2] = cluster_crossover(pa.genes, pb.genes, cluster);
    double parent_best = std::max(pa.log_phenotype, pb.log_phenotype);
    auto add_child = [&](Assignment&& genes) {
      Individual child{std::move(genes), 0.0, generation_};
      child.log_phenotype = eval_.log_joint(child.genes);
      if (child.log_phenotype > parent_best) ++improved;
      note_creation(child);
      children.push_back(std::move(child));
    };
    add_child(std::move(g1));
    add_child(std::move(g2));
  }
  int created = static_cast<int>(children.size());
  if (created > replace) {
    // odd replacement count: one surplus child is dropped at random
    children.erase(children.begin() + rng_.uniform_int(created));
  }
  std::size_t tail = population_.size() - children.size();
  for (std::size_t i = 0; i < children.size(); ++i) {
    population_[tail + i] = std::move(children[i]);
  }

  // Convergence looks at the bred population only: mutation keeps a few
  // individuals off the modal genotype forever, so measuring after it
  // would make high mutation rates unable to converge at all.
  double mode_fraction = current_mode_fraction();

  if (!mutable_nodes_.empty()) {
    int mutations =
        static_cast<int>(std::ceil(cfg_.mutation_frequency * pop));
    for (int m = 0; m < mutations; ++m) {
      Individual& ind =
          population_[static_cast<std::size_t>(rng_.uniform_int(pop))];
      int node = mutable_nodes_[static_cast<std::size_t>(
          rng_.uniform_int(static_cast<int>(mutable_nodes_.size())))];
      int card = net_.node(node).state_count;
      int old = ind.genes[static_cast<std::size_t>(node)];
      int v = rng_.uniform_int(card - 1);
      if (v >= old) ++v;
      ind.genes[static_cast<std::size_t>(node)] = v;
      ind.log_phenotype = eval_.log_joint(ind.genes);
      ind.birth_generation = generation_;
      note_creation(ind);
    }
  }

  sort_population();
  record_stats(created, improved, mode_fraction);
}

double GaEngine::current_mode_fraction() const {
  std::map<Assignment, int> counts;
  int mode = 0;
  for (const Individual& ind : population_) {
    mode = std::max(mode, ++counts[ind.genes]);
  }
  return static_cast<double>(mode) / static_cast<double>(population_.size());
}

void GaEngine::record_stats(int created, int improved, double mode_fraction) {
  std::map<Assignment, double> masses;
  double sum = 0.0;
  for (const Individual& ind : population_) {
    double p = std::exp(ind.log_phenotype);
    sum += p;
    masses[ind.genes] = p;
  }
  double distinct = 0.0;
  for (const auto& entry : masses) distinct += entry.second;
  double pop = static_cast<double>(population_.size());
  GenerationStats row;
  row.generation = generation_;
  row.best_log_phenotype = best_.log_phenotype;
  row.mean_phenotype = sum / pop;
  row.distinct_mass = distinct;
  row.mode_fraction = mode_fraction;
  if (created > 0) {
    row.offspring_improvement = static_cast<double>(improved) / created;
  }
  row.evaluations = eval_.evaluations();
  history_.push_back(row);
  detector_.update(generation_, row.mode_fraction);
}

bool GaEngine::finished() const {
  if (detector_.converged()) return true;
  if (generation_ >= cfg_.max_generations) return true;
  if (cfg_.max_evaluations > 0 &&
      eval_.evaluations() >= cfg_.max_evaluations) {
    return true;
  }
  return false;
}

RunResult GaEngine::result() {
  while (!finished()) step();
  RunResult r;
  r.best = best_.genes;
  r.best_log_phenotype = best_.log_phenotype;
  r.best_probability = std::exp(best_.log_phenotype);
  r.best_generation = best_.birth_generation;
  r.evaluations_at_best = evaluations_at_best_;
  r.converged = detector_.converged();
  r.convergence_generation = detector_.generation();
  r.evaluations_at_convergence =
      r.converged
          ? history_[static_cast<std::size_t>(r.convergence_generation)]
                .evaluations
          : 0;
  r.generations = generation_;
  r.evaluations = eval_.evaluations();
  r.history = history_;
  return r;
}

RunResult run_ga(const Network& net, const Evidence& ev, const GaConfig& cfg,
                 std::uint64_t seed) {
  GaEngine engine(net, ev, cfg, seed);
  return engine.result();
}

}  // namespace bn
