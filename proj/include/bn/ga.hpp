#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bn/network.hpp"
#include "bn/rng.hpp"

namespace bn {

// Parent-selection rule applied within the breeding pool.
//   uniform       every pool member has equal weight
//   proportional  weight is the phenotype (joint probability)
//   transformed   weight is 1/(ln p)^2, flattening the huge dynamic
//                 range of joint probabilities
enum class Selector { uniform, proportional, transformed };

Selector selector_from_string(const std::string& name);
std::string to_string(Selector s);

struct GaConfig {
  int population_size = 100;
  // Top fraction of the population eligible to breed. The wide default
  // keeps early generations diverse; replacement of the worst members
  // already applies steady selection pressure on its own.
  double breeding_selectivity = 0.6;
  // Mean generations an individual survives; round(population/lifetime)
  // members are replaced by offspring each generation.
  double average_lifetime = 5.0;
  // ceil(frequency * population) point mutations per generation.
  double mutation_frequency = 0.0;
  Selector selector = Selector::uniform;
  // Converged when one genotype holds at least `threshold` of the
  // population for `patience` consecutive generations.
  double convergence_threshold = 0.95;
  int convergence_patience = 3;
  int max_generations = 1000;
  std::uint64_t max_evaluations = 0;  // 0 disables the budget

  void validate() const;  // throws std::invalid_argument
};

struct Individual {
  Assignment genes;
  double log_phenotype;
  int birth_generation;
};

struct GenerationStats {
  int generation;
  // Best phenotype created so far (off-line performance, in log space).
  double best_log_phenotype;
  // Mean phenotype of the current population (on-line performance).
  double mean_phenotype;
  // Summed phenotype over distinct genotypes in the population.
  double distinct_mass;
  // Share of the population holding the most common genotype, measured
  // before the generation's mutations so that a population that is
  // uniform up to mutants reads as converged.
  double mode_fraction;
  // Fraction of this generation's offspring beating their better parent.
  std::optional<double> offspring_improvement;
  // Cumulative phenotype evaluations at the end of the generation.
  std::uint64_t evaluations;
};

struct RunResult {
  Assignment best;
  double best_log_phenotype;
  double best_probability;
  int best_generation;  // generation the final best was first created
  std::uint64_t evaluations_at_best;
  bool converged;
  int convergence_generation;  // first generation of the streak, -1 if none
  std::uint64_t evaluations_at_convergence;  // 0 when not converged
  int generations;                           // last generation index reached
  std::uint64_t evaluations;
  std::vector<GenerationStats> history;
};

// Raw selection weights for a breeding pool, in pool order. All-zero
// weights (every phenotype is 0) are the caller's cue to fall back to
// uniform sampling; sample_index does this automatically.
std::vector<double> selector_weights(Selector s,
                                     const std::vector<Individual>& pool);

// Weighted draw; uniform when the weights sum to zero.
std::size_t sample_index(const std::vector<double>& weights, Rng& rng);

// Ball of nodes around `center` in the undirected skeleton: whole BFS
// layers are added until at least half the nodes (rounded up) are in.
std::vector<int> cluster_nodes(const Network& net, int center);

// Children are the parents with the cluster genes exchanged.
std::pair<Assignment, Assignment> cluster_crossover(
    const Assignment& parent1, const Assignment& parent2,
    const std::vector<int>& cluster);

// Streak detector over per-generation modal-genotype fractions.
class ConvergenceDetector {
 public:
  ConvergenceDetector(double threshold, int patience);

  // Feed one generation's fraction; returns true once confirmed.
  bool update(int generation, double mode_fraction);
  bool converged() const { return converged_at_ >= 0; }
  int generation() const { return converged_at_; }  // streak start, -1 if none

 private:
  double threshold_;
  int patience_;
  int streak_ = 0;
  int streak_start_ = -1;
  int converged_at_ = -1;
};

class GaEngine {
 public:
  // Builds and evaluates the initial population (generation 0).
  GaEngine(const Network& net, const Evidence& ev, GaConfig cfg,
           std::uint64_t seed);

  // Breeds, replaces, mutates and records one generation.
  void step();
  // True when converged, out of generations, or out of evaluations.
  bool finished() const;
  // Steps until finished and packages the outcome.
  RunResult result();

  int generation() const { return generation_; }
  std::uint64_t evaluations() const;
  const std::vector<Individual>& population() const { return population_; }
  const std::vector<GenerationStats>& history() const { return history_; }

 private:
  double current_mode_fraction() const;
  void record_stats(int created, int improved, double mode_fraction);
  void note_creation(const Individual& ind);
  void sort_population();

  const Network& net_;
  GaConfig cfg_;
  std::vector<int> fixed_;
  std::vector<int> mutable_nodes_;
  Evaluator eval_;
  Rng rng_;
  std::vector<Individual> population_;  // sorted by phenotype, best first
  std::vector<GenerationStats> history_;
  ConvergenceDetector detector_;
  int generation_ = 0;
  Individual best_;
  std::uint64_t evaluations_at_best_ = 0;
};

RunResult run_ga(const Network& net, const Evidence& ev, const GaConfig& cfg,
                 std::uint64_t seed);

}  // namespace bn
