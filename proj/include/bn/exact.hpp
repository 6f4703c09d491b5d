#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bn/network.hpp"
#include "bn/rng.hpp"

namespace bn {

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000'000;

struct RankedSolution {
  Assignment assignment;
  double probability;
  double log_probability;
};

// Exact top-k, descending by probability; equal probabilities ordered
// lexicographically by assignment. total_mass is the probability of the
// evidence-consistent subspace (1 for no evidence, up to rounding).
struct RankedSolutions {
  std::vector<RankedSolution> best;
  double total_mass = 0.0;
  std::uint64_t visited = 0;

  // Mass of the first k solutions (k clamped to the stored count).
  double cumulative_mass(std::size_t k) const;
  // 1-based rank of an assignment among the stored solutions, 0 if absent.
  std::size_t rank_of(const Assignment& a) const;
};

// Full sweep over every evidence-consistent complete assignment. Refuses
// to start when that count exceeds `cap`.
RankedSolutions enumerate_top_k(const Network& net, const Evidence& ev,
                                std::size_t k,
                                std::uint64_t cap = kDefaultEnumerationCap);

// Uniform random evidence-consistent assignment.
Assignment random_assignment(const Network& net, const std::vector<int>& fixed,
                             Rng& rng);

// Repeated sweeps in declaration order; each free node moves to the
// allele giving the strictly largest joint probability (ties toward the
// lowest state index). Stops when a full sweep makes no improvement, so
// the result is a local optimum under single-gene moves.
Assignment greedy_ascent(Evaluator& eval, const Evidence& ev, Assignment start);

// Best of `evaluations` uniform samples (with replacement).
Assignment random_search(Evaluator& eval, const Evidence& ev,
                         std::uint64_t evaluations, Rng& rng);

enum class RefineMetric {
  state_difference,  // sum over nodes of |value - center value|
  hamming,           // count of differing nodes
};

// Exhaustive best assignment within `radius` of `center` under the chosen
// metric; evidence nodes never move. Radius 0 returns the center.
Assignment local_refine(Evaluator& eval, const Evidence& ev,
                        const Assignment& center, int radius,
                        RefineMetric metric = RefineMetric::state_difference,
                        std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace bn
