#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bn/exact.hpp"
#include "bn/ga.hpp"
#include "bn/network.hpp"

namespace bn {

std::uint64_t fnv1a64(std::string_view data);
std::string digest_hex(std::uint64_t digest);

// Digests of the canonical serialized forms; used to tie cached oracle
// files to the exact network and evidence they were computed from.
std::uint64_t network_digest(const Network& net);
std::uint64_t evidence_digest(const Evidence& ev);

struct OracleData {
  std::uint64_t net_digest = 0;
  std::uint64_t ev_digest = 0;
  std::size_t k = 0;
  RankedSolutions solutions;
};

std::string oracle_to_json(const OracleData& oracle);
OracleData oracle_from_json(const std::string& text);  // IoError on bad input

// Returns the cached oracle at `path` when its digests match and it holds
// at least k solutions; otherwise enumerates and, when `path` is
// non-empty, rewrites the cache.
OracleData load_or_compute_oracle(const Network& net, const Evidence& ev,
                                  std::size_t k, const std::string& path,
                                  std::uint64_t cap = kDefaultEnumerationCap);

struct BenchConfig {
  GaConfig ga;
  std::vector<Selector> selectors;
  int runs_per_selector = 25;
  std::uint64_t master_seed = 1;
};

struct RunRecord {
  Selector selector;
  int run;  // 0-based within the selector
  std::uint64_t seed;
  Assignment best;
  double best_probability;
  std::size_t rank;  // 1-based within the oracle, 0 = outside its top-k
  int best_generation;
  std::uint64_t evaluations_at_best;
  bool converged;
  int convergence_generation;  // -1 when the run never converged
  std::uint64_t evaluations_at_convergence;
  int generations;
  std::uint64_t evaluations;
  // Share of the state space evaluated up to convergence (or in total
  // for runs that never converged).
  double fraction_evaluated;
};

struct MeanSd {
  int count = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample standard deviation, absent when n < 2
};

MeanSd mean_sd(const std::vector<double>& values);

struct SelectorSummary {
  Selector selector;
  int runs = 0;
  int converged_runs = 0;
  std::optional<double> top1_rate;   // absent when the oracle holds < 1
  std::optional<double> top10_rate;  // absent when the oracle holds < 10
  MeanSd best_generation;
  MeanSd evaluations_at_best;
  MeanSd convergence_generation;        // converged runs only
  MeanSd evaluations_at_convergence;    // converged runs only
  MeanSd fraction_evaluated;
  MeanSd best_probability;
};

std::vector<SelectorSummary> summarize(const std::vector<RunRecord>& runs,
                                       std::size_t oracle_size);

struct BenchResult {
  std::string network_name;
  std::uint64_t net_digest = 0;
  std::uint64_t ev_digest = 0;
  double state_space = 0.0;
  std::size_t oracle_k = 0;
  std::vector<RunRecord> runs;
  std::vector<SelectorSummary> summaries;
};

using RunCallback = std::function<void(const RunRecord&)>;

// One run per (selector, run index) cell. Seeds depend only on the master
// seed, the selector and the run index, so adding or reordering selectors
// never changes another selector's runs. Throws std::invalid_argument when
// the oracle does not match the network and evidence.
BenchResult run_bench(const Network& net, const Evidence& ev,
                      const BenchConfig& cfg, const OracleData& oracle,
                      const RunCallback& on_run = {});

std::string run_record_csv_header();
std::string to_csv_row(const RunRecord& rec);

// Full report: network, configuration, oracle head, per-selector
// aggregates. Assignments appear 1-based.
std::string bench_summary_json(const BenchResult& result,
                               const BenchConfig& cfg,
                               const OracleData& oracle);

}  // namespace bn
