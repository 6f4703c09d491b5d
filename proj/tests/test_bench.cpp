#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "bn/bench.hpp"
#include "bn/io.hpp"
#include "testutil.hpp"

using namespace bn;
using bntest::bn1_network;
using bntest::chain3;

namespace {

std::filesystem::path tmp_path(const std::string& leaf) {
  return std::filesystem::temp_directory_path() / leaf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

BenchConfig quick_config() {
  BenchConfig cfg;
  cfg.ga.population_size = 20;
  cfg.ga.mutation_frequency = 0.05;
  cfg.ga.max_generations = 40;
  cfg.selectors = {Selector::uniform, Selector::proportional,
                   Selector::transformed};
  cfg.runs_per_selector = 3;
  cfg.master_seed = 2024;
  return cfg;
}

}  // namespace

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("abc") == 0xe71fa2190541574bULL);
  CHECK(digest_hex(0xcbf29ce484222325ULL) == "cbf29ce484222325");
  CHECK(digest_hex(0x1ULL) == "0000000000000001");
}

TEST_CASE("digests identify a network and its evidence") {
  CHECK(network_digest(chain3()) == network_digest(chain3()));
  CHECK(network_digest(chain3()) != network_digest(bn1_network()));
  Evidence a, b;
  a.bindings = {{"x", 1}};
  b.bindings = {{"x", 0}};
  CHECK(evidence_digest(a) != evidence_digest(b));
  CHECK(evidence_digest({}) == evidence_digest({}));
}

TEST_CASE("oracle files round-trip through json") {
  Network net = chain3();
  OracleData oracle;
  oracle.net_digest = network_digest(net);
  oracle.ev_digest = evidence_digest({});
  oracle.k = 5;
  oracle.solutions = enumerate_top_k(net, {}, 5);

  OracleData back = oracle_from_json(oracle_to_json(oracle));
  CHECK(back.net_digest == oracle.net_digest);
  CHECK(back.ev_digest == oracle.ev_digest);
  CHECK(back.k == 5);
  CHECK(back.solutions.visited == oracle.solutions.visited);
  CHECK(back.solutions.total_mass == oracle.solutions.total_mass);
  REQUIRE(back.solutions.best.size() == oracle.solutions.best.size());
  for (std::size_t i = 0; i < back.solutions.best.size(); ++i) {
    CHECK(back.solutions.best[i].assignment ==
          oracle.solutions.best[i].assignment);
    CHECK(back.solutions.best[i].probability ==
          oracle.solutions.best[i].probability);
  }

  CHECK_THROWS_AS(oracle_from_json("{"), IoError);
  CHECK_THROWS_AS(oracle_from_json("{\"k\": 3}"), IoError);
}

TEST_CASE("the oracle cache hits, rejects stale content and recomputes") {
  Network net = chain3();
  std::filesystem::path p = tmp_path("bn_oracle_cache.json");
  std::filesystem::remove(p);

  OracleData first = load_or_compute_oracle(net, {}, 4, p.string());
  CHECK(std::filesystem::exists(p));
  CHECK(first.solutions.best.size() == 4);

  // cache satisfies an equal or smaller k without recomputation
  OracleData again = load_or_compute_oracle(net, {}, 3, p.string());
  CHECK(again.k == 4);
  CHECK(again.solutions.best.size() == 4);

  // a deeper request forces a rebuild
  OracleData deeper = load_or_compute_oracle(net, {}, 6, p.string());
  CHECK(deeper.k == 6);
  CHECK(deeper.solutions.best.size() == 6);

  // a different network with the same path is detected as stale
  OracleData other = load_or_compute_oracle(bn1_network(), {}, 2, p.string());
  CHECK(other.net_digest == network_digest(bn1_network()));
  CHECK(other.solutions.visited == 12288);

  write_text_file_atomic(p.string(), "not json");
  OracleData rebuilt = load_or_compute_oracle(net, {}, 2, p.string());
  CHECK(rebuilt.net_digest == network_digest(net));
  CHECK(rebuilt.solutions.visited == 12);
  std::filesystem::remove(p);
}

TEST_CASE("mean and sample deviation") {
  MeanSd m = mean_sd({1.0, 2.0, 3.0, 4.0});
  CHECK(m.count == 4);
  CHECK(m.mean == doctest::Approx(2.5));
  REQUIRE(m.sd.has_value());
  CHECK(*m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));

  MeanSd single = mean_sd({7.0});
  CHECK(single.count == 1);
  CHECK(single.mean == 7.0);
  CHECK_FALSE(single.sd.has_value());

  MeanSd none = mean_sd({});
  CHECK(none.count == 0);
}

TEST_CASE("summaries aggregate ranks and convergence per selector") {
  std::vector<RunRecord> runs;
  auto rec = [](Selector s, std::size_t rank, bool conv, int gc,
                std::uint64_t egc) {
    RunRecord r{};
    r.selector = s;
    r.rank = rank;
    r.converged = conv;
    r.convergence_generation = conv ? gc : -1;
    r.evaluations_at_convergence = conv ? egc : 0;
    r.best_generation = 5;
    r.evaluations_at_best = 100;
    r.fraction_evaluated = 0.1;
    r.best_probability = 0.05;
    return r;
  };
  runs.push_back(rec(Selector::uniform, 1, true, 10, 500));
  runs.push_back(rec(Selector::uniform, 7, true, 20, 700));
  runs.push_back(rec(Selector::uniform, 0, false, 0, 0));
  runs.push_back(rec(Selector::transformed, 1, true, 12, 400));

  std::vector<SelectorSummary> sums = summarize(runs, 100);
  REQUIRE(sums.size() == 2);
  const SelectorSummary& u = sums[0];
  CHECK(u.selector == Selector::uniform);
  CHECK(u.runs == 3);
  CHECK(u.converged_runs == 2);
  REQUIRE(u.top1_rate.has_value());
  CHECK(*u.top1_rate == doctest::Approx(1.0 / 3.0));
  REQUIRE(u.top10_rate.has_value());
  CHECK(*u.top10_rate == doctest::Approx(2.0 / 3.0));
  CHECK(u.convergence_generation.count == 2);
  CHECK(u.convergence_generation.mean == doctest::Approx(15.0));
  CHECK(u.evaluations_at_convergence.mean == doctest::Approx(600.0));
  CHECK(u.best_generation.count == 3);

  // a shallow oracle withholds the unknowable hit rates
  std::vector<SelectorSummary> shallow = summarize(runs, 5);
  CHECK(shallow[0].top1_rate.has_value());
  CHECK_FALSE(shallow[0].top10_rate.has_value());
}

TEST_CASE("bench runs a full grid with order-independent seeding") {
  Network net = chain3();
  BenchConfig cfg = quick_config();
  OracleData oracle = load_or_compute_oracle(net, {}, 10, "");

  int calls = 0;
  BenchResult result =
      run_bench(net, {}, cfg, oracle, [&](const RunRecord&) { ++calls; });
  CHECK(calls == 9);
  REQUIRE(result.runs.size() == 9);
  CHECK(result.summaries.size() == 3);
  CHECK(result.oracle_k == 10);

  std::set<std::uint64_t> seeds;
  for (const RunRecord& r : result.runs) seeds.insert(r.seed);
  CHECK(seeds.size() == 9);

  for (const RunRecord& r : result.runs) {
    CHECK(r.rank >= 1);  // the oracle covers the whole 12-point space
    CHECK(r.rank <= 10);
    CHECK(r.fraction_evaluated > 0.0);
  }

  // dropping a selector leaves the others' cells untouched
  BenchConfig solo = cfg;
  solo.selectors = {Selector::proportional};
  BenchResult alone = run_bench(net, {}, solo, oracle);
  REQUIRE(alone.runs.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const RunRecord& a = alone.runs[static_cast<std::size_t>(i)];
    const RunRecord& b = result.runs[static_cast<std::size_t>(3 + i)];
    CHECK(a.seed == b.seed);
    CHECK(a.best == b.best);
    CHECK(a.evaluations == b.evaluations);
  }
}

TEST_CASE("bench rejects an oracle for different inputs") {
  Network net = chain3();
  BenchConfig cfg = quick_config();
  OracleData wrong = load_or_compute_oracle(bn1_network(), {}, 5, "");
  CHECK_THROWS_AS(run_bench(net, {}, cfg, wrong), std::invalid_argument);
}

TEST_CASE("csv rows match the header layout") {
  Network net = chain3();
  BenchConfig cfg = quick_config();
  cfg.selectors = {Selector::uniform};
  cfg.runs_per_selector = 2;
  OracleData oracle = load_or_compute_oracle(net, {}, 10, "");
  BenchResult result = run_bench(net, {}, cfg, oracle);

  std::vector<std::string> header = split_csv(run_record_csv_header());
  CHECK(header.size() == 14);
  CHECK(header.front() == "selector");
  CHECK(header.back() == "best_assignment");
  for (const RunRecord& r : result.runs) {
    std::vector<std::string> row = split_csv(to_csv_row(r));
    REQUIRE(row.size() == header.size());
    CHECK(row[0] == "uniform");
    CHECK(std::stoull(row[2]) == r.seed);
    CHECK(row[11] == std::to_string(r.rank));
    CHECK(std::stod(row[12]) == r.best_probability);
    CHECK(row[13].find('-') != std::string::npos);
  }
}

TEST_CASE("the json summary is well-formed and 1-based") {
  Network net = chain3();
  BenchConfig cfg = quick_config();
  cfg.selectors = {Selector::uniform};
  OracleData oracle = load_or_compute_oracle(net, {}, 10, "");
  BenchResult result = run_bench(net, {}, cfg, oracle);
  std::string text = bench_summary_json(result, cfg, oracle);

  nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["network"]["name"] == "chain3");
  CHECK(j["network"]["state_space"] == 12.0);
  CHECK(j["config"]["population_size"] == 20);
  CHECK(j["oracle"]["k"] == 10);
  CHECK(j["oracle"]["visited"] == 12);
  // chain3's optimum is a=1 b=1 c=1 in display form
  std::vector<int> top1 = j["oracle"]["top"][0]["assignment"];
  CHECK(top1 == std::vector<int>{1, 1, 1});
  REQUIRE(j["selectors"].size() == 1);
  CHECK(j["selectors"][0]["selector"] == "uniform");
  CHECK(j["selectors"][0]["runs"] == cfg.runs_per_selector);
}
