#include "bn/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "bn/io.hpp"

namespace bn {

namespace {
using ordered_json = nlohmann::ordered_json;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[digest & 0xF];
    digest >>= 4;
  }
  return out;
}

std::uint64_t network_digest(const Network& net) {
  return fnv1a64(serialize_network(net));
}

std::uint64_t evidence_digest(const Evidence& ev) {
  return fnv1a64(serialize_evidence(ev));
}

namespace {

ordered_json assignment_to_json(const Assignment& a) {
  ordered_json arr = ordered_json::array();
  for (int v : a) arr.push_back(v + 1);
  return arr;
}

Assignment assignment_from_json(const ordered_json& arr) {
  Assignment a;
  for (const auto& v : arr) a.push_back(v.get<int>() - 1);
  return a;
}

}  // namespace

std::string oracle_to_json(const OracleData& oracle) {
  ordered_json j;
  j["net_digest"] = digest_hex(oracle.net_digest);
  j["ev_digest"] = digest_hex(oracle.ev_digest);
  j["k"] = oracle.k;
  j["total_mass"] = oracle.solutions.total_mass;
  j["visited"] = oracle.solutions.visited;
  ordered_json best = ordered_json::array();
  for (const RankedSolution& s : oracle.solutions.best) {
    ordered_json entry;
    entry["assignment"] = assignment_to_json(s.assignment);
    entry["probability"] = s.probability;
    best.push_back(std::move(entry));
  }
  j["best"] = std::move(best);
  return j.dump(2) + "\n";
}

OracleData oracle_from_json(const std::string& text) {
  try {
    ordered_json j = ordered_json::parse(text);
    OracleData oracle;
    oracle.net_digest =
        std::stoull(j.at("net_digest").get<std::string>(), nullptr, 16);
    oracle.ev_digest =
        std::stoull(j.at("ev_digest").get<std::string>(), nullptr, 16);
    oracle.k = j.at("k").get<std::size_t>();
    oracle.solutions.total_mass = j.at("total_mass").get<double>();
    oracle.solutions.visited = j.at("visited").get<std::uint64_t>();
    for (const auto& entry : j.at("best")) {
      RankedSolution s;
      s.assignment = assignment_from_json(entry.at("assignment"));
      s.probability = entry.at("probability").get<double>();
      s.log_probability = s.probability > 0.0
                              ? std::log(s.probability)
                              : -std::numeric_limits<double>::infinity();
      oracle.solutions.best.push_back(std::move(s));
    }
    return oracle;
  } catch (const std::exception& e) {
    throw IoError(std::string("malformed oracle file: ") + e.what());
  }
}

OracleData load_or_compute_oracle(const Network& net, const Evidence& ev,
                                  std::size_t k, const std::string& path,
                                  std::uint64_t cap) {
  std::uint64_t nd = network_digest(net);
  std::uint64_t ed = evidence_digest(ev);
  if (!path.empty()) {
    try {
      OracleData cached = oracle_from_json(read_text_file(path));
      if (cached.net_digest == nd && cached.ev_digest == ed &&
          cached.k >= k) {
        return cached;
      }
    } catch (const IoError&) {
      // missing or stale cache: fall through and recompute
    }
  }
  OracleData fresh;
  fresh.net_digest = nd;
  fresh.ev_digest = ed;
  fresh.k = k;
  fresh.solutions = enumerate_top_k(net, ev, k, cap);
  if (!path.empty()) {
    write_text_file_atomic(path, oracle_to_json(fresh));
  }
  return fresh;
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) {
      double d = v - out.mean;
      ss += d * d;
    }
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::vector<SelectorSummary> summarize(const std::vector<RunRecord>& runs,
                                       std::size_t oracle_size) {
  std::vector<SelectorSummary> out;
  std::vector<Selector> order;
  for (const RunRecord& r : runs) {
    if (std::find(order.begin(), order.end(), r.selector) == order.end()) {
      order.push_back(r.selector);
    }
  }
  for (Selector s : order) {
    SelectorSummary sum;
    sum.selector = s;
    int top1 = 0;
    int top10 = 0;
    std::vector<double> g, eg, gc, egc, frac, prob;
    for (const RunRecord& r : runs) {
      if (r.selector != s) continue;
      ++sum.runs;
      if (r.rank == 1) ++top1;
      if (r.rank >= 1 && r.rank <= 10) ++top10;
      g.push_back(static_cast<double>(r.best_generation));
      eg.push_back(static_cast<double>(r.evaluations_at_best));
      frac.push_back(r.fraction_evaluated);
      prob.push_back(r.best_probability);
      if (r.converged) {
        ++sum.converged_runs;
        gc.push_back(static_cast<double>(r.convergence_generation));
        egc.push_back(static_cast<double>(r.evaluations_at_convergence));
      }
    }
    double n = static_cast<double>(sum.runs);
    if (oracle_size >= 1) sum.top1_rate = top1 / n;
    if (oracle_size >= 10) sum.top10_rate = top10 / n;
    sum.best_generation = mean_sd(g);
    sum.evaluations_at_best = mean_sd(eg);
    sum.convergence_generation = mean_sd(gc);
    sum.evaluations_at_convergence = mean_sd(egc);
    sum.fraction_evaluated = mean_sd(frac);
    sum.best_probability = mean_sd(prob);
    out.push_back(std::move(sum));
  }
  return out;
}

BenchResult run_bench(const Network& net, const Evidence& ev,
                      const BenchConfig& cfg, const OracleData& oracle,
                      const RunCallback& on_run) {
  cfg.ga.validate();
  if (cfg.runs_per_selector < 1) {
    throw std::invalid_argument("runs per selector must be at least 1");
  }
  if (cfg.selectors.empty()) {
    throw std::invalid_argument("no selectors requested");
  }
  BenchResult result;
  result.network_name = net.name();
  result.net_digest = network_digest(net);
  result.ev_digest = evidence_digest(ev);
  if (oracle.net_digest != result.net_digest ||
      oracle.ev_digest != result.ev_digest) {
    throw std::invalid_argument(
        "oracle was computed for a different network or evidence");
  }
  result.state_space = state_space_size_approx(net);
  result.oracle_k = oracle.solutions.best.size();

  for (Selector s : cfg.selectors) {
    GaConfig ga = cfg.ga;
    ga.selector = s;
    std::uint64_t ordinal = static_cast<std::uint64_t>(s);
    for (int run = 0; run < cfg.runs_per_selector; ++run) {
      std::uint64_t seed = Rng::mix(
          cfg.master_seed,
          ordinal * 1'000'003ULL + static_cast<std::uint64_t>(run));
      RunResult res = run_ga(net, ev, ga, seed);
      RunRecord rec;
      rec.selector = s;
      rec.run = run;
      rec.seed = seed;
      rec.best = res.best;
      rec.best_probability = res.best_probability;
      rec.rank = oracle.solutions.rank_of(res.best);
      rec.best_generation = res.best_generation;
      rec.evaluations_at_best = res.evaluations_at_best;
      rec.converged = res.converged;
      rec.convergence_generation = res.convergence_generation;
      rec.evaluations_at_convergence = res.evaluations_at_convergence;
      rec.generations = res.generations;
      rec.evaluations = res.evaluations;
      std::uint64_t spent =
          res.converged ? res.evaluations_at_convergence : res.evaluations;
      rec.fraction_evaluated =
          static_cast<double>(spent) / result.state_space;
      if (on_run) on_run(rec);
      result.runs.push_back(std::move(rec));
    }
  }
  result.summaries = summarize(result.runs, result.oracle_k);
  return result;
}

std::string run_record_csv_header() {
  return "selector,run,seed,converged,generations,evaluations,"
         "best_generation,evaluations_at_best,convergence_generation,"
         "evaluations_at_convergence,fraction_evaluated,rank,"
         "best_probability,best_assignment";
}

std::string to_csv_row(const RunRecord& rec) {
  std::string row = to_string(rec.selector);
  row += ',' + std::to_string(rec.run);
  row += ',' + std::to_string(rec.seed);
  row += ',' + std::string(rec.converged ? "1" : "0");
  row += ',' + std::to_string(rec.generations);
  row += ',' + std::to_string(rec.evaluations);
  row += ',' + std::to_string(rec.best_generation);
  row += ',' + std::to_string(rec.evaluations_at_best);
  row += ',' + std::to_string(rec.convergence_generation);
  row += ',' + std::to_string(rec.evaluations_at_convergence);
  row += ',' + format_double(rec.fraction_evaluated);
  row += ',' + std::to_string(rec.rank);
  row += ',' + format_double(rec.best_probability);
  row += ',';
  for (std::size_t i = 0; i < rec.best.size(); ++i) {
    if (i > 0) row += '-';
    row += std::to_string(rec.best[i] + 1);
  }
  return row;
}

namespace {

ordered_json mean_sd_json(const MeanSd& m) {
  ordered_json j;
  j["count"] = m.count;
  if (m.count > 0) {
    j["mean"] = m.mean;
  } else {
    j["mean"] = nullptr;
  }
  if (m.sd) {
    j["sd"] = *m.sd;
  } else {
    j["sd"] = nullptr;
  }
  return j;
}

ordered_json optional_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

}  // namespace

std::string bench_summary_json(const BenchResult& result,
                               const BenchConfig& cfg,
                               const OracleData& oracle) {
  ordered_json j;
  j["network"]["name"] = result.network_name;
  j["network"]["digest"] = digest_hex(result.net_digest);
  j["network"]["state_space"] = result.state_space;
  j["evidence"]["digest"] = digest_hex(result.ev_digest);
  ordered_json c;
  c["population_size"] = cfg.ga.population_size;
  c["breeding_selectivity"] = cfg.ga.breeding_selectivity;
  c["average_lifetime"] = cfg.ga.average_lifetime;
  c["mutation_frequency"] = cfg.ga.mutation_frequency;
  c["convergence_threshold"] = cfg.ga.convergence_threshold;
  c["convergence_patience"] = cfg.ga.convergence_patience;
  c["max_generations"] = cfg.ga.max_generations;
  c["max_evaluations"] = cfg.ga.max_evaluations;
  c["runs_per_selector"] = cfg.runs_per_selector;
  c["master_seed"] = cfg.master_seed;
  j["config"] = std::move(c);
  ordered_json o;
  o["k"] = result.oracle_k;
  o["total_mass"] = oracle.solutions.total_mass;
  o["visited"] = oracle.solutions.visited;
  ordered_json top = ordered_json::array();
  std::size_t head = std::min<std::size_t>(10, oracle.solutions.best.size());
  for (std::size_t i = 0; i < head; ++i) {
    const RankedSolution& s = oracle.solutions.best[i];
    ordered_json entry;
    entry["rank"] = i + 1;
    entry["assignment"] = assignment_to_json(s.assignment);
    entry["probability"] = s.probability;
    top.push_back(std::move(entry));
  }
  o["top"] = std::move(top);
  j["oracle"] = std::move(o);
  ordered_json sels = ordered_json::array();
  for (const SelectorSummary& s : result.summaries) {
    ordered_json e;
    e["selector"] = to_string(s.selector);
    e["runs"] = s.runs;
    e["converged_runs"] = s.converged_runs;
    e["top1_rate"] = optional_json(s.top1_rate);
    e["top10_rate"] = optional_json(s.top10_rate);
    e["best_generation"] = mean_sd_json(s.best_generation);
    e["evaluations_at_best"] = mean_sd_json(s.evaluations_at_best);
    e["convergence_generation"] = mean_sd_json(s.convergence_generation);
    e["evaluations_at_convergence"] =
        mean_sd_json(s.evaluations_at_convergence);
    e["fraction_evaluated"] = mean_sd_json(s.fraction_evaluated);
    e["best_probability"] = mean_sd_json(s.best_probability);
    sels.push_back(std::move(e));
  }
  j["selectors"] = std::move(sels);
  return j.dump(2) + "\n";
}

}  // namespace bn
