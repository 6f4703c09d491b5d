#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bn/bench.hpp"
#include "bn/exact.hpp"
#include "bn/ga.hpp"
#include "bn/generator.hpp"
#include "bn/io.hpp"
#include "bn/network.hpp"

namespace {

using nlohmann::ordered_json;

std::string fmt_assignment(const bn::Assignment& a) {
  std::string out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i > 0) out += '-';
    out += std::to_string(a[i] + 1);
  }
  return out;
}

bn::Assignment parse_assignment(const std::string& text, int node_count) {
  bn::Assignment a;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    a.push_back(std::stoi(token) - 1);
    token.clear();
  };
  for (char c : text) {
    if (c == '-' || c == ',') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  if (a.size() != static_cast<std::size_t>(node_count)) {
    throw std::invalid_argument("assignment '" + text + "' has " +
                                std::to_string(a.size()) + " states, expected " +
                                std::to_string(node_count));
  }
  return a;
}

// "15x2,5x3" means 15 binary nodes followed by 5 three-state nodes.
std::vector<int> parse_state_spec(const std::string& text) {
  std::vector<int> cards;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t x = token.find('x');
    if (x == std::string::npos) {
      cards.push_back(std::stoi(token));
    } else {
      int count = std::stoi(token.substr(0, x));
      int card = std::stoi(token.substr(x + 1));
      if (count < 0) throw std::invalid_argument("negative node count");
      cards.insert(cards.end(), static_cast<std::size_t>(count), card);
    }
    token.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return cards;
}

bn::Evidence load_evidence_opt(const std::string& path) {
  if (path.empty()) return {};
  return bn::load_evidence(path);
}

int count_arcs(const bn::Network& net) {
  int arcs = 0;
  for (const bn::NodeSpec& n : net.nodes()) {
    arcs += static_cast<int>(n.parents.size());
  }
  return arcs;
}

struct GaFlags {
  bn::GaConfig cfg;
  std::string selector = "uniform";

  void attach(CLI::App* cmd, bool with_selector = true) {
    cmd->add_option("--pop", cfg.population_size, "population size");
    cmd->add_option("--selectivity", cfg.breeding_selectivity,
                    "breeding pool fraction");
    cmd->add_option("--lifetime", cfg.average_lifetime,
                    "average individual lifetime in generations");
    cmd->add_option("--mutation", cfg.mutation_frequency,
                    "mutations per generation as a population fraction");
    if (with_selector) {
      cmd->add_option("--selector", selector,
                      "parent selection: uniform, proportional or "
                      "transformed");
    }
    cmd->add_option("--threshold", cfg.convergence_threshold,
                    "modal genotype fraction that counts as converged");
    cmd->add_option("--patience", cfg.convergence_patience,
                    "consecutive converged generations required");
    cmd->add_option("--max-gens", cfg.max_generations, "generation limit");
    cmd->add_option("--max-evals", cfg.max_evaluations,
                    "evaluation budget, 0 for unlimited");
  }

  bn::GaConfig resolve() const {
    bn::GaConfig out = cfg;
    out.selector = bn::selector_from_string(selector);
    out.validate();
    return out;
  }
};

void cmd_validate(const std::string& net_path) {
  bn::Network net = bn::load_network(net_path);
  std::cout << "ok: " << net.name() << ": " << net.node_count() << " nodes, "
            << count_arcs(net) << " arcs, state space "
            << bn::format_double(bn::state_space_size_approx(net)) << "\n";
}

void cmd_enumerate(const std::string& net_path, const std::string& ev_path,
                   std::size_t k, std::uint64_t cap, const std::string& out) {
  bn::Network net = bn::load_network(net_path);
  bn::Evidence ev = load_evidence_opt(ev_path);
  bn::OracleData oracle = bn::load_or_compute_oracle(net, ev, k, out, cap);
  std::cout << "visited " << oracle.solutions.visited << " assignments, mass "
            << bn::format_double(oracle.solutions.total_mass) << "\n";
  for (std::size_t i = 0; i < oracle.solutions.best.size() && i < k; ++i) {
    const bn::RankedSolution& s = oracle.solutions.best[i];
    std::cout << (i + 1) << "  " << bn::format_double(s.probability) << "  "
              << fmt_assignment(s.assignment) << "\n";
  }
  if (!out.empty()) {
    std::cout << "oracle written to " << out << "\n";
  }
}

void write_trace(const std::string& path,
                 const std::vector<bn::GenerationStats>& history) {
  std::string text =
      "generation,best_log_phenotype,mean_phenotype,distinct_mass,"
      "mode_fraction,offspring_improvement,evaluations\n";
  for (const bn::GenerationStats& row : history) {
    text += std::to_string(row.generation);
    text += ',' + bn::format_double(row.best_log_phenotype);
    text += ',' + bn::format_double(row.mean_phenotype);
    text += ',' + bn::format_double(row.distinct_mass);
    text += ',' + bn::format_double(row.mode_fraction);
    text += ',';
    if (row.offspring_improvement) {
      text += bn::format_double(*row.offspring_improvement);
    }
    text += ',' + std::to_string(row.evaluations);
    text += '\n';
  }
  bn::write_text_file_atomic(path, text);
}

void cmd_solve(const std::string& net_path, const std::string& ev_path,
               const GaFlags& flags, std::uint64_t seed,
               const std::string& out, const std::string& trace) {
  bn::Network net = bn::load_network(net_path);
  bn::Evidence ev = load_evidence_opt(ev_path);
  bn::GaConfig cfg = flags.resolve();
  bn::RunResult res = bn::run_ga(net, ev, cfg, seed);

  std::cout << "best " << fmt_assignment(res.best) << "  p="
            << bn::format_double(res.best_probability) << "\n";
  std::cout << "created at generation " << res.best_generation << " after "
            << res.evaluations_at_best << " evaluations\n";
  if (res.converged) {
    std::cout << "converged at generation " << res.convergence_generation
              << " after " << res.evaluations_at_convergence
              << " evaluations\n";
  } else {
    std::cout << "not converged\n";
  }
  std::cout << "ran " << res.generations << " generations, "
            << res.evaluations << " evaluations\n";

  if (!out.empty()) {
    ordered_json j;
    j["network"] = net.name();
    j["seed"] = seed;
    j["selector"] = bn::to_string(cfg.selector);
    j["best"]["assignment"] = ordered_json::array();
    for (int v : res.best) j["best"]["assignment"].push_back(v + 1);
    j["best"]["probability"] = res.best_probability;
    j["best"]["log_probability"] = res.best_log_phenotype;
    j["best_generation"] = res.best_generation;
    j["evaluations_at_best"] = res.evaluations_at_best;
    j["converged"] = res.converged;
    if (res.converged) {
      j["convergence_generation"] = res.convergence_generation;
      j["evaluations_at_convergence"] = res.evaluations_at_convergence;
    } else {
      j["convergence_generation"] = nullptr;
      j["evaluations_at_convergence"] = nullptr;
    }
    j["generations"] = res.generations;
    j["evaluations"] = res.evaluations;
    bn::write_text_file_atomic(out, j.dump(2) + "\n");
  }
  if (!trace.empty()) {
    write_trace(trace, res.history);
  }
}

void cmd_baseline(const std::string& net_path, const std::string& ev_path,
                  const std::string& algo, std::uint64_t seed, int restarts,
                  std::uint64_t budget, int radius, const std::string& center,
                  const std::string& metric_name) {
  bn::Network net = bn::load_network(net_path);
  bn::Evidence ev = load_evidence_opt(ev_path);
  bn::Evaluator eval(net);
  bn::Rng rng(seed);
  std::vector<int> fixed = ev.bind(net);
  bn::Assignment best;

  if (algo == "greedy") {
    if (restarts < 1) throw std::invalid_argument("restarts must be positive");
    double best_log = 0.0;
    for (int r = 0; r < restarts; ++r) {
      bn::Assignment a = bn::greedy_ascent(
          eval, ev, bn::random_assignment(net, fixed, rng));
      double l = bn::log_joint_probability(net, a);
      if (best.empty() || l > best_log) {
        best_log = l;
        best = std::move(a);
      }
    }
  } else if (algo == "random") {
    best = bn::random_search(eval, ev, budget, rng);
  } else if (algo == "refine") {
    bn::RefineMetric metric;
    if (metric_name == "state") {
      metric = bn::RefineMetric::state_difference;
    } else if (metric_name == "hamming") {
      metric = bn::RefineMetric::hamming;
    } else {
      throw std::invalid_argument("unknown metric '" + metric_name +
                                  "' (expected state or hamming)");
    }
    bn::Assignment c;
    if (center.empty()) {
      c = bn::greedy_ascent(eval, ev, bn::random_assignment(net, fixed, rng));
    } else {
      c = parse_assignment(center, net.node_count());
    }
    best = bn::local_refine(eval, ev, c, radius, metric);
  } else {
    throw std::invalid_argument("unknown algorithm '" + algo +
                                "' (expected greedy, random or refine)");
  }

  std::cout << "best " << fmt_assignment(best) << "  p="
            << bn::format_double(bn::joint_probability(net, best)) << "\n";
  std::cout << "evaluations " << eval.evaluations() << "\n";
}

void cmd_bench(const std::string& net_path, const std::string& ev_path,
               const GaFlags& flags, std::vector<std::string> selector_names,
               int runs, std::uint64_t seed, std::size_t k, std::uint64_t cap,
               const std::string& out, std::string oracle_path) {
  bn::Network net = bn::load_network(net_path);
  bn::Evidence ev = load_evidence_opt(ev_path);

  bn::BenchConfig cfg;
  cfg.ga = flags.resolve();
  if (selector_names.empty()) {
    selector_names = {"uniform", "proportional", "transformed"};
  }
  for (const std::string& name : selector_names) {
    cfg.selectors.push_back(bn::selector_from_string(name));
  }
  cfg.runs_per_selector = runs;
  cfg.master_seed = seed;

  if (oracle_path.empty()) oracle_path = out + ".oracle.json";
  bn::OracleData oracle =
      bn::load_or_compute_oracle(net, ev, k, oracle_path, cap);

  std::string csv_path = out + ".csv";
  std::string partial_path = csv_path + ".partial";
  std::ofstream csv(partial_path, std::ios::trunc);
  if (!csv) throw bn::IoError("cannot write " + partial_path);
  csv << bn::run_record_csv_header() << "\n";
  csv.flush();

  bn::BenchResult result = bn::run_bench(
      net, ev, cfg, oracle, [&](const bn::RunRecord& rec) {
        csv << bn::to_csv_row(rec) << "\n";
        csv.flush();
      });
  csv.close();
  std::filesystem::rename(partial_path, csv_path);

  bn::write_text_file_atomic(out + ".json",
                             bn::bench_summary_json(result, cfg, oracle));

  for (const bn::SelectorSummary& s : result.summaries) {
    std::cout << bn::to_string(s.selector) << ": " << s.runs << " runs, "
              << s.converged_runs << " converged";
    if (s.top1_rate) {
      std::cout << ", top1 " << bn::format_double(*s.top1_rate * 100) << "%";
    }
    if (s.top10_rate) {
      std::cout << ", top10 " << bn::format_double(*s.top10_rate * 100)
                << "%";
    }
    std::cout << ", mean G " << bn::format_double(s.best_generation.mean)
              << ", mean evals@G "
              << bn::format_double(s.evaluations_at_best.mean);
    if (s.convergence_generation.count > 0) {
      std::cout << ", mean Gc "
                << bn::format_double(s.convergence_generation.mean)
                << ", mean evals@Gc "
                << bn::format_double(s.evaluations_at_convergence.mean);
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << csv_path << ", " << out << ".json, " << oracle_path
            << "\n";
}

void cmd_gen(int nodes, const std::string& states, int cycles,
             int max_parents, std::uint64_t seed, const std::string& name,
             const std::string& out) {
  bn::GeneratorSpec spec;
  spec.node_count = nodes;
  spec.state_counts = parse_state_spec(states);
  spec.target_cycles = cycles;
  spec.max_parents = max_parents;
  spec.seed = seed;
  spec.name = name;
  bn::Network net = bn::generate_random_network(spec);
  std::string text = bn::serialize_network(net);
  if (out.empty()) {
    std::cout << text;
  } else {
    bn::write_text_file_atomic(out, text);
    std::cout << "wrote " << out << ": " << net.node_count() << " nodes, "
              << count_arcs(net) << " arcs\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete Bayesian network MPE toolkit"};
  app.require_subcommand(1);

  std::string net_path, ev_path, out, trace, oracle_path;
  std::uint64_t seed = 1;
  std::uint64_t cap = bn::kDefaultEnumerationCap;
  std::size_t k = 10;

  CLI::App* validate = app.add_subcommand(
      "validate", "parse a network file and report problems");
  validate->add_option("--net", net_path, "network file")->required();

  CLI::App* enumerate =
      app.add_subcommand("enumerate", "exact top-k by exhaustive sweep");
  enumerate->add_option("--net", net_path, "network file")->required();
  enumerate->add_option("--evidence", ev_path, "evidence file");
  enumerate->add_option("--k", k, "number of top assignments");
  enumerate->add_option("--cap", cap, "assignment count limit");
  enumerate->add_option("--out", out, "write the oracle as JSON");

  GaFlags solve_flags;
  solve_flags.cfg.mutation_frequency = 0.025;
  CLI::App* solve =
      app.add_subcommand("solve", "evolutionary search for the MPE");
  solve->add_option("--net", net_path, "network file")->required();
  solve->add_option("--evidence", ev_path, "evidence file");
  solve_flags.attach(solve);
  solve->add_option("--seed", seed, "random seed");
  solve->add_option("--out", out, "write the run result as JSON");
  solve->add_option("--trace", trace, "write per-generation stats as CSV");

  std::string algo = "greedy", center, metric_name = "state";
  int restarts = 1, radius = 2;
  std::uint64_t budget = 1000;
  CLI::App* baseline =
      app.add_subcommand("baseline", "non-evolutionary reference searches");
  baseline->add_option("--net", net_path, "network file")->required();
  baseline->add_option("--evidence", ev_path, "evidence file");
  baseline->add_option("--algo", algo, "greedy, random or refine");
  baseline->add_option("--seed", seed, "random seed");
  baseline->add_option("--restarts", restarts, "greedy restarts");
  baseline->add_option("--budget", budget, "random search evaluations");
  baseline->add_option("--radius", radius, "refinement radius");
  baseline->add_option("--center", center,
                       "refinement center, 1-based states like 1-2-2-1");
  baseline->add_option("--metric", metric_name,
                       "refinement metric: state or hamming");

  GaFlags bench_flags;
  std::vector<std::string> selector_names;
  int runs = 25;
  CLI::App* bench = app.add_subcommand(
      "bench", "repeated runs per selector, scored against the oracle");
  bench->add_option("--net", net_path, "network file")->required();
  bench->add_option("--evidence", ev_path, "evidence file");
  bench_flags.attach(bench, false);
  bench->add_option("--selector", selector_names,
                    "selectors to compare, default all three");
  bench->add_option("--runs", runs, "runs per selector");
  bench->add_option("--seed", seed, "master seed");
  bench->add_option("--k", k, "oracle depth");
  bench->add_option("--cap", cap, "oracle assignment count limit");
  bench->add_option("--out", out, "output prefix for .csv and .json")
      ->required();
  bench->add_option("--oracle", oracle_path,
                    "oracle cache path, defaults to <out>.oracle.json");

  int nodes = 0, cycles = 0, max_parents = 3;
  std::string states, name = "generated";
  CLI::App* gen =
      app.add_subcommand("gen", "sample a random network to a file");
  gen->add_option("--nodes", nodes, "node count")->required();
  gen->add_option("--states", states,
                  "state counts like 15x2,5x3; default all binary");
  gen->add_option("--cycles", cycles, "undirected cycles in the skeleton");
  gen->add_option("--max-parents", max_parents, "per-node parent limit");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--name", name, "network name");
  gen->add_option("--out", out, "output file, stdout when omitted");

  try {
    app.parse(argc, argv);
    if (validate->parsed()) {
      cmd_validate(net_path);
    } else if (enumerate->parsed()) {
      cmd_enumerate(net_path, ev_path, k, cap, out);
    } else if (solve->parsed()) {
      cmd_solve(net_path, ev_path, solve_flags, seed, out, trace);
    } else if (baseline->parsed()) {
      cmd_baseline(net_path, ev_path, algo, seed, restarts, budget, radius,
                   center, metric_name);
    } else if (bench->parsed()) {
      cmd_bench(net_path, ev_path, bench_flags, selector_names, runs, seed, k,
                cap, out, oracle_path);
    } else if (gen->parsed()) {
      cmd_gen(nodes, states, cycles, max_parents, seed, name, out);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const bn::CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const bn::StateSpaceOverflow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const bn::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bn::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const bn::InfeasibleSpec& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
