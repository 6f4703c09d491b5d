#include "bn/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace bn {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

namespace {

struct Token {
  std::string text;
  int column;
};

// Splits a line on whitespace, dropping everything after '#'.
std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == ',') {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && line[i] != '#' && line[i] != ',' &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    tokens.push_back({std::string(line.substr(start, i - start)),
                      static_cast<int>(start) + 1});
  }
  return tokens;
}

int parse_int(const Token& tok, int line_no, const char* what) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
  if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size())
    throw ParseError(std::string("expected ") + what + ", got '" + tok.text + "'",
                     line_no, tok.column);
  return value;
}

double parse_prob(const Token& tok, int line_no) {
  double value = 0;
  auto [ptr, ec] =
      std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
  if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size())
    throw ParseError("bad probability literal '" + tok.text + "'", line_no,
                     tok.column);
  if (value < 0.0 || value > 1.0)
    throw ParseError("probability " + tok.text + " outside [0,1]", line_no,
                     tok.column);
  return value;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace

namespace {

Network parse_network_impl(std::string_view text) {
  const auto lines = split_lines(text);

  std::string name;
  bool have_network = false;
  std::vector<NodeSpec> nodes;
  std::unordered_map<std::string, std::size_t> node_pos;

  // CPT body state: when > 0, the next non-empty lines are probability rows.
  std::size_t cpt_node = 0;
  std::size_t cpt_rows_left = 0;
  std::vector<int> cpt_parent_cards;

  auto node_at = [&](const Token& tok, int line_no) -> std::size_t {
    auto it = node_pos.find(tok.text);
    if (it == node_pos.end())
      throw ParseError("unknown node '" + tok.text + "'", line_no, tok.column);
    return it->second;
  };

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    auto tokens = tokenize(lines[li]);
    if (tokens.empty()) continue;

    if (cpt_rows_left > 0) {
      NodeSpec& spec = nodes[cpt_node];
      if (tokens.size() != static_cast<std::size_t>(spec.state_count))
        throw ParseError("CPT row for node " + spec.id + " needs " +
                             std::to_string(spec.state_count) +
                             " probabilities, got " +
                             std::to_string(tokens.size()),
                         line_no, tokens.front().column);
      double sum = 0.0;
      for (const auto& tok : tokens) {
        const double p = parse_prob(tok, line_no);
        spec.cpt.probs.push_back(p);
        sum += p;
      }
      if (std::abs(sum - 1.0) > kCptRowSumTolerance) {
        const std::size_t row = spec.cpt.probs.size() / spec.state_count;
        throw ParseError("CPT row " + std::to_string(row) + " of node " +
                             spec.id + " sums to " + format_double(sum),
                         line_no, tokens.front().column);
      }
      --cpt_rows_left;
      continue;
    }

    const std::string& kw = tokens[0].text;
    if (kw == "network") {
      if (tokens.size() != 2)
        throw ParseError("usage: network <name>", line_no, tokens[0].column);
      if (have_network)
        throw ParseError("duplicate network declaration", line_no,
                         tokens[0].column);
      name = tokens[1].text;
      have_network = true;
    } else if (kw == "node") {
      if (tokens.size() != 4 || tokens[2].text != "states")
        throw ParseError("usage: node <id> states <k>", line_no,
                         tokens[0].column);
      const int k = parse_int(tokens[3], line_no, "state count");
      if (k < 1)
        throw ParseError("node " + tokens[1].text + ": state count must be >= 1",
                         line_no, tokens[3].column);
      if (node_pos.contains(tokens[1].text))
        throw ParseError("duplicate node '" + tokens[1].text + "'", line_no,
                         tokens[1].column);
      node_pos.emplace(tokens[1].text, nodes.size());
      NodeSpec spec;
      spec.id = tokens[1].text;
      spec.state_count = k;
      nodes.push_back(std::move(spec));
    } else if (kw == "parents") {
      if (tokens.size() < 2)
        throw ParseError("usage: parents <id> <pid>...", line_no,
                         tokens[0].column);
      NodeSpec& spec = nodes[node_at(tokens[1], line_no)];
      if (!spec.parents.empty())
        throw ParseError("duplicate parents declaration for node " + spec.id,
                         line_no, tokens[1].column);
      std::unordered_set<std::string> seen;
      for (std::size_t t = 2; t < tokens.size(); ++t) {
        if (!node_pos.contains(tokens[t].text))
          throw ParseError("unknown parent '" + tokens[t].text + "' of node " +
                               spec.id,
                           line_no, tokens[t].column);
        if (tokens[t].text == spec.id)
          throw ParseError("node " + spec.id + " cannot be its own parent",
                           line_no, tokens[t].column);
        if (!seen.insert(tokens[t].text).second)
          throw ParseError("duplicate parent '" + tokens[t].text + "' of node " +
                               spec.id,
                           line_no, tokens[t].column);
        spec.parents.push_back(tokens[t].text);
      }
    } else if (kw == "cpt") {
      if (tokens.size() != 2)
        throw ParseError("usage: cpt <id>", line_no, tokens[0].column);
      cpt_node = node_at(tokens[1], line_no);
      NodeSpec& spec = nodes[cpt_node];
      if (!spec.cpt.probs.empty())
        throw ParseError("duplicate cpt block for node " + spec.id, line_no,
                         tokens[1].column);
      cpt_parent_cards.clear();
      for (const auto& pid : spec.parents)
        cpt_parent_cards.push_back(nodes[node_pos.at(pid)].state_count);
      spec.cpt.parent_cards = cpt_parent_cards;
      spec.cpt.child_card = spec.state_count;
      cpt_rows_left = spec.cpt.row_count();
      spec.cpt.probs.reserve(cpt_rows_left *
                             static_cast<std::size_t>(spec.state_count));
    } else {
      throw ParseError("unknown directive '" + kw + "'", line_no,
                       tokens[0].column);
    }
  }

  if (cpt_rows_left > 0)
    throw ParseError("unterminated CPT block for node " + nodes[cpt_node].id +
                         " (" + std::to_string(cpt_rows_left) +
                         " row(s) missing)",
                     static_cast<int>(lines.size()), 1);
  if (!have_network)
    throw ParseError("no network declared", 1, 1);
  for (const auto& spec : nodes)
    if (spec.cpt.probs.empty())
      throw ParseError("node " + spec.id + " has no cpt block",
                       static_cast<int>(lines.size()), 1);

  Network net(name, std::move(nodes));
  auto report = validate_network(net);
  if (!report.ok())
    throw ParseError("invalid network: " + report.violations.front().message, 0,
                     0);
  return net;
}

}  // namespace

Network parse_network(std::string_view text, const std::string& source) {
  try {
    return parse_network_impl(text);
  } catch (const ParseError& e) {
    if (source.empty()) throw;
    throw ParseError(e.message, e.line, e.column, source);
  }
}

std::string serialize_network(const Network& net) {
  std::ostringstream out;
  out << "network " << net.name() << "\n";
  for (const auto& spec : net.nodes())
    out << "node " << spec.id << " states " << spec.state_count << "\n";
  for (const auto& spec : net.nodes()) {
    if (spec.parents.empty()) continue;
    out << "parents " << spec.id;
    for (const auto& pid : spec.parents) out << ' ' << pid;
    out << "\n";
  }
  for (const auto& spec : net.nodes()) {
    out << "cpt " << spec.id << "\n";
    const std::size_t rows = spec.cpt.row_count();
    for (std::size_t r = 0; r < rows; ++r) {
      for (int s = 0; s < spec.state_count; ++s) {
        if (s) out << ' ';
        out << format_double(spec.cpt.at(r, s));
      }
      out << "\n";
    }
  }
  return out.str();
}

namespace {

Evidence parse_evidence_impl(std::string_view text) {
  Evidence ev;
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    for (const auto& tok : tokenize(lines[li])) {
      const auto eq = tok.text.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == tok.text.size())
        throw ParseError("expected <node>=<state>, got '" + tok.text + "'",
                         line_no, tok.column);
      Token state_tok{tok.text.substr(eq + 1),
                      tok.column + static_cast<int>(eq) + 1};
      const int state = parse_int(state_tok, line_no, "state (1-based)");
      if (state < 1)
        throw ParseError("states are 1-based; got " + state_tok.text, line_no,
                         state_tok.column);
      ev.bindings.emplace_back(tok.text.substr(0, eq), state - 1);
    }
  }
  return ev;
}

}  // namespace

Evidence parse_evidence(std::string_view text, const std::string& source) {
  try {
    return parse_evidence_impl(text);
  } catch (const ParseError& e) {
    if (source.empty()) throw;
    throw ParseError(e.message, e.line, e.column, source);
  }
}

std::string serialize_evidence(const Evidence& ev) {
  std::ostringstream out;
  for (const auto& [id, state] : ev.bindings)
    out << id << '=' << state + 1 << "\n";
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return buf.str();
}

Network load_network(const std::string& path) {
  return parse_network(read_text_file(path), path);
}

Evidence load_evidence(const std::string& path) {
  return parse_evidence(read_text_file(path), path);
}

void write_text_file_atomic(const std::string& path, std::string_view text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("error writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " +
                        ec.message());
}

}  // namespace bn
