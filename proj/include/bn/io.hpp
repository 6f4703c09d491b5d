#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "bn/network.hpp"

namespace bn {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line_no, int col_no,
             const std::string& source = "")
      : std::runtime_error((source.empty() ? "line " : source + ":") +
                           std::to_string(line_no) + ":" +
                           std::to_string(col_no) + ": " + msg),
        message(msg),
        line(line_no),
        column(col_no) {}
  std::string message;
  int line;
  int column;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Line-oriented network format, `#` starts a comment:
//
//   network <name>
//   node <id> states <k>
//   parents <id> <pid>...
//   cpt <id>
//   <k probabilities per line, one line per parent combination,
//    rows in row-major order of the declared parents>
//
// parse_network returns a network that passes validate_network; any
// violation is raised as a ParseError with a location. `source` is a
// label (usually a file name) prefixed to diagnostics.
Network parse_network(std::string_view text, const std::string& source = "");

// Canonical form: declaration order, LF endings, probabilities printed
// with shortest exact round-trip digits. Deterministic.
std::string serialize_network(const Network& net);

// Evidence files: `<id>=<state>` tokens (1-based states) separated by
// whitespace or commas; `#` comments. Binding against a concrete network
// happens later via Evidence::bind.
Evidence parse_evidence(std::string_view text, const std::string& source = "");
std::string serialize_evidence(const Evidence& ev);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

Network load_network(const std::string& path);
Evidence load_evidence(const std::string& path);
std::string read_text_file(const std::string& path);

// Writes via a temp file in the same directory, then renames.
void write_text_file_atomic(const std::string& path, std::string_view text);

}  // namespace bn
