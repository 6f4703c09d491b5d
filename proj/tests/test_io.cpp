#include <filesystem>
#include <string>

#include "doctest.h"

#include "bn/generator.hpp"
#include "bn/io.hpp"
#include "testutil.hpp"

using namespace bn;
using bntest::bn1_network;
using bntest::chain3;

#ifndef TEST_DATA_DIR
#error "TEST_DATA_DIR must point at the fixture directory"
#endif

namespace {

std::filesystem::path tmp_path(const std::string& leaf) {
  return std::filesystem::temp_directory_path() / leaf;
}

}  // namespace

TEST_CASE("serialize then parse is the identity") {
  for (const Network& net : {chain3(), bn1_network()}) {
    Network back = parse_network(serialize_network(net));
    CHECK(back == net);
  }

  GeneratorSpec spec;
  spec.node_count = 10;
  spec.target_cycles = 2;
  spec.state_counts = {2, 3, 2, 2, 4, 2, 2, 3, 2, 2};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    Network net = generate_random_network(spec);
    CHECK(parse_network(serialize_network(net)) == net);
  }
}

TEST_CASE("parser accepts comments, commas and flexible whitespace") {
  const char* text =
      "# header comment\n"
      "network  tiny   # trailing comment\n"
      "node a states 2\n"
      "node b states 2\r\n"
      "parents b, a\n"
      "cpt a\n"
      "  0.25, 0.75\n"
      "cpt b\n"
      "0.5 0.5\n"
      "\n"
      "0.125 0.875\n";
  Network net = parse_network(text);
  CHECK(net.name() == "tiny");
  CHECK(net.node_count() == 2);
  CHECK(net.node(0).cpt.probs == std::vector<double>{0.25, 0.75});
  CHECK(net.node(1).cpt.probs == std::vector<double>{0.5, 0.5, 0.125, 0.875});
  CHECK(net.parent_indices(1) == std::vector<int>{0});
}

TEST_CASE("parse errors carry locations and reasons") {
  auto line_of = [](const std::string& text) -> int {
    try {
      parse_network(text);
    } catch (const ParseError& e) {
      return e.line;
    }
    return -1;
  };

  SUBCASE("empty input") {
    CHECK_THROWS_WITH_AS(parse_network(""),
                         doctest::Contains("no network declared"), ParseError);
  }
  SUBCASE("unknown directive") {
    CHECK(line_of("network x\nnode a states 2\nbogus a\ncpt a\n0.5 0.5\n") ==
          3);
  }
  SUBCASE("states must be an integer") {
    CHECK_THROWS_AS(parse_network("network x\nnode a states two\n"),
                    ParseError);
  }
  SUBCASE("parents before the node exists") {
    CHECK_THROWS_AS(
        parse_network("network x\nparents a b\nnode a states 2\n"),
        ParseError);
  }
  SUBCASE("cpt row arity") {
    CHECK(line_of("network x\nnode a states 2\ncpt a\n0.5 0.25 0.25\n") == 4);
  }
  SUBCASE("bad probability literal") {
    CHECK_THROWS_AS(
        parse_network("network x\nnode a states 2\ncpt a\n0.5 oops\n"),
        ParseError);
  }
  SUBCASE("row sum points at the offending row") {
    const char* text =
        "network x\n"
        "node a states 2\n"
        "node b states 2\n"
        "parents b a\n"
        "cpt a\n"
        "0.5 0.5\n"
        "cpt b\n"
        "0.5 0.5\n"
        "0.9 0.2\n";
    CHECK(line_of(text) == 9);
  }
  SUBCASE("missing cpt rows") {
    CHECK_THROWS_AS(parse_network("network x\nnode a states 2\ncpt a\n"),
                    ParseError);
  }
  SUBCASE("duplicate declarations are caught at their location") {
    const char* text =
        "network x\n"
        "node a states 2\n"
        "node a states 2\n"
        "cpt a\n"
        "0.5 0.5\n";
    CHECK_THROWS_WITH_AS(parse_network(text),
                         doctest::Contains("duplicate node"), ParseError);
    CHECK(line_of(text) == 3);
  }
  SUBCASE("the source label is prefixed to diagnostics") {
    try {
      parse_network("network x\nnode a states nope\n", "foo.bnet");
      CHECK(false);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).substr(0, 9) == "foo.bnet:");
      CHECK(e.line == 2);
    }
  }
}

TEST_CASE("evidence text round-trips and rejects junk") {
  Evidence ev = parse_evidence("a=2, b=1 # observed\nc=3\n");
  REQUIRE(ev.bindings.size() == 3);
  CHECK(ev.bindings[0] == std::pair<std::string, int>("a", 1));
  CHECK(ev.bindings[1] == std::pair<std::string, int>("b", 0));
  CHECK(ev.bindings[2] == std::pair<std::string, int>("c", 2));

  Evidence back = parse_evidence(serialize_evidence(ev));
  CHECK(back.bindings == ev.bindings);

  CHECK(parse_evidence("").bindings.empty());
  CHECK_THROWS_AS(parse_evidence("a"), ParseError);
  CHECK_THROWS_AS(parse_evidence("a=x"), ParseError);
  CHECK_THROWS_AS(parse_evidence("a=0"), ParseError);  // states are 1-based
}

TEST_CASE("doubles are printed with shortest round-trip precision") {
  for (double v : {0.1, 1.0 / 3.0, 0.9813970814917497, 1e-300, 12288.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("the shipped fixture equals the in-code construction") {
  Network from_file =
      load_network(std::string(TEST_DATA_DIR) + "/bn1.bnet");
  CHECK(from_file == bn1_network());
}

TEST_CASE("file errors and atomic writes") {
  CHECK_THROWS_AS(load_network("/nonexistent/net.bnet"), IoError);

  std::filesystem::path p = tmp_path("bn_atomic_test.txt");
  write_text_file_atomic(p.string(), "first\n");
  CHECK(read_text_file(p.string()) == "first\n");
  write_text_file_atomic(p.string(), "second\n");
  CHECK(read_text_file(p.string()) == "second\n");
  std::filesystem::remove(p);

  std::filesystem::path np = tmp_path("bn_net_roundtrip.bnet");
  write_text_file_atomic(np.string(), serialize_network(chain3()));
  CHECK(load_network(np.string()) == chain3());
  std::filesystem::remove(np);

  try {
    std::filesystem::path bad = tmp_path("bn_bad_net.bnet");
    write_text_file_atomic(bad.string(), "network x\nnode a states zz\n");
    load_network(bad.string());
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bn_bad_net.bnet:2:") !=
          std::string::npos);
  }
}
