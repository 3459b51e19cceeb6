#include <doctest.h>

#include "support.hpp"

using namespace vnfp;

TEST_CASE("nobel germany builtin") {
  const auto g = nobel_germany();
  CHECK(g.node_count() == 17);
  CHECK(g.cable_count() == 26);
  CHECK(g.link_count() == 52);
  for (const auto& n : g.nodes()) CHECK(n.pm.capacity.cores() == 16);
  for (const auto& l : g.links()) {
    CHECK(l.capacity == Bandwidth::from_mbps(1000));
    CHECK(l.delay_ms > 0.0);
    CHECK(l.delay_ms < 2.0);
  }
  CHECK(g.node(15).name == "Muenchen");
  CHECK(g.power() == PowerParams{});
}

TEST_CASE("directed link ids pair up per cable") {
  const auto g = test::make_graph(3, {test::cable(0, 1), test::cable(1, 2)});
  CHECK(g.link(0).src == 0);
  CHECK(g.link(0).dst == 1);
  CHECK(g.link(1).src == 1);
  CHECK(g.link(1).dst == 0);
  CHECK(reverse_link(2) == 3);
  CHECK(reverse_link(3) == 2);
  CHECK(cable_of(3) == 1);
  CHECK(g.find_link(2, 1) == 3);
  CHECK_FALSE(g.find_link(0, 2).has_value());
  CHECK(g.out_links(1).size() == 2);
}

TEST_CASE("length to delay") {
  CHECK(link_delay_from_length(100.0) == doctest::Approx(0.5));
  CHECK(link_delay_from_length(0.0) == 0.0);
  CHECK_THROWS_AS(link_delay_from_length(-1.0), ValidationError);
}

TEST_CASE("parse accepts km, ms and bare lengths") {
  const auto g = parse_topology(
      "# tiny\n"
      "node 0 8 a\n"
      "node 1 8\n"
      "node 2 8\n"
      "link 0 1 100 200km\n"
      "link 1 2 50 0.25ms   # explicit delay\n"
      "link 0 2 10 40\n");
  REQUIRE(g.cable_count() == 3);
  CHECK(g.link(0).delay_ms == doctest::Approx(1.0));
  CHECK(g.link(2).delay_ms == doctest::Approx(0.25));
  CHECK(g.link(4).delay_ms == doctest::Approx(0.2));
  CHECK(g.link(2).capacity == Bandwidth::from_mbps(50));
  CHECK(g.node(0).name == "a");
  CHECK(g.max_link_delay() == doctest::Approx(1.0));
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse_topology("node 0 4\nnode 1 4\nlnk 0 1 10 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_topology("node 0 0\n"), ParseError);
  CHECK_THROWS_AS(parse_topology("node 0 4\nnode 1 4\nlink 0 1 -5 1\n"), ParseError);
  CHECK_THROWS_AS(parse_topology("node 0 4\nnode 1 4\nlink 0 1 5 -1km\n"), ParseError);
  CHECK_THROWS_AS(parse_topology("node 0 4\nnode 1 4\nlink 0 1 5 x\n"), ParseError);
}

TEST_CASE("graph validation") {
  CHECK_THROWS_AS(test::make_graph(2, {test::cable(0, 0)}), ValidationError);
  CHECK_THROWS_AS(test::make_graph(2, {test::cable(0, 2)}), ValidationError);
  CHECK_THROWS_AS(test::make_graph(2, {test::cable(0, 1), test::cable(1, 0)}), ValidationError);
  CHECK_THROWS_AS(test::make_graph(2, {test::cable(0, 1, 0.0)}), ValidationError);
  CHECK_THROWS_AS(NetworkGraph({}, {}), ValidationError);
  CHECK_THROWS_AS(parse_topology("node 0 4\nnode 2 4\n"), ValidationError);
}

TEST_CASE("serialize round trip") {
  const auto g = nobel_germany();
  const auto back = parse_topology(serialize_topology(g));
  CHECK(back == g);
}

TEST_CASE("power parameter validation") {
  PowerParams p;
  CHECK_NOTHROW(p.validate());
  p.p_sm = 300.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("default catalog") {
  const auto c = default_catalog();
  CHECK_NOTHROW(c.validate());
  REQUIRE(c.functions.size() == kFunctionKindCount);
  for (const auto& f : c.functions) {
    CHECK(f.demand.cores() == 4);
    CHECK(f.processing_capacity == Bandwidth::from_mbps(200));
    CHECK(f.processing_delay_ms == 10.0);
  }
  const auto* video = c.find_service("VideoStreaming");
  REQUIRE(video);
  CHECK(video->bandwidth == Bandwidth::from_mbps(4));
  CHECK(video->delay_budget_ms == 100.0);
  CHECK(video->chain ==
        std::vector<FunctionKind>{FunctionKind::NAT, FunctionKind::FW, FunctionKind::TM, FunctionKind::VOC,
                                  FunctionKind::IDPS});
  const auto* voip = c.find_service("VoIP");
  REQUIRE(voip);
  CHECK(voip->chain.front() == FunctionKind::NAT);
  CHECK(voip->chain.back() == FunctionKind::NAT);
  CHECK(c.find_service("OnlineGaming")->delay_budget_ms == 60.0);
  CHECK(c.find_service("WebService")->traffic_share == doctest::Approx(0.182));
  CHECK(c.find_service("Nope") == nullptr);

  auto bad = c;
  bad.services[0].traffic_share += 0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("function names") {
  for (std::size_t k = 0; k < kFunctionKindCount; ++k) {
    const auto f = static_cast<FunctionKind>(k);
    CHECK(parse_function_kind(function_name(f)) == f);
  }
  CHECK_FALSE(parse_function_kind("DPI").has_value());
}
