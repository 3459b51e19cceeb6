#include <doctest.h>

#include <random>

#include "support.hpp"
#include "vnfp/placement.hpp"

using namespace vnfp;

namespace {

std::vector<Bandwidth> ladder(std::initializer_list<double> mbps) {
  std::vector<Bandwidth> out;
  for (double b : mbps) out.push_back(Bandwidth::from_mbps(b));
  return out;
}

BiPlacementOptions lbi() {
  BiPlacementOptions o;
  o.betas = ladder({900, 700, 500, 300});
  return o;
}

// 0-1-3 is short but dark, 0-2-3 is long and will be lit.
NetworkGraph diamond() {
  return test::make_graph(4, {test::cable(0, 1, 1000, 1), test::cable(1, 3, 1000, 1), test::cable(0, 2, 1000, 5),
                              test::cable(2, 3, 1000, 5)});
}

std::vector<NodeId> path_nodes(const NetworkGraph& g, NodeId src, const std::vector<LinkId>& path) {
  std::vector<NodeId> out{src};
  for (LinkId l : path) out.push_back(g.link(l).dst);
  return out;
}

void check_solution(const NetworkState& s, const SolutionSet& sol, const std::vector<Demand>& demands) {
  CHECK(validate_state(s).empty());
  CHECK(sol.total_power == doctest::Approx(total_power(s)).epsilon(1e-12));
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const auto& o = sol.outcomes[i];
    CHECK(o.demand == demands[i].id);
    CHECK(o.accepted == s.allocations().count(demands[i].id) > 0);
    if (!o.accepted) {
      CHECK_FALSE(o.reason.empty());
      continue;
    }
    const auto& a = *o.allocation;
    REQUIRE(a.function_map.size() == demands[i].chain.size());
    for (std::size_t k = 0; k < a.function_map.size(); ++k) CHECK(a.function_map[k].function == demands[i].chain[k]);
    CHECK(a.total_delay_ms <= demands[i].delay_budget_ms + 1e-9);
  }
}

}  // namespace

TEST_CASE("edge weight") {
  const auto g = diamond();
  const auto cat = test::single_service_catalog({FunctionKind::NAT}, Bandwidth::from_mbps(10), 100.0);
  NetworkState s(g, cat);
  {
    StateOverlay view(s);
    // Dark link with two dark endpoints costs a full switch plus two ports.
    CHECK(edge_weight(view, 0, 1.0, 0.0) == doctest::Approx(1.0));
    CHECK(edge_weight(view, 4, 0.0, 1.0) == doctest::Approx(1.0));
    CHECK(edge_weight(view, 0, 0.0, 1.0) == doctest::Approx(0.2));
  }
  s.apply(test::demand_of(0, 0, 3, cat.services[0]),
          ChainPlacement{{{FunctionKind::NAT, 0, true}}, Route{{{}, {4, 6}}}});
  StateOverlay view(s);
  CHECK(edge_weight(view, 4, 1.0, 0.0) == 0.0);
  CHECK(edge_weight(view, 5, 0.75, 0.25) == doctest::Approx(0.25));
  // 0 -> 1: only switch 1 and the cable are dark.
  CHECK(edge_weight(view, 0, 1.0, 0.0) == doctest::Approx(67.0 / 132.0));
}

TEST_CASE("path search: collocated endpoints give empty paths") {
  const auto g = diamond();
  NetworkState s(g, default_catalog());
  const auto h = build_bih(s, ladder({500}));
  StateOverlay view(s);
  const auto p = calculate_best_path(view, h.island_at(0, 2), 2, 2, 2, Bandwidth::from_mbps(1), 0.0, {});
  REQUIRE(p);
  CHECK(p->to_pm.empty());
  CHECK(p->from_pm.empty());
  CHECK(p->propagation_ms == 0.0);
}

TEST_CASE("path search trades power for delay after a miss") {
  const auto g = diamond();
  const auto cat = test::single_service_catalog({FunctionKind::NAT}, Bandwidth::from_mbps(10), 100.0);
  NetworkState s(g, cat);
  s.apply(test::demand_of(0, 0, 3, cat.services[0]),
          ChainPlacement{{{FunctionKind::NAT, 0, true}}, Route{{{}, {4, 6}}}});
  const auto h = build_bih(s, ladder({500}));
  const auto& isl = h.island_at(0, 0);
  StateOverlay view(s);

  PathSearchStats loose;
  auto lit = calculate_best_path(view, isl, 0, 0, 3, Bandwidth::from_mbps(1), 50.0, {}, &loose);
  REQUIRE(lit);
  CHECK(lit->from_pm == std::vector<LinkId>{4, 6});
  CHECK(loose.weight_settings == 1);

  // The lit path needs 10 ms. At (0.75, 0.25) it still wins; at (0.5, 0.5) the dark one does.
  PathSearchStats tight;
  auto dark = calculate_best_path(view, isl, 0, 0, 3, Bandwidth::from_mbps(1), 5.0, {}, &tight);
  REQUIRE(dark);
  CHECK(dark->from_pm == std::vector<LinkId>{0, 2});
  CHECK(dark->gamma == doctest::Approx(0.5));
  CHECK(dark->omega == doctest::Approx(0.5));
  CHECK(dark->propagation_ms == doctest::Approx(2.0));
  CHECK(tight.weight_settings == 3);

  // Nothing fits 1 ms: every weight setting is tried once, then the search gives up.
  PathSearchStats none;
  CHECK_FALSE(calculate_best_path(view, isl, 0, 0, 3, Bandwidth::from_mbps(1), 1.0, {}, &none).has_value());
  CHECK(none.weight_settings == 4);

  PathSearchConfig coarse;
  coarse.delta_w = 0.5;
  PathSearchStats two;
  CHECK_FALSE(calculate_best_path(view, isl, 0, 0, 3, Bandwidth::from_mbps(1), 1.0, coarse, &two).has_value());
  CHECK(two.weight_settings == 2);
}

TEST_CASE("path search respects bandwidth and island bounds") {
  const auto g = diamond();
  NetworkState s(g, default_catalog());
  // Drain 0 -> 1 so only the long way is left for 100 Mb/s.
  s.set_residual_unchecked(0, Bandwidth::from_mbps(50));
  const auto h = build_bih(s, ladder({40}));
  StateOverlay view(s);
  auto p = calculate_best_path(view, h.island_at(0, 0), 0, 3, 3, Bandwidth::from_mbps(100), 100.0, {});
  REQUIRE(p);
  CHECK(p->to_pm == std::vector<LinkId>{4, 6});
  s.set_residual_unchecked(0, Bandwidth::from_mbps(1000));
  StateOverlay view2(s);
  CHECK_THROWS_AS(calculate_best_path(view2, BlockingIsland{0, Bandwidth::from_mbps(1), {0, 1}, {0, 1}}, 0, 1, 3,
                                      Bandwidth::from_mbps(1), 100.0, {}),
                  ValidationError);
  PathSearchConfig bad;
  bad.delta_w = 0.0;
  CHECK_THROWS_AS(calculate_best_path(view2, h.island_at(0, 0), 0, 0, 0, Bandwidth::from_mbps(1), 1.0, bad),
                  ValidationError);
}

TEST_CASE("candidate classes") {
  const auto g = test::make_graph(3, {test::cable(0, 1), test::cable(1, 2)});
  const auto cat = test::single_service_catalog({FunctionKind::NAT}, Bandwidth::from_mbps(100), 100.0);
  NetworkState s(g, cat);
  const auto h = build_bih(s, ladder({500}));
  const auto& isl = h.island_at(0, 0);
  {
    StateOverlay view(s);
    const auto c = get_candidate_pms(view, FunctionKind::NAT, isl, Bandwidth::from_mbps(50));
    CHECK(c == std::vector<Candidate>{{0, CandidateClass::ActivatePm},
                                      {1, CandidateClass::ActivatePm},
                                      {2, CandidateClass::ActivatePm}});
    CHECK(get_candidate_pms(view, FunctionKind::NAT, isl, Bandwidth::from_mbps(201)).empty());
  }
  // Half-loaded NAT on 1; PM 2 full of NATs with no headroom.
  s.apply(test::demand_of(0, 0, 2, cat.services[0]), ChainPlacement{{{FunctionKind::NAT, 1, true}}, Route{{{0}, {2}}}});
  auto big = cat.services[0];
  big.bandwidth = Bandwidth::from_mbps(200);
  for (int i = 1; i <= 4; ++i)
    s.apply(test::demand_of(i, 0, 2, big), ChainPlacement{{{FunctionKind::NAT, 2, true}}, Route{{{0, 2}, {}}}});
  StateOverlay view(s);
  CHECK(get_candidate_pms(view, FunctionKind::NAT, isl, Bandwidth::from_mbps(50)) ==
        std::vector<Candidate>{{1, CandidateClass::ReuseInstance}, {0, CandidateClass::ActivatePm}});
  CHECK(get_candidate_pms(view, FunctionKind::FW, isl, Bandwidth::from_mbps(50)) ==
        std::vector<Candidate>{{1, CandidateClass::NewOnActivePm}, {0, CandidateClass::ActivatePm}});
}

TEST_CASE("candidates are tried closest first") {
  const auto g =
      test::make_graph(5, {test::cable(0, 1), test::cable(1, 2), test::cable(2, 3), test::cable(3, 4)});
  const auto cat = test::single_service_catalog({FunctionKind::NAT}, Bandwidth::from_mbps(10), 100.0);
  NetworkState s(g, cat);
  auto opts = lbi();
  std::vector<std::vector<NodeId>> order;
  std::vector<std::optional<NodeId>> chosen;
  opts.trace = [&](const FunctionTrace& t) {
    std::vector<NodeId> o;
    for (const auto& e : t.evaluated) o.push_back(e.candidate.pm);
    order.push_back(o);
    chosen.push_back(t.chosen);
  };
  const std::vector<Demand> ds{test::demand_of(0, 3, 0, cat.services[0])};
  const auto sol = place_all(s, ds, opts);
  REQUIRE(sol.outcomes[0].accepted);
  REQUIRE(order.size() == 1);
  CHECK(order[0] == std::vector<NodeId>{3, 2, 4, 1, 0});
  // Every on-path PM costs the same; the closest one is kept.
  CHECK(chosen[0] == 3);
}

TEST_CASE("single function on a fresh tree matches exhaustive search") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = 2 + rng() % 9;
    const auto g = test::random_graph(rng, n, 0.0);
    const auto cat = test::single_service_catalog({FunctionKind::FW}, Bandwidth::from_mbps(5), 1000.0);
    const auto src = static_cast<NodeId>(rng() % n);
    const auto dst = static_cast<NodeId>((static_cast<std::size_t>(src) + 1 + rng() % (n - 1)) % n);
    const auto d = test::demand_of(0, src, dst, cat.services[0]);

    // Oracle: every PM with the unique tree paths around it.
    const NetworkState fresh(g, cat);
    double best = INFINITY;
    for (std::size_t pm = 0; pm < n; ++pm) {
      NetworkState t = fresh;
      const auto a = *hop_shortest_path(g, src, static_cast<NodeId>(pm));
      const auto b = *hop_shortest_path(g, static_cast<NodeId>(pm), dst);
      t.apply(d, ChainPlacement{{{FunctionKind::FW, static_cast<NodeId>(pm), true}}, Route{{a, b}}});
      best = std::min(best, total_power(t));
    }
    NetworkState s(g, cat);
    const std::vector<Demand> ds{d};
    const auto sol = place_all(s, ds, lbi());
    REQUIRE(sol.outcomes[0].accepted);
    CHECK(sol.total_power == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("two adjacent nodes, one NAT") {
  const auto g = test::make_graph(2, {test::cable(0, 1)});
  const auto cat = test::single_service_catalog({FunctionKind::NAT}, Bandwidth::from_mbps(4), 100.0);
  NetworkState s(g, cat);
  const std::vector<Demand> ds{test::demand_of(0, 0, 1, cat.services[0]), test::demand_of(1, 0, 1, cat.services[0])};
  const auto sol = place_all(s, ds, lbi());
  REQUIRE(sol.accepted() == 2);
  CHECK(sol.outcomes[0].added_power == doctest::Approx(437.0));
  CHECK(sol.outcomes[1].added_power == 0.0);
  CHECK(sol.total_power == doctest::Approx(437.0));
  CHECK(s.instances().size() == 1);
  check_solution(s, sol, ds);
}

TEST_CASE("repeating a demand costs nothing") {
  const auto g = nobel_germany();
  const auto cat = default_catalog();
  for (const auto& svc : cat.services) {
    NetworkState s(g, cat);
    const std::vector<Demand> ds{test::demand_of(0, 2, 14, svc), test::demand_of(1, 2, 14, svc)};
    const auto sol = place_all(s, ds, lbi());
    REQUIRE(sol.accepted() == 2);
    CHECK(sol.outcomes[1].added_power == 0.0);
  }
}

TEST_CASE("rejections leave the state untouched") {
  const auto g = test::make_graph(3, {test::cable(0, 1, 100), test::cable(1, 2)});
  const auto cat = test::single_service_catalog({FunctionKind::NAT}, Bandwidth::from_mbps(4), 100.0);
  NetworkState s(g, cat);
  const NetworkState before = s;

  // 0 sits alone in every island with beta above 100 Mb/s.
  std::vector<Demand> ds{test::demand_of(0, 0, 2, cat.services[0])};
  auto sol = place_all(s, ds, BiPlacementOptions{ladder({900, 500}), SelectionMode::Lowest, {}, {}});
  CHECK_FALSE(sol.outcomes[0].accepted);
  CHECK(sol.outcomes[0].reason.find("island") != std::string::npos);
  CHECK(s == before);
  CHECK(sol.acceptance_rate == 0.0);
  CHECK(sol.total_power == 0.0);

  // Processing alone exceeds the budget.
  auto slow = cat.services[0];
  slow.delay_budget_ms = 5.0;
  ds = {test::demand_of(1, 1, 2, slow)};
  sol = place_all(s, ds, lbi());
  CHECK_FALSE(sol.outcomes[0].accepted);
  CHECK(s == before);

  // Chain longer than the PMs can hold: 4 cores per node, 3 nodes, 4 functions.
  const auto small = test::make_graph(3, {test::cable(0, 1), test::cable(1, 2)}, 4);
  const auto long_cat = test::single_service_catalog(
      {FunctionKind::NAT, FunctionKind::FW, FunctionKind::TM, FunctionKind::VOC}, Bandwidth::from_mbps(4), 100.0);
  NetworkState t(small, long_cat);
  const NetworkState t0 = t;
  ds = {test::demand_of(0, 0, 2, long_cat.services[0])};
  CHECK_FALSE(place_all(t, ds, lbi()).outcomes[0].accepted);
  CHECK(t == t0);
  CHECK_FALSE(bc_place_all(t, ds).outcomes[0].accepted);
  CHECK(t == t0);
}

TEST_CASE("each function takes the cheapest evaluated candidate") {
  const auto g = nobel_germany();
  const auto cat = default_catalog();
  for (auto mode : {SelectionMode::Lowest, SelectionMode::Highest}) {
    NetworkState s(g, cat);
    auto opts = lbi();
    opts.mode = mode;
    std::size_t traced = 0;
    opts.trace = [&](const FunctionTrace& t) {
      ++traced;
      std::optional<double> best;
      for (const auto& e : t.evaluated)
        if (e.cost && (!best || *e.cost < *best)) best = e.cost;
      CHECK(t.chosen.has_value() == best.has_value());
      if (!best) return;
      std::optional<double> chosen_cost;
      for (const auto& e : t.evaluated)
        if (e.candidate.pm == *t.chosen) chosen_cost = e.cost;
      REQUIRE(chosen_cost);
      CHECK(*chosen_cost <= *best + 1e-9);
    };
    const auto ds = generate_demands(g, 60, cat, 8);
    const auto sol = place_all(s, ds, opts);
    CHECK(traced > 0);
    check_solution(s, sol, ds);
  }
}

TEST_CASE("placement is deterministic and consistent") {
  const auto g = nobel_germany();
  const auto cat = default_catalog();
  const auto ds = generate_demands(g, 150, cat, 31);
  for (auto mode : {SelectionMode::Lowest, SelectionMode::Highest}) {
    auto opts = lbi();
    opts.mode = mode;
    NetworkState a(g, cat), b(g, cat);
    const auto sa = place_all(a, ds, opts);
    const auto sb = place_all(b, ds, opts);
    CHECK(a == b);
    CHECK(a.dump() == b.dump());
    CHECK(sa.total_power == sb.total_power);
    check_solution(a, sa, ds);
  }
  NetworkState c(g, cat), d(g, cat);
  const auto sc = bc_place_all(c, ds);
  bc_place_all(d, ds);
  CHECK(c == d);
  check_solution(c, sc, ds);
}

TEST_CASE("summary metrics") {
  SolutionSet empty;
  const auto g = test::make_graph(2, {test::cable(0, 1)});
  NetworkState s(g, default_catalog());
  summarize(empty, s);
  CHECK(empty.acceptance_rate == 1.0);
  CHECK(empty.mean_delay_ms == 0.0);
  CHECK(empty.accepted() == 0);
}

TEST_CASE("betweenness of small shapes") {
  const auto line = test::make_graph(3, {test::cable(0, 1), test::cable(1, 2)});
  CHECK(betweenness(line).score == std::vector<double>{0.0, 2.0, 0.0});
  const auto star = test::make_graph(5, {test::cable(0, 1), test::cable(0, 2), test::cable(0, 3), test::cable(0, 4)});
  CHECK(betweenness(star).score == std::vector<double>{12.0, 0.0, 0.0, 0.0, 0.0});
  const auto square =
      test::make_graph(4, {test::cable(0, 1), test::cable(1, 2), test::cable(2, 3), test::cable(3, 0)});
  for (double v : betweenness(square).score) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("betweenness matches path enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto g = test::random_graph(rng, 2 + rng() % 8, 0.3);
    const auto got = betweenness(g).score;
    const auto want = test::betweenness_oracle(g);
    REQUIRE(got.size() == want.size());
    for (std::size_t v = 0; v < got.size(); ++v) CHECK(got[v] == doctest::Approx(want[v]).epsilon(1e-9));
  }
  const auto nobel = nobel_germany();
  const auto got = betweenness(nobel).score;
  const auto want = test::betweenness_oracle(nobel);
  for (std::size_t v = 0; v < got.size(); ++v) CHECK(got[v] == doctest::Approx(want[v]).epsilon(1e-9));
}

TEST_CASE("hop-shortest path breaks ties towards low ids") {
  const auto g = test::make_graph(4, {test::cable(0, 2), test::cable(0, 1), test::cable(2, 3), test::cable(1, 3)});
  const auto p = hop_shortest_path(g, 0, 3);
  REQUIRE(p);
  CHECK(path_nodes(g, 0, *p) == std::vector<NodeId>{0, 1, 3});
  CHECK(hop_shortest_path(g, 2, 2)->empty());
  CHECK_THROWS_AS(hop_shortest_path(g, 0, 9), ValidationError);
}

TEST_CASE("BC places on the most central path node") {
  const auto g = test::make_graph(3, {test::cable(0, 1), test::cable(1, 2)});
  const auto cat = test::single_service_catalog({FunctionKind::NAT, FunctionKind::FW}, Bandwidth::from_mbps(4), 100.0);
  NetworkState s(g, cat);
  const std::vector<Demand> ds{test::demand_of(0, 0, 2, cat.services[0])};
  const auto sol = bc_place_all(s, ds);
  REQUIRE(sol.outcomes[0].accepted);
  CHECK(s.pm_used(1).cores() == 8);
  CHECK(sol.outcomes[0].allocation->route == Route{{{0}, {}, {2}}});
}

TEST_CASE("BC backtracks when the central node fills up") {
  // 1 is the most central node but holds a single instance; 2 is already full.
  std::vector<NodeSpec> nodes{test::pm_node(0, 16), test::pm_node(1, 4), test::pm_node(2, 4)};
  const NetworkGraph g(nodes, {test::cable(0, 1), test::cable(1, 2)});
  auto cat = test::single_service_catalog({FunctionKind::NAT, FunctionKind::FW}, Bandwidth::from_mbps(4), 100.0);
  cat.services.push_back(ServiceType{"Filler", {FunctionKind::TM}, Bandwidth::from_mbps(4), 100.0, 0.0});
  NetworkState s(g, cat);
  s.apply(test::demand_of(9, 1, 2, cat.services[1]), ChainPlacement{{{FunctionKind::TM, 2, true}}, Route{{{2}, {}}}});
  const std::vector<Demand> ds{test::demand_of(0, 0, 2, cat.services[0])};
  const auto sol = bc_place_all(s, ds);
  REQUIRE(sol.outcomes[0].accepted);
  const auto& fm = sol.outcomes[0].allocation->function_map;
  CHECK(fm[0].pm == 0);
  CHECK(fm[1].pm == 1);
}

TEST_CASE("BC never leaves the hop-shortest path") {
  const auto g = nobel_germany();
  const auto cat = default_catalog();
  NetworkState s(g, cat);
  const auto ds = generate_demands(g, 300, cat, 12);
  const auto sol = bc_place_all(s, ds);
  check_solution(s, sol, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!sol.outcomes[i].accepted) continue;
    const auto path = *hop_shortest_path(g, ds[i].src, ds[i].dst);
    const auto& a = *sol.outcomes[i].allocation;
    CHECK(a.route.links() == path);
    const auto on_path = path_nodes(g, ds[i].src, path);
    std::size_t last = 0;
    for (const auto& f : a.function_map) {
      const auto it = std::find(on_path.begin() + static_cast<std::ptrdiff_t>(last), on_path.end(), f.pm);
      REQUIRE(it != on_path.end());
      last = static_cast<std::size_t>(it - on_path.begin());
    }
  }
}
