#pragma once

// Fixtures and reference oracles shared by the unit and acceptance tests. The
// oracles are written independently of the library algorithms they check.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "vnfp/netstate.hpp"

namespace vnfp::test {

inline NodeSpec pm_node(NodeId id, std::int64_t cores = 16) {
  return NodeSpec{id, "n" + std::to_string(id), PmSpec{Resources::cpu(cores)}};
}

inline CableSpec cable(NodeId a, NodeId b, double mbps = 1000.0, double delay_ms = 1.0) {
  return CableSpec{a, b, Bandwidth::from_mbps(mbps), delay_ms};
}

inline NetworkGraph make_graph(std::size_t n, const std::vector<CableSpec>& cables, std::int64_t cores = 16) {
  std::vector<NodeSpec> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back(pm_node(static_cast<NodeId>(i), cores));
  return NetworkGraph(std::move(nodes), cables);
}

// Random connected graph: a random spanning tree plus extra cables with
// probability `p_extra` per remaining pair.
inline NetworkGraph random_graph(std::mt19937_64& rng, std::size_t n, double p_extra, double max_delay = 2.0,
                                 std::int64_t cores = 16) {
  std::vector<CableSpec> cables;
  std::set<std::pair<int, int>> used;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t v = 1; v < n; ++v) {
    const auto parent = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng));
    cables.push_back(cable(parent, static_cast<NodeId>(v), 1000.0, 0.1 + u(rng) * max_delay));
    used.insert({parent, static_cast<int>(v)});
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (used.count({static_cast<int>(a), static_cast<int>(b)})) continue;
      if (u(rng) < p_extra)
        cables.push_back(cable(static_cast<NodeId>(a), static_cast<NodeId>(b), 1000.0, 0.1 + u(rng) * max_delay));
    }
  return make_graph(n, cables, cores);
}

inline Catalog single_service_catalog(std::vector<FunctionKind> chain, Bandwidth bw, double delay_ms,
                                      const std::string& name = "S") {
  Catalog c = default_catalog();
  c.services = {ServiceType{name, std::move(chain), bw, delay_ms, 1.0}};
  return c;
}

inline Demand demand_of(DemandId id, NodeId src, NodeId dst, const ServiceType& s) {
  return make_demand(id, src, dst, s);
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// Components of the undirected graph keeping cables whose weaker direction has
// at least `beta` left.
inline std::vector<std::vector<NodeId>> component_oracle(const NetworkState& s, Bandwidth beta) {
  const auto& g = s.graph();
  UnionFind uf(g.node_count());
  for (std::size_t c = 0; c < g.cable_count(); ++c) {
    const auto l = static_cast<LinkId>(2 * c);
    if (std::min(s.residual(l), s.residual(l + 1)) >= beta)
      uf.unite(static_cast<std::size_t>(g.link(l).src), static_cast<std::size_t>(g.link(l).dst));
  }
  std::vector<std::vector<NodeId>> comps(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) comps[uf.find(v)].push_back(static_cast<NodeId>(v));
  std::erase_if(comps, [](const auto& c) { return c.empty(); });
  std::sort(comps.begin(), comps.end());
  return comps;
}

// Betweenness by listing every shortest path explicitly.
inline std::vector<double> betweenness_oracle(const NetworkGraph& g) {
  const auto n = g.node_count();
  std::vector<std::vector<int>> adj(n);
  for (const Link& l : g.links()) adj[static_cast<std::size_t>(l.src)].push_back(l.dst);
  // All-pairs hop distances by repeated relaxation.
  const int inf = 1 << 20;
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, inf));
  for (std::size_t v = 0; v < n; ++v) dist[v][v] = 0;
  for (const Link& l : g.links()) dist[static_cast<std::size_t>(l.src)][static_cast<std::size_t>(l.dst)] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);

  std::vector<double> score(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t || dist[s][t] >= inf) continue;
      std::vector<std::vector<int>> paths;
      std::vector<int> cur{static_cast<int>(s)};
      auto walk = [&](auto&& self) -> void {
        const auto at = static_cast<std::size_t>(cur.back());
        if (at == t) {
          paths.push_back(cur);
          return;
        }
        if (static_cast<int>(cur.size()) - 1 >= dist[s][t]) return;
        for (int nb : adj[at]) {
          if (std::find(cur.begin(), cur.end(), nb) != cur.end()) continue;
          cur.push_back(nb);
          self(self);
          cur.pop_back();
        }
      };
      walk(walk);
      for (std::size_t v = 0; v < n; ++v) {
        if (v == s || v == t) continue;
        std::size_t through = 0;
        for (const auto& p : paths)
          if (std::find(p.begin(), p.end(), static_cast<int>(v)) != p.end()) ++through;
        score[v] += static_cast<double>(through) / static_cast<double>(paths.size());
      }
    }
  return score;
}

}  // namespace vnfp::test
