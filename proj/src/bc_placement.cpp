#include <algorithm>
#include <chrono>
#include <deque>
#include <map>

#include <fmt/format.h>

#include "vnfp/placement.hpp"

namespace vnfp {

// Brandes' accumulation on the undirected cable graph. Ordered pairs are
// counted, so each unordered pair contributes twice.
BetweennessScores betweenness(const NetworkGraph& graph) {
  const auto n = graph.node_count();
  BetweennessScores out{std::vector<double>(n, 0.0)};
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::vector<NodeId>> preds(n);
    std::vector<double> sigma(n, 0.0);
    std::vector<int> dist(n, -1);
    std::vector<NodeId> order;
    std::deque<NodeId> queue{static_cast<NodeId>(s)};
    sigma[s] = 1.0;
    dist[s] = 0;
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      const auto vi = static_cast<std::size_t>(v);
      for (LinkId l : graph.out_links(v)) {
        const auto wi = static_cast<std::size_t>(graph.link(l).dst);
        if (dist[wi] < 0) {
          dist[wi] = dist[vi] + 1;
          queue.push_back(static_cast<NodeId>(wi));
        }
        if (dist[wi] == dist[vi] + 1) {
          sigma[wi] += sigma[vi];
          preds[wi].push_back(v);
        }
      }
    }
    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto wi = static_cast<std::size_t>(*it);
      for (NodeId v : preds[wi]) {
        const auto vi = static_cast<std::size_t>(v);
        delta[vi] += sigma[vi] / sigma[wi] * (1.0 + delta[wi]);
      }
      if (wi != s) out.score[wi] += delta[wi];
    }
  }
  return out;
}

std::optional<std::vector<LinkId>> hop_shortest_path(const NetworkGraph& graph, NodeId src, NodeId dst) {
  if (!graph.valid_node(src) || !graph.valid_node(dst)) throw ValidationError("unknown endpoint");
  if (src == dst) return std::vector<LinkId>{};
  const auto n = graph.node_count();
  std::vector<LinkId> pred(n, -1);
  std::vector<char> seen(n, 0);
  std::deque<NodeId> queue{src};
  seen[static_cast<std::size_t>(src)] = 1;
  while (!queue.empty() && !seen[static_cast<std::size_t>(dst)]) {
    const NodeId u = queue.front();
    queue.pop_front();
    std::vector<LinkId> out(graph.out_links(u).begin(), graph.out_links(u).end());
    std::sort(out.begin(), out.end(),
              [&](LinkId a, LinkId b) { return graph.link(a).dst < graph.link(b).dst; });
    for (LinkId l : out) {
      const auto v = static_cast<std::size_t>(graph.link(l).dst);
      if (seen[v]) continue;
      seen[v] = 1;
      pred[v] = l;
      queue.push_back(static_cast<NodeId>(v));
    }
  }
  if (!seen[static_cast<std::size_t>(dst)]) return std::nullopt;
  std::vector<LinkId> path;
  for (NodeId v = dst; v != src; v = graph.link(pred[static_cast<std::size_t>(v)]).src)
    path.push_back(pred[static_cast<std::size_t>(v)]);
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

// Depth-first over path positions, highest centrality first (earlier position
// on ties), never moving backwards along the path. The first complete
// assignment found is taken.
bool assign(const StateOverlay& view, const BetweennessScores& bc, const std::vector<NodeId>& nodes,
            const Demand& d, std::size_t k, std::size_t pos, ChainPlacement& plan,
            std::vector<std::size_t>& positions) {
  if (k == d.chain.size()) return true;
  const FunctionKind f = d.chain[k];
  const auto& cat = view.base().catalog();
  std::vector<std::size_t> order;
  for (std::size_t p = pos; p < nodes.size(); ++p) order.push_back(p);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bc.score[static_cast<std::size_t>(nodes[a])] > bc.score[static_cast<std::size_t>(nodes[b])];
  });
  for (std::size_t p : order) {
    const NodeId n = nodes[p];
    bool fresh = false;
    if (!view.can_reuse(n, f, d.bandwidth)) {
      if (cat.function(f).processing_capacity < d.bandwidth || !view.can_host_new(n, f)) continue;
      fresh = true;
    }
    StateOverlay next = view;
    next.add_function(n, f, d.bandwidth, fresh);
    plan.steps.push_back({f, n, fresh});
    positions.push_back(p);
    if (assign(next, bc, nodes, d, k + 1, p, plan, positions)) return true;
    plan.steps.pop_back();
    positions.pop_back();
  }
  return false;
}

DemandOutcome bc_place_one(NetworkState& state, const BetweennessScores& bc, const Demand& d) {
  DemandOutcome out;
  out.demand = d.id;
  const auto& g = state.graph();
  const auto& cat = state.catalog();
  auto path = hop_shortest_path(g, d.src, d.dst);
  if (!path) {
    out.reason = "destination unreachable";
    return out;
  }
  std::map<LinkId, int> uses;
  for (LinkId l : *path) ++uses[l];
  for (const auto& [l, k] : uses) {
    if (state.residual(l) < d.bandwidth * k) {
      out.reason = fmt::format("link {} lacks {} kb/s on the shortest path", l, d.bandwidth.kbps);
      return out;
    }
  }

  // Path nodes by position: src, intermediate switches, dst.
  std::vector<NodeId> nodes{d.src};
  for (LinkId l : *path) nodes.push_back(g.link(l).dst);

  ChainPlacement plan;
  std::vector<std::size_t> positions;
  StateOverlay view(state);
  if (!assign(view, bc, nodes, d, 0, 0, plan, positions)) {
    out.reason = "no capacity-feasible placement on the shortest path";
    return out;
  }

  std::size_t from = 0;
  for (std::size_t p : positions) {
    plan.route.segments.emplace_back(path->begin() + static_cast<std::ptrdiff_t>(from),
                                     path->begin() + static_cast<std::ptrdiff_t>(p));
    from = p;
  }
  plan.route.segments.emplace_back(path->begin() + static_cast<std::ptrdiff_t>(from), path->end());

  const double delay = chain_delay(g, cat, d.chain, plan.route);
  if (delay > d.delay_budget_ms + 1e-9) {
    out.reason = fmt::format("shortest path delay {} ms exceeds budget {} ms", delay, d.delay_budget_ms);
    return out;
  }
  const double before = total_power(state);
  try {
    out.allocation = state.apply(d, plan);
  } catch (const AllocationError& e) {
    out.reason = e.what();
    return out;
  }
  out.accepted = true;
  out.added_power = total_power(state) - before;
  return out;
}

}  // namespace

SolutionSet bc_place_all(NetworkState& state, std::span<const Demand> demands) {
  SolutionSet sol;
  const auto t0 = std::chrono::steady_clock::now();
  const BetweennessScores bc = betweenness(state.graph());
  for (const Demand& d : demands) sol.outcomes.push_back(bc_place_one(state, bc, d));
  sol.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summarize(sol, state);
  return sol;
}

}  // namespace vnfp
