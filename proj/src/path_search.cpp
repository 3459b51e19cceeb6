#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <tuple>

#include <fmt/format.h>

#include "vnfp/placement.hpp"

namespace vnfp {

void PathSearchConfig::validate() const {
  if (!(delta_w > 0.0 && delta_w <= 1.0)) throw ValidationError("delta_w must lie in (0, 1]");
  if (gamma0 < 0.0 || omega0 < 0.0 || std::abs(gamma0 + omega0 - 1.0) > 1e-9)
    throw ValidationError("gamma0 and omega0 must be non-negative and sum to 1");
}

double edge_weight(const StateOverlay& view, LinkId link, double gamma, double omega) {
  const auto& g = view.graph();
  const auto& p = g.power();
  const Link& l = g.link(link);
  double power = 0.0;
  if (!view.switch_active(l.src)) power += 0.5 * p.p_ss;
  if (!view.switch_active(l.dst)) power += 0.5 * p.p_ss;
  if (!view.link_active(link)) power += 2.0 * p.p_p;
  const double power_norm = power / (p.p_ss + 2.0 * p.p_p);
  const double delay_norm = g.max_link_delay() > 0.0 ? l.delay_ms / g.max_link_delay() : 0.0;
  return gamma * power_norm + omega * delay_norm;
}

namespace {

struct SearchContext {
  const StateOverlay& view;
  std::vector<char> allowed;  // per directed link
  Bandwidth bandwidth;
};

// Dijkstra on (weight, hops); ties resolve to the lower node id.
std::optional<std::vector<LinkId>> shortest(const SearchContext& ctx, NodeId from, NodeId to,
                                            const std::vector<double>& weight,
                                            const std::map<LinkId, Bandwidth>& extra_use) {
  if (from == to) return std::vector<LinkId>{};
  const auto& g = ctx.view.graph();
  const auto n = g.node_count();
  using Key = std::tuple<double, int, NodeId>;
  std::vector<Key> best(n, Key{INFINITY, 0, 0});
  std::vector<LinkId> pred(n, -1);
  std::vector<char> done(n, 0);
  std::priority_queue<Key, std::vector<Key>, std::greater<>> pq;
  best[static_cast<std::size_t>(from)] = {0.0, 0, from};
  pq.push({0.0, 0, from});
  while (!pq.empty()) {
    auto [w, hops, u] = pq.top();
    pq.pop();
    if (done[static_cast<std::size_t>(u)]) continue;
    done[static_cast<std::size_t>(u)] = 1;
    if (u == to) break;
    for (LinkId l : g.out_links(u)) {
      if (!ctx.allowed[static_cast<std::size_t>(l)]) continue;
      Bandwidth avail = ctx.view.residual(l);
      if (auto it = extra_use.find(l); it != extra_use.end()) avail -= it->second;
      if (avail < ctx.bandwidth) continue;
      const NodeId v = g.link(l).dst;
      if (done[static_cast<std::size_t>(v)]) continue;
      Key cand{w + weight[static_cast<std::size_t>(l)], hops + 1, v};
      auto& cur = best[static_cast<std::size_t>(v)];
      if (std::get<0>(cand) < std::get<0>(cur) ||
          (std::get<0>(cand) == std::get<0>(cur) && std::get<1>(cand) < std::get<1>(cur))) {
        cur = cand;
        pred[static_cast<std::size_t>(v)] = l;
        pq.push(cand);
      }
    }
  }
  if (!done[static_cast<std::size_t>(to)]) return std::nullopt;
  std::vector<LinkId> path;
  for (NodeId v = to; v != from;) {
    const LinkId l = pred[static_cast<std::size_t>(v)];
    path.push_back(l);
    v = g.link(l).src;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double propagation(const NetworkGraph& g, const std::vector<LinkId>& path) {
  double d = 0.0;
  for (LinkId l : path) d += g.link(l).delay_ms;
  return d;
}

}  // namespace

std::optional<BestPath> calculate_best_path(const StateOverlay& view, const BlockingIsland& island,
                                            NodeId from, NodeId pm, NodeId to, Bandwidth bandwidth,
                                            double delay_budget_ms, const PathSearchConfig& cfg,
                                            PathSearchStats* stats) {
  cfg.validate();
  for (NodeId n : {from, pm, to})
    if (!island.contains(n)) throw ValidationError(fmt::format("node {} is outside the selected island", n));

  const auto& g = view.graph();
  SearchContext ctx{view, std::vector<char>(g.link_count(), 0), bandwidth};
  for (LinkId l : island.internal_links) ctx.allowed[static_cast<std::size_t>(l)] = 1;

  constexpr double eps = 1e-12;
  std::vector<double> weight(g.link_count(), 0.0);
  for (int k = 0;; ++k) {
    // Weights are derived from the step index so the termination test is drift-free.
    const double gamma = cfg.gamma0 - k * cfg.delta_w;
    const double omega = cfg.omega0 + k * cfg.delta_w;
    for (LinkId l : island.internal_links) weight[static_cast<std::size_t>(l)] = edge_weight(view, l, gamma, omega);
    if (stats) ++stats->weight_settings;

    auto first = shortest(ctx, from, pm, weight, {});
    if (!first) return std::nullopt;
    std::map<LinkId, Bandwidth> used;
    for (LinkId l : *first) used[l] += bandwidth;
    auto second = shortest(ctx, pm, to, weight, used);
    if (!second) return std::nullopt;

    const double delay = propagation(g, *first) + propagation(g, *second);
    if (delay <= delay_budget_ms + 1e-9) return BestPath{std::move(*first), std::move(*second), delay, gamma, omega};

    const double next_gamma = cfg.gamma0 - (k + 1) * cfg.delta_w;
    const double next_omega = cfg.omega0 + (k + 1) * cfg.delta_w;
    if (next_gamma <= eps || next_omega >= 1.0 - eps) return std::nullopt;
  }
}

std::vector<Candidate> get_candidate_pms(const StateOverlay& view, FunctionKind f, const BlockingIsland& island,
                                         Bandwidth bandwidth) {
  const FunctionType& ft = view.base().catalog().function(f);
  std::vector<Candidate> out;
  for (NodeId n : island.nodes) {
    if (view.can_reuse(n, f, bandwidth)) {
      out.push_back({n, CandidateClass::ReuseInstance});
    } else if (ft.processing_capacity >= bandwidth && view.can_host_new(n, f)) {
      out.push_back({n, view.pm_active(n) ? CandidateClass::NewOnActivePm : CandidateClass::ActivatePm});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.cls < b.cls; });
  return out;
}

}  // namespace vnfp
