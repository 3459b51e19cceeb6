#include <algorithm>
#include <chrono>
#include <deque>
#include <numeric>

#include <fmt/format.h>

#include "vnfp/placement.hpp"

namespace vnfp {

std::size_t SolutionSet::accepted() const {
  return static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const DemandOutcome& o) { return o.accepted; }));
}

void summarize(SolutionSet& sol, const NetworkState& state) {
  sol.network_power = network_power_total(state);
  sol.pm_power = pm_power_total(state);
  sol.total_power = sol.network_power + sol.pm_power;
  double delay = 0.0;
  std::size_t n = 0;
  for (const auto& o : sol.outcomes) {
    if (!o.accepted) continue;
    delay += o.allocation->total_delay_ms;
    ++n;
  }
  sol.mean_delay_ms = n ? delay / static_cast<double>(n) : 0.0;
  sol.acceptance_rate =
      sol.outcomes.empty() ? 1.0 : static_cast<double>(n) / static_cast<double>(sol.outcomes.size());
}

namespace {

// Hop distance from `origin` over the island's links.
std::vector<int> island_hops(const NetworkGraph& g, const BlockingIsland& island, NodeId origin) {
  std::vector<char> allowed(g.link_count(), 0);
  for (LinkId l : island.internal_links) allowed[static_cast<std::size_t>(l)] = 1;
  std::vector<int> dist(g.node_count(), std::numeric_limits<int>::max());
  std::deque<NodeId> queue{origin};
  dist[static_cast<std::size_t>(origin)] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (LinkId l : g.out_links(u)) {
      if (!allowed[static_cast<std::size_t>(l)]) continue;
      const NodeId v = g.link(l).dst;
      if (dist[static_cast<std::size_t>(v)] != std::numeric_limits<int>::max()) continue;
      dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

double path_delay(const NetworkGraph& g, std::span<const LinkId> path) {
  double d = 0.0;
  for (LinkId l : path) d += g.link(l).delay_ms;
  return d;
}

struct Choice {
  Candidate candidate;
  BestPath path;
  double cost = 0.0;
};

DemandOutcome place_one(NetworkState& state, BiHierarchy& bih, const Demand& d, const BiPlacementOptions& opts) {
  DemandOutcome out;
  out.demand = d.id;
  const auto ref = select_bi(bih, d, opts.mode);
  if (!ref) {
    out.reason = fmt::format("no blocking island holds nodes {} and {} at {} kb/s", d.src, d.dst, d.bandwidth.kbps);
    return out;
  }
  // Copy: the hierarchy is updated only after commit, but keep the island stable regardless.
  const BlockingIsland island = bih.level(ref->level).islands.at(static_cast<std::size_t>(ref->island));
  const auto& g = state.graph();
  const auto& cat = state.catalog();

  double processing = 0.0;
  for (FunctionKind f : d.chain) processing += cat.function(f).processing_delay_ms;

  StateOverlay view(state);
  ChainPlacement plan;
  NodeId origin = d.src;
  double propagation = 0.0;

  for (std::size_t k = 0; k < d.chain.size(); ++k) {
    const FunctionKind f = d.chain[k];
    const double budget = d.delay_budget_ms - processing - propagation;
    auto candidates = get_candidate_pms(view, f, island, d.bandwidth);
    const auto hops = island_hops(g, island, origin);
    std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
      if (a.cls != b.cls) return a.cls < b.cls;
      const int ha = hops[static_cast<std::size_t>(a.pm)];
      const int hb = hops[static_cast<std::size_t>(b.pm)];
      if (ha != hb) return ha < hb;
      return a.pm < b.pm;
    });

    FunctionTrace trace{d.id, k, {}, std::nullopt};
    std::optional<Choice> best;
    for (const Candidate& c : candidates) {
      auto path = calculate_best_path(view, island, origin, c.pm, d.dst, d.bandwidth, budget, opts.path);
      if (!path) {
        trace.evaluated.push_back({c, std::nullopt});
        continue;
      }
      std::vector<LinkId> links = path->to_pm;
      links.insert(links.end(), path->from_pm.begin(), path->from_pm.end());
      const bool fresh = c.cls != CandidateClass::ReuseInstance;
      const double cost = view.marginal_cost(c.pm, f, fresh, links);
      trace.evaluated.push_back({c, cost});
      if (!best || cost < best->cost - 1e-9) best = Choice{c, std::move(*path), cost};
    }
    if (best) trace.chosen = best->candidate.pm;
    if (opts.trace) opts.trace(trace);
    if (!best) {
      out.reason = fmt::format("no feasible PM for {} (position {})", function_name(f), k);
      return out;
    }

    const bool fresh = best->candidate.cls != CandidateClass::ReuseInstance;
    view.add_route(best->path.to_pm, d.bandwidth);
    view.add_function(best->candidate.pm, f, d.bandwidth, fresh);
    propagation += path_delay(g, best->path.to_pm);
    plan.steps.push_back({f, best->candidate.pm, fresh});
    plan.route.segments.push_back(std::move(best->path.to_pm));
    if (k + 1 == d.chain.size()) {
      view.add_route(best->path.from_pm, d.bandwidth);
      plan.route.segments.push_back(std::move(best->path.from_pm));
    }
    origin = best->candidate.pm;
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
  const auto links = plan.route.links();
  update_on_allocation(bih, state, links);
  return out;
}

}  // namespace

SolutionSet place_all(NetworkState& state, std::span<const Demand> demands, const BiPlacementOptions& opts) {
  opts.path.validate();
  SolutionSet sol;
  const auto t0 = std::chrono::steady_clock::now();
  BiHierarchy bih = build_bih(state, opts.betas);
  for (const Demand& d : demands) sol.outcomes.push_back(place_one(state, bih, d, opts));
  sol.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summarize(sol, state);
  return sol;
}

}  // namespace vnfp
