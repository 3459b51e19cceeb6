#include "vnfp/netstate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace vnfp {

std::vector<LinkId> Route::links() const {
  std::vector<LinkId> out;
  for (const auto& s : segments) out.insert(out.end(), s.begin(), s.end());
  return out;
}

double chain_delay(const NetworkGraph& g, const Catalog& c, const std::vector<FunctionKind>& chain,
                   const Route& route) {
  double d = 0.0;
  for (const auto& seg : route.segments)
    for (LinkId l : seg) d += g.link(l).delay_ms;
  for (FunctionKind f : chain) d += c.function(f).processing_delay_ms;
  return d;
}

NetworkState::NetworkState(const NetworkGraph& graph, const Catalog& catalog)
    : graph_(&graph),
      catalog_(&catalog),
      residual_(graph.link_count()),
      traversals_(graph.link_count(), 0),
      ports_(graph.node_count(), 0),
      pm_used_(graph.node_count()),
      node_instances_(graph.node_count()) {
  for (std::size_t l = 0; l < graph.link_count(); ++l) residual_[l] = graph.links()[l].capacity;
}

std::size_t NetworkState::active_switch_count() const {
  return static_cast<std::size_t>(std::count_if(ports_.begin(), ports_.end(), [](int p) { return p > 0; }));
}

std::size_t NetworkState::active_cable_count() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < graph_->cable_count(); ++c) n += cable_active(static_cast<CableId>(c)) ? 1 : 0;
  return n;
}

std::optional<InstanceId> NetworkState::best_fit_instance(NodeId pm, FunctionKind f, Bandwidth bw) const {
  std::optional<InstanceId> best;
  Bandwidth best_res{};
  for (InstanceId id : instances_on(pm)) {
    const auto& inst = instances_.at(id);
    if (inst.function.kind != f || inst.residual < bw) continue;
    if (!best || inst.residual < best_res) {
      best = id;
      best_res = inst.residual;
    }
  }
  return best;
}

void NetworkState::check_route_shape(const Demand& d, const ChainPlacement& p) const {
  const auto& g = *graph_;
  if (!g.valid_node(d.src) || !g.valid_node(d.dst) || d.src == d.dst)
    throw AllocationError(fmt::format("demand {} has invalid endpoints", d.id));
  if (p.steps.size() != d.chain.size())
    throw AllocationError(fmt::format("demand {}: {} placement steps for a chain of {}", d.id,
                                      p.steps.size(), d.chain.size()));
  for (std::size_t k = 0; k < p.steps.size(); ++k) {
    if (p.steps[k].function != d.chain[k])
      throw AllocationError(fmt::format("demand {}: step {} places {} but chain needs {}", d.id, k,
                                        function_name(p.steps[k].function), function_name(d.chain[k])));
    if (!g.valid_node(p.steps[k].pm))
      throw AllocationError(fmt::format("demand {}: step {} names unknown PM", d.id, k));
  }
  if (p.route.segments.size() != p.steps.size() + 1)
    throw AllocationError(fmt::format("demand {}: route needs {} segments", d.id, p.steps.size() + 1));
  for (std::size_t k = 0; k < p.route.segments.size(); ++k) {
    const NodeId from = k == 0 ? d.src : p.steps[k - 1].pm;
    const NodeId to = k == p.steps.size() ? d.dst : p.steps[k].pm;
    NodeId at = from;
    for (LinkId l : p.route.segments[k]) {
      if (!g.valid_link(l)) throw AllocationError(fmt::format("demand {}: unknown link {}", d.id, l));
      if (g.link(l).src != at)
        throw AllocationError(fmt::format("demand {}: segment {} is not contiguous", d.id, k));
      at = g.link(l).dst;
    }
    if (at != to)
      throw AllocationError(fmt::format("demand {}: segment {} ends at {} instead of {}", d.id, k, at, to));
  }
}

const Allocation& NetworkState::apply(const Demand& d, const ChainPlacement& p) {
  if (allocations_.count(d.id)) throw AllocationError(fmt::format("demand {} already allocated", d.id));
  if (d.bandwidth.kbps <= 0) throw AllocationError(fmt::format("demand {} has no bandwidth", d.id));
  check_route_shape(d, p);

  const double delay = chain_delay(*graph_, *catalog_, d.chain, p.route);
  if (delay > d.delay_budget_ms + 1e-9)
    throw AllocationError(fmt::format("demand {}: delay {} ms exceeds budget {} ms", d.id, delay,
                                      d.delay_budget_ms));

  std::map<LinkId, int> link_use;
  for (const auto& seg : p.route.segments)
    for (LinkId l : seg) ++link_use[l];
  for (const auto& [l, n] : link_use)
    if (residual(l) < d.bandwidth * n)
      throw AllocationError(fmt::format("demand {}: link {} lacks bandwidth", d.id, l));

  // Dry run of the function steps against a scratch view of instance residuals.
  struct Pending {
    InstanceId id;
    NodeId pm;
    FunctionKind f;
    Bandwidth residual;
  };
  std::map<InstanceId, Bandwidth> scratch_res;
  std::vector<Pending> pending;
  std::map<NodeId, Resources> extra;
  std::vector<InstanceId> chosen;
  std::set<InstanceId> taken;
  for (const auto& [k, v] : instances_) taken.insert(k);
  auto fresh_id = [&] {
    InstanceId id = 0;
    while (taken.count(id)) ++id;
    taken.insert(id);
    return id;
  };

  for (const auto& step : p.steps) {
    const FunctionType& ft = catalog_->function(step.function);
    if (step.new_instance) {
      Resources need = pm_used(step.pm) + extra[step.pm] + ft.demand;
      if (!need.fits_within(graph_->node(step.pm).pm.capacity))
        throw AllocationError(fmt::format("demand {}: PM {} has no room for {}", d.id, step.pm,
                                          function_name(step.function)));
      if (ft.processing_capacity < d.bandwidth)
        throw AllocationError(fmt::format("demand {}: {} cannot carry the demand", d.id,
                                          function_name(step.function)));
      extra[step.pm] = extra[step.pm] + ft.demand;
      const InstanceId id = fresh_id();
      pending.push_back({id, step.pm, step.function, ft.processing_capacity - d.bandwidth});
      chosen.push_back(id);
      continue;
    }
    std::optional<InstanceId> best;
    Bandwidth best_res{};
    Pending* best_pending = nullptr;
    for (InstanceId id : instances_on(step.pm)) {
      const auto& inst = instances_.at(id);
      if (inst.function.kind != step.function) continue;
      auto it = scratch_res.find(id);
      const Bandwidth r = it == scratch_res.end() ? inst.residual : it->second;
      if (r < d.bandwidth) continue;
      if (!best || r < best_res || (r == best_res && id < *best)) {
        best = id;
        best_res = r;
        best_pending = nullptr;
      }
    }
    for (auto& pd : pending) {
      if (pd.pm != step.pm || pd.f != step.function || pd.residual < d.bandwidth) continue;
      if (!best || pd.residual < best_res || (pd.residual == best_res && pd.id < *best)) {
        best = pd.id;
        best_res = pd.residual;
        best_pending = &pd;
      }
    }
    if (!best)
      throw AllocationError(fmt::format("demand {}: no reusable {} instance on PM {}", d.id,
                                        function_name(step.function), step.pm));
    if (best_pending) {
      best_pending->residual -= d.bandwidth;
    } else {
      scratch_res[*best] = best_res - d.bandwidth;
    }
    chosen.push_back(*best);
  }

  // Commit.
  for (const auto& [l, n] : link_use) {
    const auto idx = static_cast<std::size_t>(l);
    const bool was_active = link_active(l);
    residual_[idx] -= d.bandwidth * n;
    traversals_[idx] += n;
    if (!was_active) {
      ++ports_[static_cast<std::size_t>(graph_->link(l).src)];
      ++ports_[static_cast<std::size_t>(graph_->link(l).dst)];
    }
  }
  for (const auto& pd : pending) {
    const FunctionType& ft = catalog_->function(pd.f);
    instances_.emplace(pd.id, VnfInstance{pd.id, pd.pm, ft, ft.processing_capacity, {}});
    node_instances_[static_cast<std::size_t>(pd.pm)].insert(pd.id);
    pm_used_[static_cast<std::size_t>(pd.pm)] = pm_used_[static_cast<std::size_t>(pd.pm)] + ft.demand;
  }

  Allocation a;
  a.demand = d.id;
  a.src = d.src;
  a.dst = d.dst;
  a.bandwidth = d.bandwidth;
  a.delay_budget_ms = d.delay_budget_ms;
  a.route = p.route;
  a.total_delay_ms = delay;
  for (std::size_t k = 0; k < p.steps.size(); ++k) {
    auto& inst = instances_.at(chosen[k]);
    inst.residual -= d.bandwidth;
    inst.load[d.id] += d.bandwidth;
    a.function_map.push_back({p.steps[k].function, p.steps[k].pm, chosen[k]});
  }
  return allocations_.emplace(d.id, std::move(a)).first->second;
}

void NetworkState::release(DemandId demand) {
  auto it = allocations_.find(demand);
  if (it == allocations_.end()) throw AllocationError(fmt::format("demand {} is not allocated", demand));
  const Allocation& a = it->second;

  for (const auto& seg : a.route.segments) {
    for (LinkId l : seg) {
      const auto idx = static_cast<std::size_t>(l);
      residual_[idx] += a.bandwidth;
      --traversals_[idx];
      if (!link_active(l)) {
        --ports_[static_cast<std::size_t>(graph_->link(l).src)];
        --ports_[static_cast<std::size_t>(graph_->link(l).dst)];
      }
    }
  }
  for (const auto& fa : a.function_map) {
    auto& inst = instances_.at(fa.instance);
    inst.residual += a.bandwidth;
    auto load = inst.load.find(demand);
    load->second -= a.bandwidth;
    if (load->second.kbps == 0) inst.load.erase(load);
    if (inst.load.empty()) {
      const auto pm = static_cast<std::size_t>(inst.pm);
      pm_used_[pm] = pm_used_[pm] - inst.function.demand;
      node_instances_[pm].erase(inst.id);
      instances_.erase(fa.instance);
    }
  }
  allocations_.erase(it);
}

std::string NetworkState::dump() const {
  const auto& g = *graph_;
  std::string out;
  for (std::size_t l = 0; l < g.link_count(); ++l) {
    const Link& lk = g.links()[l];
    out += fmt::format("link {} {}->{} residual_kbps={} traversals={}\n", l, lk.src, lk.dst,
                       residual_[l].kbps, traversals_[l]);
  }
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    out += fmt::format("node {} ports={} switch={} pm={} cores_used={}\n", n, ports_[n],
                       ports_[n] > 0 ? "on" : "off", node_instances_[n].empty() ? "off" : "on",
                       pm_used_[n].cores());
  }
  for (const auto& [id, inst] : instances_) {
    out += fmt::format("instance {} pm={} fn={} residual_kbps={} load=", id, inst.pm,
                       function_name(inst.function.kind), inst.residual.kbps);
    for (const auto& [d, bw] : inst.load) out += fmt::format("{}:{},", d, bw.kbps);
    out += '\n';
  }
  for (const auto& [id, a] : allocations_) {
    out += fmt::format("alloc {} {}->{} bw_kbps={} delay_ms={} functions=", id, a.src, a.dst,
                       a.bandwidth.kbps, a.total_delay_ms);
    for (const auto& fa : a.function_map)
      out += fmt::format("{}@{}#{},", function_name(fa.function), fa.pm, fa.instance);
    out += " route=";
    for (const auto& seg : a.route.segments) {
      out += '[';
      out += fmt::format("{}", fmt::join(seg, ","));
      out += ']';
    }
    out += '\n';
  }
  return out;
}

bool operator==(const NetworkState& a, const NetworkState& b) {
  return a.graph_ == b.graph_ && a.residual_ == b.residual_ && a.traversals_ == b.traversals_ &&
         a.ports_ == b.ports_ && a.pm_used_ == b.pm_used_ && a.node_instances_ == b.node_instances_ &&
         a.instances_ == b.instances_ && a.allocations_ == b.allocations_;
}

double cpu_utilization(const NetworkState& state, NodeId node) {
  const auto total = state.graph().node(node).pm.capacity.cores();
  return static_cast<double>(state.pm_used(node).cores()) / static_cast<double>(total);
}

std::vector<std::string> validate_state(const NetworkState& s) {
  std::vector<std::string> v;
  const auto& g = s.graph();
  const auto& cat = s.catalog();

  std::vector<std::int64_t> used(g.link_count(), 0);
  std::vector<int> trav(g.link_count(), 0);
  std::map<InstanceId, std::map<DemandId, Bandwidth>> expected_load;

  for (const auto& [id, a] : s.allocations()) {
    if (a.demand != id) v.push_back(fmt::format("allocation keyed {} records demand {}", id, a.demand));
    if (a.route.segments.size() != a.function_map.size() + 1) {
      v.push_back(fmt::format("allocation {}: route has {} segments for {} functions", id,
                              a.route.segments.size(), a.function_map.size()));
      continue;
    }
    for (std::size_t k = 0; k < a.route.segments.size(); ++k) {
      const NodeId from = k == 0 ? a.src : a.function_map[k - 1].pm;
      const NodeId to = k < a.function_map.size() ? a.function_map[k].pm : a.dst;
      NodeId at = from;
      for (LinkId l : a.route.segments[k]) {
        if (!g.valid_link(l)) {
          v.push_back(fmt::format("allocation {}: unknown link {}", id, l));
          at = -1;
          break;
        }
        if (g.link(l).src != at) v.push_back(fmt::format("allocation {}: segment {} broken at link {}", id, k, l));
        at = g.link(l).dst;
        used[static_cast<std::size_t>(l)] += a.bandwidth.kbps;
        ++trav[static_cast<std::size_t>(l)];
      }
      if (at != to && at != -1)
        v.push_back(fmt::format("allocation {}: segment {} ends at {} not {}", id, k, at, to));
    }
    std::vector<FunctionKind> chain;
    for (const auto& fa : a.function_map) {
      chain.push_back(fa.function);
      auto it = s.instances().find(fa.instance);
      if (it == s.instances().end()) {
        v.push_back(fmt::format("allocation {}: missing instance {}", id, fa.instance));
        continue;
      }
      if (it->second.function.kind != fa.function || it->second.pm != fa.pm)
        v.push_back(fmt::format("allocation {}: instance {} does not match its assignment", id, fa.instance));
      expected_load[fa.instance][id] += a.bandwidth;
    }
    const double delay = chain_delay(g, cat, chain, a.route);
    if (std::abs(delay - a.total_delay_ms) > 1e-9)
      v.push_back(fmt::format("allocation {}: recorded delay {} != recomputed {}", id, a.total_delay_ms, delay));
    if (delay > a.delay_budget_ms + 1e-9)
      v.push_back(fmt::format("allocation {}: delay {} exceeds budget {}", id, delay, a.delay_budget_ms));
  }

  for (std::size_t l = 0; l < g.link_count(); ++l) {
    const auto lid = static_cast<LinkId>(l);
    const Link& lk = g.links()[l];
    const Bandwidth r = s.residual(lid);
    if (r.kbps < 0 || r > lk.capacity)
      v.push_back(fmt::format("link {} ({}->{}): residual {} kb/s outside [0, {}]", l, lk.src, lk.dst,
                              r.kbps, lk.capacity.kbps));
    else if (lk.capacity.kbps - r.kbps != used[l])
      v.push_back(fmt::format("link {} ({}->{}): residual {} kb/s disagrees with allocations ({} used)", l,
                              lk.src, lk.dst, r.kbps, used[l]));
    if (s.link_traversals(lid) != trav[l])
      v.push_back(fmt::format("link {}: traversal count {} != {}", l, s.link_traversals(lid), trav[l]));
  }

  std::vector<int> ports(g.node_count(), 0);
  for (std::size_t c = 0; c < g.cable_count(); ++c) {
    if (trav[2 * c] + trav[2 * c + 1] > 0) {
      ++ports[static_cast<std::size_t>(g.links()[2 * c].src)];
      ++ports[static_cast<std::size_t>(g.links()[2 * c].dst)];
    }
  }
  std::vector<Resources> pm_used(g.node_count());
  for (const auto& [id, inst] : s.instances()) {
    if (!g.valid_node(inst.pm)) {
      v.push_back(fmt::format("instance {} on unknown PM", id));
      continue;
    }
    pm_used[static_cast<std::size_t>(inst.pm)] = pm_used[static_cast<std::size_t>(inst.pm)] + inst.function.demand;
    if (inst.residual.kbps < 0 || inst.residual > inst.function.processing_capacity)
      v.push_back(fmt::format("instance {}: residual {} kb/s out of range", id, inst.residual.kbps));
    Bandwidth sum{};
    for (const auto& [d, bw] : inst.load) sum += bw;
    if (sum != inst.function.processing_capacity - inst.residual)
      v.push_back(fmt::format("instance {}: served load {} kb/s != capacity - residual", id, sum.kbps));
    if (inst.load != expected_load[id])
      v.push_back(fmt::format("instance {}: per-demand load disagrees with allocations", id));
    if (inst.load.empty()) v.push_back(fmt::format("instance {} serves no demand", id));
    if (!s.instances_on(inst.pm).count(id)) v.push_back(fmt::format("instance {} not indexed on PM", id));
  }
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const auto nid = static_cast<NodeId>(n);
    if (s.active_ports(nid) != ports[n])
      v.push_back(fmt::format("switch {}: {} active ports recorded, {} expected", n, s.active_ports(nid), ports[n]));
    if (!(s.pm_used(nid) == pm_used[n])) v.push_back(fmt::format("PM {}: used resources out of sync", n));
    if (!pm_used[n].fits_within(g.node(nid).pm.capacity))
      v.push_back(fmt::format("PM {}: resources exceed capacity", n));
    for (InstanceId id : s.instances_on(nid))
      if (!s.instances().count(id)) v.push_back(fmt::format("PM {} indexes missing instance {}", n, id));
    // A PM hosting instances must sit behind an active switch.
    if (s.pm_active(nid) && !s.switch_active(nid))
      v.push_back(fmt::format("PM {} is on but its switch is off", n));
  }
  return v;
}

}  // namespace vnfp
