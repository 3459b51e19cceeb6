#include "vnfp/power.hpp"

#include <fmt/format.h>

namespace vnfp {

double switch_power(const PowerParams& p, int active_ports) {
  if (active_ports < 0) throw ValidationError("active port count must be non-negative");
  return p.p_ss + p.p_p * active_ports;
}

double network_power_total(const NetworkState& state) {
  const auto& p = state.graph().power();
  return p.p_ss * static_cast<double>(state.active_switch_count()) +
         2.0 * p.p_p * static_cast<double>(state.active_cable_count());
}

double pm_power(const PowerParams& p, double theta_cpu) {
  if (!(theta_cpu >= 0.0 && theta_cpu <= 1.0))
    throw ValidationError(fmt::format("CPU utilisation {} outside [0, 1]", theta_cpu));
  return p.p_sm + (p.p_mm - p.p_sm) * theta_cpu;
}

double pm_power_total(const NetworkState& state) {
  const auto& g = state.graph();
  double total = 0.0;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const auto id = static_cast<NodeId>(n);
    if (state.pm_active(id)) total += pm_power(g.power(), cpu_utilization(state, id));
  }
  return total;
}

double total_power(const NetworkState& state) { return network_power_total(state) + pm_power_total(state); }

Bandwidth StateOverlay::residual(LinkId l) const {
  auto it = used_.find(l);
  return base_->residual(l) - (it == used_.end() ? Bandwidth{} : it->second);
}

Resources StateOverlay::pm_free(NodeId n) const {
  Resources free = base_->pm_free(n);
  if (auto it = extra_res_.find(n); it != extra_res_.end()) free = free - it->second;
  return free;
}

bool StateOverlay::can_reuse(NodeId pm, FunctionKind f, Bandwidth bw) const {
  for (InstanceId id : base_->instances_on(pm)) {
    const auto& inst = base_->instances().at(id);
    if (inst.function.kind != f) continue;
    auto it = reuse_.find(id);
    const Bandwidth r = inst.residual - (it == reuse_.end() ? Bandwidth{} : it->second);
    if (r >= bw) return true;
  }
  for (const auto& p : pending_)
    if (p.pm == pm && p.f == f && p.residual >= bw) return true;
  return false;
}

bool StateOverlay::can_host_new(NodeId pm, FunctionKind f) const {
  return base_->catalog().function(f).demand.fits_within(pm_free(pm));
}

double StateOverlay::route_cost(std::span<const LinkId> route) const {
  const auto& p = graph().power();
  std::set<CableId> cables;
  std::set<NodeId> switches;
  double cost = 0.0;
  for (LinkId l : route) {
    const CableId c = cable_of(l);
    if (cable_active(c) || !cables.insert(c).second) continue;
    cost += 2.0 * p.p_p;
    for (NodeId n : {graph().link(l).src, graph().link(l).dst})
      if (!switch_active(n) && switches.insert(n).second) cost += p.p_ss;
  }
  return cost;
}

double StateOverlay::marginal_cost(NodeId pm, FunctionKind f, bool new_instance,
                                   std::span<const LinkId> route) const {
  double cost = route_cost(route);
  if (new_instance) {
    const auto& p = graph().power();
    const auto total = graph().node(pm).pm.capacity.cores();
    if (!pm_active(pm)) cost += p.p_sm;
    cost += (p.p_mm - p.p_sm) * static_cast<double>(base_->catalog().function(f).demand.cores()) /
            static_cast<double>(total);
  }
  return cost;
}

void StateOverlay::add_route(std::span<const LinkId> route, Bandwidth bw) {
  for (LinkId l : route) {
    used_[l] += bw;
    const CableId c = cable_of(l);
    if (base_->cable_active(c)) continue;
    new_cables_.insert(c);
    for (NodeId n : {graph().link(l).src, graph().link(l).dst})
      if (!base_->switch_active(n)) new_switches_.insert(n);
  }
}

void StateOverlay::add_function(NodeId pm, FunctionKind f, Bandwidth bw, bool new_instance) {
  const FunctionType& ft = base_->catalog().function(f);
  if (new_instance) {
    if (!can_host_new(pm, f)) throw AllocationError(fmt::format("PM {} cannot host another {}", pm, function_name(f)));
    extra_res_[pm] = extra_res_[pm] + ft.demand;
    pending_.push_back({pm, f, ft.processing_capacity - bw});
    return;
  }
  // Same best-fit rule as NetworkState::apply: smallest residual that fits.
  bool found = false;
  Bandwidth best_res{};
  std::optional<InstanceId> best;
  Pending* best_pending = nullptr;
  for (InstanceId id : base_->instances_on(pm)) {
    const auto& inst = base_->instances().at(id);
    if (inst.function.kind != f) continue;
    auto it = reuse_.find(id);
    const Bandwidth r = inst.residual - (it == reuse_.end() ? Bandwidth{} : it->second);
    if (r >= bw && (!found || r < best_res)) {
      found = true;
      best = id;
      best_res = r;
    }
  }
  for (auto& p : pending_) {
    if (p.pm == pm && p.f == f && p.residual >= bw && (!found || p.residual < best_res)) {
      found = true;
      best.reset();
      best_pending = &p;
      best_res = p.residual;
    }
  }
  if (!found)
    throw AllocationError(fmt::format("no {} instance on PM {} can absorb the demand", function_name(f), pm));
  if (best_pending)
    best_pending->residual -= bw;
  else
    reuse_[*best] += bw;
}

double StateOverlay::power_delta() const {
  const auto& p = graph().power();
  double delta = p.p_ss * static_cast<double>(new_switches_.size()) +
                 2.0 * p.p_p * static_cast<double>(new_cables_.size());
  for (const auto& [pm, res] : extra_res_) {
    if (!base_->pm_active(pm)) delta += p.p_sm;
    delta += (p.p_mm - p.p_sm) * static_cast<double>(res.cores()) /
             static_cast<double>(graph().node(pm).pm.capacity.cores());
  }
  return delta;
}

double incremental_cost(const NetworkState& state, NodeId pm, FunctionKind f, bool new_instance,
                        std::span<const LinkId> route) {
  return StateOverlay(state).marginal_cost(pm, f, new_instance, route);
}

}  // namespace vnfp
