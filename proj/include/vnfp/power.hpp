#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "vnfp/netstate.hpp"

namespace vnfp {

// P_sw = P_ss + P_p * N_p
double switch_power(const PowerParams& p, int active_ports);
// P_ss * (#active switches) + 2 P_p * (#active cables)
double network_power_total(const NetworkState& state);
// P_sm + (P_mm - P_sm) * theta; throws ValidationError for theta outside [0, 1].
double pm_power(const PowerParams& p, double theta_cpu);
double pm_power_total(const NetworkState& state);
double total_power(const NetworkState& state);

// Hypothetical usage stacked on a const NetworkState. Placement uses it to
// evaluate candidates for later chain functions on top of the tentative
// choices already made for the same demand; nothing touches the state.
class StateOverlay {
 public:
  explicit StateOverlay(const NetworkState& base) : base_(&base) {}

  const NetworkState& base() const { return *base_; }
  const NetworkGraph& graph() const { return base_->graph(); }

  Bandwidth residual(LinkId l) const;
  bool cable_active(CableId c) const { return base_->cable_active(c) || new_cables_.count(c); }
  bool link_active(LinkId l) const { return cable_active(cable_of(l)); }
  bool switch_active(NodeId n) const { return base_->switch_active(n) || new_switches_.count(n); }
  bool pm_active(NodeId n) const { return base_->pm_active(n) || extra_res_.count(n); }
  Resources pm_free(NodeId n) const;

  // True when an existing or pending instance of `f` on `pm` can absorb `bw`.
  bool can_reuse(NodeId pm, FunctionKind f, Bandwidth bw) const;
  // True when the PM has room for one more instance of `f`.
  bool can_host_new(NodeId pm, FunctionKind f) const;

  // Power of lighting `route` and hosting `f` on `pm` (new instance or reuse),
  // relative to the overlay as it stands. Does not mutate.
  double marginal_cost(NodeId pm, FunctionKind f, bool new_instance, std::span<const LinkId> route) const;

  void add_route(std::span<const LinkId> route, Bandwidth bw);
  // Throws AllocationError when the reuse/new-instance choice is infeasible.
  void add_function(NodeId pm, FunctionKind f, Bandwidth bw, bool new_instance);

  // Total power after the overlay minus total power of the base state.
  double power_delta() const;

 private:
  struct Pending {
    NodeId pm;
    FunctionKind f;
    Bandwidth residual;
  };

  double route_cost(std::span<const LinkId> route) const;

  const NetworkState* base_;
  std::map<LinkId, Bandwidth> used_;
  std::set<CableId> new_cables_;
  std::set<NodeId> new_switches_;
  std::map<NodeId, Resources> extra_res_;
  std::map<InstanceId, Bandwidth> reuse_;
  std::vector<Pending> pending_;
};

// Power added by hosting `f` on `pm` and lighting `route`, without mutating state.
// Cheapest to dearest: reuse an instance, new instance on an active PM, waking a PM.
double incremental_cost(const NetworkState& state, NodeId pm, FunctionKind f, bool new_instance,
                        std::span<const LinkId> route);

}  // namespace vnfp
