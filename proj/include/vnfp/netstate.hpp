#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vnfp/common.hpp"
#include "vnfp/topology.hpp"
#include "vnfp/workload.hpp"

namespace vnfp {

struct VnfInstance {
  InstanceId id = 0;
  NodeId pm = 0;
  FunctionType function;
  Bandwidth residual;
  // Bandwidth this instance carries for each demand it serves.
  std::map<DemandId, Bandwidth> load;

  friend bool operator==(const VnfInstance&, const VnfInstance&) = default;
};

// One segment per virtual link of the chain: src -> f1 -> ... -> fn -> dst.
// Empty segments mean the two virtual nodes share a node.
struct Route {
  std::vector<std::vector<LinkId>> segments;

  std::vector<LinkId> links() const;
  friend bool operator==(const Route&, const Route&) = default;
};

struct FunctionAssignment {
  FunctionKind function = FunctionKind::NAT;
  NodeId pm = 0;
  InstanceId instance = 0;
  friend bool operator==(const FunctionAssignment&, const FunctionAssignment&) = default;
};

struct Allocation {
  DemandId demand = 0;
  NodeId src = 0;
  NodeId dst = 0;
  Bandwidth bandwidth;
  double delay_budget_ms = 0.0;
  std::vector<FunctionAssignment> function_map;
  Route route;
  double total_delay_ms = 0.0;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

// Where each chain function goes. Reuse steps take the best-fitting existing
// instance of the function on that PM.
struct PlacementStep {
  FunctionKind function = FunctionKind::NAT;
  NodeId pm = 0;
  bool new_instance = false;
};

struct ChainPlacement {
  std::vector<PlacementStep> steps;
  Route route;
};

// Propagation delay of the route plus processing delay of every chain function.
double chain_delay(const NetworkGraph& g, const Catalog& c, const std::vector<FunctionKind>& chain,
                   const Route& route);

// Mutable allocation ledger over a NetworkGraph. Switch, cable and PM on/off
// status is derived from usage so the indicator constraints hold by construction.
class NetworkState {
 public:
  NetworkState(const NetworkGraph& graph, const Catalog& catalog);

  const NetworkGraph& graph() const { return *graph_; }
  const Catalog& catalog() const { return *catalog_; }

  Bandwidth residual(LinkId l) const { return residual_.at(static_cast<std::size_t>(l)); }
  int link_traversals(LinkId l) const { return traversals_.at(static_cast<std::size_t>(l)); }
  bool cable_active(CableId c) const {
    return traversals_.at(static_cast<std::size_t>(2 * c)) + traversals_.at(static_cast<std::size_t>(2 * c + 1)) > 0;
  }
  bool link_active(LinkId l) const { return cable_active(cable_of(l)); }
  int active_ports(NodeId n) const { return ports_.at(static_cast<std::size_t>(n)); }
  bool switch_active(NodeId n) const { return active_ports(n) > 0; }
  bool pm_active(NodeId n) const { return !node_instances_.at(static_cast<std::size_t>(n)).empty(); }
  const Resources& pm_used(NodeId n) const { return pm_used_.at(static_cast<std::size_t>(n)); }
  Resources pm_free(NodeId n) const { return graph_->node(n).pm.capacity - pm_used(n); }

  std::size_t active_switch_count() const;
  std::size_t active_cable_count() const;

  const std::map<InstanceId, VnfInstance>& instances() const { return instances_; }
  const std::set<InstanceId>& instances_on(NodeId n) const {
    return node_instances_.at(static_cast<std::size_t>(n));
  }
  const std::map<DemandId, Allocation>& allocations() const { return allocations_; }

  // Instance of `f` on `pm` with the smallest residual that still fits `bw`.
  std::optional<InstanceId> best_fit_instance(NodeId pm, FunctionKind f, Bandwidth bw) const;

  // Commits the placement atomically; on any violation throws AllocationError and
  // leaves the state untouched.
  const Allocation& apply(const Demand& demand, const ChainPlacement& placement);
  // Exact inverse of apply. Emptied instances are removed.
  void release(DemandId demand);

  // Raw residual write with no bookkeeping; only for exercising validate_state.
  void set_residual_unchecked(LinkId l, Bandwidth v) { residual_.at(static_cast<std::size_t>(l)) = v; }

  // Deterministic text snapshot of the whole ledger.
  std::string dump() const;

  friend bool operator==(const NetworkState& a, const NetworkState& b);

 private:
  void check_route_shape(const Demand& demand, const ChainPlacement& p) const;

  const NetworkGraph* graph_;
  const Catalog* catalog_;
  std::vector<Bandwidth> residual_;
  std::vector<int> traversals_;
  std::vector<int> ports_;
  std::vector<Resources> pm_used_;
  std::vector<std::set<InstanceId>> node_instances_;
  std::map<InstanceId, VnfInstance> instances_;
  std::map<DemandId, Allocation> allocations_;
};

double cpu_utilization(const NetworkState& state, NodeId node);

// Empty iff every ledger invariant and capacity constraint holds.
std::vector<std::string> validate_state(const NetworkState& state);

}  // namespace vnfp
