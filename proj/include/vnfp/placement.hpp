#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vnfp/bih.hpp"
#include "vnfp/power.hpp"

namespace vnfp {

// Weight schedule for the power/delay trade-off of the path search.
struct PathSearchConfig {
  double gamma0 = 1.0;
  double omega0 = 0.0;
  double delta_w = 0.25;

  void validate() const;
};

// gamma * edge_power / (P_ss + 2 P_p) + omega * delay / max_link_delay, where
// edge_power charges P_ss/2 per dark endpoint switch and 2 P_p for a dark cable.
double edge_weight(const StateOverlay& view, LinkId link, double gamma, double omega);

struct PathSearchStats {
  int weight_settings = 0;  // (gamma, omega) pairs evaluated
};

struct BestPath {
  std::vector<LinkId> to_pm;    // from -> pm
  std::vector<LinkId> from_pm;  // pm -> to
  double propagation_ms = 0.0;
  double gamma = 1.0;  // weights of the accepted iteration
  double omega = 0.0;
};

// Shortest weighted from->pm and pm->to paths inside `island` over links with
// at least `bandwidth` left, accepted once their propagation delay fits
// `delay_budget_ms`. After each delay miss gamma drops and omega rises by
// delta_w; the search gives up as soon as gamma reaches 0 or omega reaches 1.
std::optional<BestPath> calculate_best_path(const StateOverlay& view, const BlockingIsland& island,
                                            NodeId from, NodeId pm, NodeId to, Bandwidth bandwidth,
                                            double delay_budget_ms, const PathSearchConfig& cfg,
                                            PathSearchStats* stats = nullptr);

enum class CandidateClass { ReuseInstance = 0, NewOnActivePm = 1, ActivatePm = 2 };

struct Candidate {
  NodeId pm = 0;
  CandidateClass cls = CandidateClass::ActivatePm;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// PMs of the island able to take `f` for `bandwidth`, each listed once in its
// cheapest class, ordered by class then node id.
std::vector<Candidate> get_candidate_pms(const StateOverlay& view, FunctionKind f, const BlockingIsland& island,
                                         Bandwidth bandwidth);

struct DemandOutcome {
  DemandId demand = 0;
  bool accepted = false;
  std::string reason;  // empty when accepted
  std::optional<Allocation> allocation;
  double added_power = 0.0;
};

struct SolutionSet {
  std::vector<DemandOutcome> outcomes;
  double total_power = 0.0;
  double network_power = 0.0;
  double pm_power = 0.0;
  double mean_delay_ms = 0.0;   // over accepted demands; 0 when none
  double acceptance_rate = 0.0; // accepted / total, in [0, 1]
  double runtime_s = 0.0;       // placement loop only

  std::size_t accepted() const;
};

// Recomputes the aggregate metrics of `sol` from its outcomes and `state`.
void summarize(SolutionSet& sol, const NetworkState& state);

// One evaluated candidate during chain placement.
struct CandidateTrace {
  Candidate candidate;
  std::optional<double> cost;  // nullopt when no delay-feasible path was found
};

struct FunctionTrace {
  DemandId demand = 0;
  std::size_t position = 0;
  std::vector<CandidateTrace> evaluated;
  std::optional<NodeId> chosen;
};

using TraceSink = std::function<void(const FunctionTrace&)>;

struct BiPlacementOptions {
  std::vector<Bandwidth> betas;
  SelectionMode mode = SelectionMode::Lowest;
  PathSearchConfig path;
  TraceSink trace;  // optional
};

// Blocking-island heuristic. Demands are served in order against `state`,
// which must be the state the caller wants to extend (usually fresh).
SolutionSet place_all(NetworkState& state, std::span<const Demand> demands, const BiPlacementOptions& opts);

// Exact node betweenness over hop-shortest paths, summed over ordered (s, t).
struct BetweennessScores {
  std::vector<double> score;
};
BetweennessScores betweenness(const NetworkGraph& graph);

// Hop-shortest path with ties broken towards lower node ids.
std::optional<std::vector<LinkId>> hop_shortest_path(const NetworkGraph& graph, NodeId src, NodeId dst);

// Betweenness baseline: functions go on the demand's hop-shortest path,
// preferring nodes of higher centrality, never leaving the path.
SolutionSet bc_place_all(NetworkState& state, std::span<const Demand> demands);

}  // namespace vnfp
