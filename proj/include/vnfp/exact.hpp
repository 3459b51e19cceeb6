#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vnfp/netstate.hpp"

namespace vnfp {

enum class VarType { Binary, Integer, Continuous };
enum class Sense { LessEqual, Equal, GreaterEqual };

// Constraint families of the placement ILP.
enum class RowFamily {
  Resources,        // sum_f C_fr z_if <= C_ir
  Processing,       // sum_g B_g u_ifg <= B_f z_if
  LinkCapacity,     // sum_g B_g w_ijg <= C_ij
  Mapping,          // u_ifg <= z_if
  Delay,            // propagation <= D_g - processing
  FlowConservation, // out - in = u_ik - u_il per virtual link
  Endpoints,        // u_i,src = [i = v_s], u_i,dst = [i = v_d]
  CableIndicator,   // sum w over both directions <= Psi l
  SwitchIndicator,  // sum incident l <= Psi y
  PmIndicator,      // sum_f z_if <= Psi x
};
std::string_view family_name(RowFamily f);

struct Variable {
  std::string name;
  VarType type = VarType::Binary;
  double lb = 0.0;
  double ub = 1.0;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  RowFamily family = RowFamily::Resources;
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

enum class BigMPolicy { Tight, Loose };

struct ModelOptions {
  BigMPolicy big_m = BigMPolicy::Tight;
  double loose_factor = 1000.0;  // multiplies the tight values under Loose
};

// Virtual chain graph of one demand: node 0 is the source, 1..n the chain
// functions, n+1 the destination; virtual links are (k, k+1).
struct VirtualChain {
  std::vector<FunctionKind> chain;
  std::size_t node_count() const { return chain.size() + 2; }
  std::size_t link_count() const { return chain.size() + 1; }
};

class MilpModel {
 public:
  const NetworkGraph& graph() const { return graph_; }
  const Catalog& catalog() const { return catalog_; }
  const std::vector<Demand>& demands() const { return demands_; }
  const std::vector<VirtualChain>& chains() const { return chains_; }
  const std::vector<FunctionKind>& functions() const { return functions_; }  // kinds with z variables

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<Term>& objective() const { return objective_; }
  double big_m(RowFamily f) const { return big_m_.at(f); }

  std::optional<int> find(std::string_view name) const;

  // Variable indices. g is the demand position, k a virtual node, kl a virtual link.
  int u(NodeId i, std::size_t k, std::size_t g) const;
  int w(LinkId link, std::size_t kl, std::size_t g) const;
  int z(NodeId i, FunctionKind f) const;
  int x(NodeId i) const;
  int y(NodeId i) const;
  int l(CableId c) const;

  double objective_value(std::span<const double> values) const;

 private:
  friend MilpModel build_model(const NetworkGraph&, const Catalog&, std::vector<Demand>, ModelOptions);
  MilpModel(const NetworkGraph& g, const Catalog& c, std::vector<Demand> d)
      : graph_(g), catalog_(c), demands_(std::move(d)) {}
  int add_var(std::string name, VarType t, double lb, double ub);

  NetworkGraph graph_;
  Catalog catalog_;
  std::vector<Demand> demands_;
  std::vector<VirtualChain> chains_;
  std::vector<FunctionKind> functions_;
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<Term> objective_;
  std::map<RowFamily, double> big_m_;
  std::map<std::string, int, std::less<>> by_name_;
  std::vector<std::vector<std::vector<int>>> u_;  // [g][k][i]
  std::vector<std::vector<std::vector<int>>> w_;  // [g][kl][link]
  std::map<std::pair<NodeId, FunctionKind>, int> z_;
  std::vector<int> x_, y_, l_;
};

// Throws ValidationError for demands whose service or endpoints do not fit the graph/catalog.
MilpModel build_model(const NetworkGraph& graph, const Catalog& catalog, std::vector<Demand> demands,
                      ModelOptions opts = {});

// CPLEX LP text. Output depends only on the model.
std::string export_lp(const MilpModel& model);

struct ExactLimits {
  std::size_t max_nodes = 8;
  std::size_t max_demands = 3;
  std::size_t max_chain = 3;
};

struct ExactSolution {
  bool feasible = false;
  bool optimal = false;
  double objective = 0.0;
  std::vector<double> values;          // indexed like model.variables()
  std::vector<ChainPlacement> plans;   // per demand, model order
  std::uint64_t nodes_explored = 0;
};

bool within_limits(const MilpModel& model, const ExactLimits& limits);

// Exhaustive search over function placements and simple per-segment paths.
// Throws ValidationError when the instance exceeds `limits`.
ExactSolution solve_exact_small(const MilpModel& model, const ExactLimits& limits = {});

// Row, bound and integrality violations of `values`; empty iff feasible. When
// `claimed_objective` is given, a mismatch with the recomputed objective is
// reported too.
std::vector<std::string> validate_solution(const MilpModel& model, std::span<const double> values,
                                           std::optional<double> claimed_objective = std::nullopt);

// Reads the model variables off a state holding one allocation per model demand.
std::vector<double> assignment_from_state(const MilpModel& model, const NetworkState& state);

// Applies an exact solution's plans to `state` (normally fresh).
void realize(const MilpModel& model, const ExactSolution& sol, NetworkState& state);

}  // namespace vnfp
