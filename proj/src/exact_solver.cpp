#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "vnfp/exact.hpp"
#include "vnfp/power.hpp"

namespace vnfp {

bool within_limits(const MilpModel& model, const ExactLimits& limits) {
  if (model.graph().node_count() > limits.max_nodes) return false;
  if (model.demands().size() > limits.max_demands) return false;
  for (const Demand& d : model.demands())
    if (d.chain.size() > limits.max_chain) return false;
  return true;
}

namespace {

struct Path {
  std::vector<LinkId> links;
  double delay = 0.0;
};

void enumerate(const NetworkGraph& g, NodeId at, NodeId to, std::vector<char>& on_path, Path& cur,
               std::vector<Path>& out) {
  if (at == to) {
    out.push_back(cur);
    return;
  }
  for (LinkId l : g.out_links(at)) {
    const NodeId next = g.link(l).dst;
    if (on_path[static_cast<std::size_t>(next)]) continue;
    on_path[static_cast<std::size_t>(next)] = 1;
    cur.links.push_back(l);
    cur.delay += g.link(l).delay_ms;
    enumerate(g, next, to, on_path, cur, out);
    cur.delay -= g.link(l).delay_ms;
    cur.links.pop_back();
    on_path[static_cast<std::size_t>(next)] = 0;
  }
}

// All simple paths a -> b, fewest hops first, then lowest delay, then link ids.
std::vector<Path> simple_paths(const NetworkGraph& g, NodeId a, NodeId b) {
  std::vector<Path> out;
  std::vector<char> on_path(g.node_count(), 0);
  on_path[static_cast<std::size_t>(a)] = 1;
  Path cur;
  enumerate(g, a, b, on_path, cur, out);
  std::sort(out.begin(), out.end(), [](const Path& x, const Path& y) {
    if (x.links.size() != y.links.size()) return x.links.size() < y.links.size();
    if (x.delay != y.delay) return x.delay < y.delay;
    return x.links < y.links;
  });
  return out;
}

class Search {
 public:
  explicit Search(const MilpModel& m) : m_(m), g_(m.graph()), cat_(m.catalog()) {
    const auto n = g_.node_count();
    paths_.resize(n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        paths_[a * n + b] = simple_paths(g_, static_cast<NodeId>(a), static_cast<NodeId>(b));

    // Cost coefficients come from the model objective.
    std::vector<double> coef(m.variables().size(), 0.0);
    for (const Term& t : m.objective()) coef[static_cast<std::size_t>(t.var)] += t.coef;
    y_coef_.resize(n);
    x_coef_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      y_coef_[i] = coef[static_cast<std::size_t>(m.y(static_cast<NodeId>(i)))];
      x_coef_[i] = coef[static_cast<std::size_t>(m.x(static_cast<NodeId>(i)))];
    }
    for (std::size_t c = 0; c < g_.cable_count(); ++c)
      l_coef_.push_back(coef[static_cast<std::size_t>(m.l(static_cast<CableId>(c)))]);
    z_coef_.assign(n, std::vector<double>(kFunctionKindCount, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (FunctionKind f : m.functions())
        z_coef_[i][static_cast<std::size_t>(f)] = coef[static_cast<std::size_t>(m.z(static_cast<NodeId>(i), f))];

    residual_.resize(g_.link_count());
    for (std::size_t e = 0; e < g_.link_count(); ++e) residual_[e] = g_.links()[e].capacity;
    cable_use_.assign(g_.cable_count(), 0);
    ports_.assign(n, 0);
    load_.assign(n, std::vector<Bandwidth>(kFunctionKindCount));
    z_.assign(n, std::vector<std::int64_t>(kFunctionKindCount, 0));
    used_.assign(n, Resources{});
    instances_.assign(n, 0);

    for (const Demand& d : m.demands()) {
      double proc = 0.0;
      for (FunctionKind f : d.chain) proc += cat_.function(f).processing_delay_ms;
      processing_.push_back(proc);
      plans_.push_back({{}, {}});
    }
  }

  ExactSolution run() {
    demand(0);
    ExactSolution sol;
    sol.nodes_explored = explored_;
    if (!best_plans_) {
      sol.optimal = true;  // infeasibility is proven by exhaustion
      return sol;
    }
    sol.feasible = true;
    sol.optimal = true;
    sol.plans = *best_plans_;
    sol.values = values_from_plans(sol.plans);
    sol.objective = m_.objective_value(sol.values);
    return sol;
  }

 private:
  const std::vector<Path>& paths(NodeId a, NodeId b) const {
    return paths_[static_cast<std::size_t>(a) * g_.node_count() + static_cast<std::size_t>(b)];
  }

  bool pruned() const { return best_plans_ && cost_ >= best_cost_ - 1e-9; }

  void demand(std::size_t gi) {
    if (gi == m_.demands().size()) {
      if (!best_plans_ || cost_ < best_cost_ - 1e-9) {
        best_cost_ = cost_;
        best_plans_ = plans_;
      }
      return;
    }
    delay_ = 0.0;
    step(gi, 0, m_.demands()[gi].src);
  }

  void step(std::size_t gi, std::size_t k, NodeId origin) {
    ++explored_;
    const Demand& d = m_.demands()[gi];
    ChainPlacement& plan = plans_[gi];
    if (k == d.chain.size()) {
      for (const Path& p : paths(origin, d.dst)) {
        if (delay_ + p.delay + processing_[gi] > d.delay_budget_ms + 1e-9) continue;
        if (!add_path(p.links, d.bandwidth)) continue;
        if (!pruned()) {
          plan.route.segments.push_back(p.links);
          const double saved = delay_;
          demand(gi + 1);
          delay_ = saved;
          plan.route.segments.pop_back();
        }
        remove_path(p.links, d.bandwidth);
      }
      return;
    }
    const FunctionKind f = d.chain[k];
    for (std::size_t pm = 0; pm < g_.node_count(); ++pm) {
      const auto node = static_cast<NodeId>(pm);
      if (!add_function(node, f, d.bandwidth)) continue;
      if (!pruned()) {
        plan.steps.push_back({f, node, false});
        for (const Path& p : paths(origin, node)) {
          if (delay_ + p.delay + processing_[gi] > d.delay_budget_ms + 1e-9) continue;
          if (!add_path(p.links, d.bandwidth)) continue;
          if (!pruned()) {
            plan.route.segments.push_back(p.links);
            delay_ += p.delay;
            step(gi, k + 1, node);
            delay_ -= p.delay;
            plan.route.segments.pop_back();
          }
          remove_path(p.links, d.bandwidth);
        }
        plan.steps.pop_back();
      }
      remove_function(node, f, d.bandwidth);
    }
  }

  bool add_path(const std::vector<LinkId>& links, Bandwidth bw) {
    std::size_t done = 0;
    for (; done < links.size(); ++done) {
      const auto e = static_cast<std::size_t>(links[done]);
      if (residual_[e] < bw) break;
      residual_[e] -= bw;
      const auto c = static_cast<std::size_t>(cable_of(links[done]));
      if (cable_use_[c]++ == 0) {
        cost_ += l_coef_[c];
        for (NodeId n : {g_.links()[e].src, g_.links()[e].dst})
          if (ports_[static_cast<std::size_t>(n)]++ == 0) cost_ += y_coef_[static_cast<std::size_t>(n)];
      }
    }
    if (done == links.size()) return true;
    remove_prefix(links, done, bw);
    return false;
  }

  void remove_path(const std::vector<LinkId>& links, Bandwidth bw) { remove_prefix(links, links.size(), bw); }

  void remove_prefix(const std::vector<LinkId>& links, std::size_t count, Bandwidth bw) {
    for (std::size_t j = count; j-- > 0;) {
      const auto e = static_cast<std::size_t>(links[j]);
      residual_[e] += bw;
      const auto c = static_cast<std::size_t>(cable_of(links[j]));
      if (--cable_use_[c] == 0) {
        cost_ -= l_coef_[c];
        for (NodeId n : {g_.links()[e].src, g_.links()[e].dst})
          if (--ports_[static_cast<std::size_t>(n)] == 0) cost_ -= y_coef_[static_cast<std::size_t>(n)];
      }
    }
  }

  // Aggregated instances: z = ceil(load / B_f).
  bool add_function(NodeId node, FunctionKind f, Bandwidth bw) {
    const auto i = static_cast<std::size_t>(node);
    const auto fi = static_cast<std::size_t>(f);
    const FunctionType& ft = cat_.function(f);
    const Bandwidth load = load_[i][fi] + bw;
    const std::int64_t z = (load.kbps + ft.processing_capacity.kbps - 1) / ft.processing_capacity.kbps;
    const std::int64_t extra = z - z_[i][fi];
    Resources need = used_[i];
    for (std::int64_t j = 0; j < extra; ++j) need = need + ft.demand;
    if (!need.fits_within(g_.node(node).pm.capacity)) return false;
    load_[i][fi] = load;
    used_[i] = need;
    if (extra > 0) {
      if (instances_[i] == 0) cost_ += x_coef_[i];
      instances_[i] += extra;
      cost_ += z_coef_[i][fi] * static_cast<double>(extra);
      z_[i][fi] = z;
    }
    return true;
  }

  void remove_function(NodeId node, FunctionKind f, Bandwidth bw) {
    const auto i = static_cast<std::size_t>(node);
    const auto fi = static_cast<std::size_t>(f);
    const FunctionType& ft = cat_.function(f);
    load_[i][fi] -= bw;
    const std::int64_t z = (load_[i][fi].kbps + ft.processing_capacity.kbps - 1) / ft.processing_capacity.kbps;
    const std::int64_t fewer = z_[i][fi] - z;
    if (fewer <= 0) return;
    for (std::int64_t j = 0; j < fewer; ++j) used_[i] = used_[i] - ft.demand;
    cost_ -= z_coef_[i][fi] * static_cast<double>(fewer);
    instances_[i] -= fewer;
    if (instances_[i] == 0) cost_ -= x_coef_[i];
    z_[i][fi] = z;
  }

  std::vector<double> values_from_plans(const std::vector<ChainPlacement>& plans) const {
    std::vector<double> v(m_.variables().size(), 0.0);
    const auto n = g_.node_count();
    std::vector<std::vector<Bandwidth>> load(n, std::vector<Bandwidth>(kFunctionKindCount));
    std::vector<int> cable(g_.cable_count(), 0);
    for (std::size_t gi = 0; gi < plans.size(); ++gi) {
      const Demand& d = m_.demands()[gi];
      v[static_cast<std::size_t>(m_.u(d.src, 0, gi))] = 1.0;
      v[static_cast<std::size_t>(m_.u(d.dst, d.chain.size() + 1, gi))] = 1.0;
      for (std::size_t k = 0; k < plans[gi].steps.size(); ++k) {
        const auto& s = plans[gi].steps[k];
        v[static_cast<std::size_t>(m_.u(s.pm, k + 1, gi))] = 1.0;
        load[static_cast<std::size_t>(s.pm)][static_cast<std::size_t>(s.function)] += d.bandwidth;
      }
      for (std::size_t kl = 0; kl < plans[gi].route.segments.size(); ++kl)
        for (LinkId e : plans[gi].route.segments[kl]) {
          v[static_cast<std::size_t>(m_.w(e, kl, gi))] += 1.0;
          ++cable[static_cast<std::size_t>(cable_of(e))];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (FunctionKind f : m_.functions()) {
        const auto cap = cat_.function(f).processing_capacity.kbps;
        const auto z = (load[i][static_cast<std::size_t>(f)].kbps + cap - 1) / cap;
        v[static_cast<std::size_t>(m_.z(static_cast<NodeId>(i), f))] = static_cast<double>(z);
        total += static_cast<double>(z);
      }
      v[static_cast<std::size_t>(m_.x(static_cast<NodeId>(i)))] = total > 0 ? 1.0 : 0.0;
    }
    for (std::size_t c = 0; c < g_.cable_count(); ++c) {
      if (!cable[c]) continue;
      v[static_cast<std::size_t>(m_.l(static_cast<CableId>(c)))] = 1.0;
      const Link& lk = g_.links()[2 * c];
      v[static_cast<std::size_t>(m_.y(lk.src))] = 1.0;
      v[static_cast<std::size_t>(m_.y(lk.dst))] = 1.0;
    }
    return v;
  }

  const MilpModel& m_;
  const NetworkGraph& g_;
  const Catalog& cat_;
  std::vector<std::vector<Path>> paths_;
  std::vector<double> y_coef_, x_coef_, l_coef_;
  std::vector<std::vector<double>> z_coef_;
  std::vector<double> processing_;

  std::vector<Bandwidth> residual_;
  std::vector<int> cable_use_;
  std::vector<int> ports_;
  std::vector<std::vector<Bandwidth>> load_;
  std::vector<std::vector<std::int64_t>> z_;
  std::vector<Resources> used_;
  std::vector<std::int64_t> instances_;
  double cost_ = 0.0;
  double delay_ = 0.0;
  std::vector<ChainPlacement> plans_;

  std::optional<std::vector<ChainPlacement>> best_plans_;
  double best_cost_ = 0.0;
  std::uint64_t explored_ = 0;
};

}  // namespace

ExactSolution solve_exact_small(const MilpModel& model, const ExactLimits& limits) {
  if (!within_limits(model, limits))
    throw ValidationError(fmt::format(
        "instance exceeds the exhaustive solver limits ({} nodes, {} demands, chains of {}); export it as LP instead",
        limits.max_nodes, limits.max_demands, limits.max_chain));
  return Search(model).run();
}

void realize(const MilpModel& model, const ExactSolution& sol, NetworkState& state) {
  if (!sol.feasible) throw ValidationError("cannot realize an infeasible solution");
  if (sol.plans.size() != model.demands().size()) throw ValidationError("solution does not match the model");
  for (std::size_t gi = 0; gi < sol.plans.size(); ++gi) {
    const Demand& d = model.demands()[gi];
    ChainPlacement plan = sol.plans[gi];
    StateOverlay view(state);
    for (auto& s : plan.steps) {
      s.new_instance = !view.can_reuse(s.pm, s.function, d.bandwidth);
      view.add_function(s.pm, s.function, d.bandwidth, s.new_instance);
    }
    state.apply(d, plan);
  }
}

}  // namespace vnfp
