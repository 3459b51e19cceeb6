#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "vnfp/exact.hpp"
#include "vnfp/power.hpp"

namespace vnfp {

std::string_view family_name(RowFamily f) {
  switch (f) {
    case RowFamily::Resources: return "resources";
    case RowFamily::Processing: return "processing";
    case RowFamily::LinkCapacity: return "link-capacity";
    case RowFamily::Mapping: return "mapping";
    case RowFamily::Delay: return "delay";
    case RowFamily::FlowConservation: return "flow-conservation";
    case RowFamily::Endpoints: return "endpoints";
    case RowFamily::CableIndicator: return "cable-indicator";
    case RowFamily::SwitchIndicator: return "switch-indicator";
    case RowFamily::PmIndicator: return "pm-indicator";
  }
  return "unknown";
}

namespace {

constexpr std::string_view kResourceTag[] = {"cpu", "mem", "sto"};

double mbps(Bandwidth b) { return static_cast<double>(b.kbps) / 1000.0; }

std::int64_t z_bound(const Resources& cap, const Resources& need) {
  std::int64_t ub = -1;
  for (std::size_t r = 0; r < kResourceCount; ++r) {
    if (need.amount[r] <= 0) continue;
    const std::int64_t k = cap.amount[r] / need.amount[r];
    ub = ub < 0 ? k : std::min(ub, k);
  }
  return std::max<std::int64_t>(ub, 0);
}

}  // namespace

std::optional<int> MilpModel::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int MilpModel::u(NodeId i, std::size_t k, std::size_t g) const {
  return u_.at(g).at(k).at(static_cast<std::size_t>(i));
}
int MilpModel::w(LinkId link, std::size_t kl, std::size_t g) const {
  return w_.at(g).at(kl).at(static_cast<std::size_t>(link));
}
int MilpModel::z(NodeId i, FunctionKind f) const { return z_.at({i, f}); }
int MilpModel::x(NodeId i) const { return x_.at(static_cast<std::size_t>(i)); }
int MilpModel::y(NodeId i) const { return y_.at(static_cast<std::size_t>(i)); }
int MilpModel::l(CableId c) const { return l_.at(static_cast<std::size_t>(c)); }

int MilpModel::add_var(std::string name, VarType t, double lb, double ub) {
  const int id = static_cast<int>(vars_.size());
  if (!by_name_.emplace(name, id).second) throw Error(fmt::format("duplicate variable {}", name));
  vars_.push_back({std::move(name), t, lb, ub});
  return id;
}

double MilpModel::objective_value(std::span<const double> values) const {
  if (values.size() != vars_.size()) throw ValidationError("assignment size does not match the model");
  double v = 0.0;
  for (const Term& t : objective_) v += t.coef * values[static_cast<std::size_t>(t.var)];
  return v;
}

MilpModel build_model(const NetworkGraph& graph, const Catalog& catalog, std::vector<Demand> demands,
                      ModelOptions opts) {
  for (const Demand& d : demands) {
    if (!graph.valid_node(d.src) || !graph.valid_node(d.dst))
      throw ValidationError(fmt::format("demand {} has an endpoint outside the graph", d.id));
    if (d.src == d.dst) throw ValidationError(fmt::format("demand {} has src == dst", d.id));
    if (d.chain.empty()) throw ValidationError(fmt::format("demand {} has an empty chain", d.id));
    if (!catalog.find_service(d.service))
      throw ValidationError(fmt::format("demand {} references unknown service '{}'", d.id, d.service));
  }

  MilpModel m(graph, catalog, std::move(demands));
  const auto n = graph.node_count();
  const auto& p = graph.power();

  std::set<FunctionKind> used;
  for (const Demand& d : m.demands_) {
    m.chains_.push_back({d.chain});
    used.insert(d.chain.begin(), d.chain.end());
  }
  m.functions_.assign(used.begin(), used.end());

  // Variables.
  for (std::size_t g = 0; g < m.demands_.size(); ++g) {
    const auto& vc = m.chains_[g];
    m.u_.emplace_back(vc.node_count(), std::vector<int>(n));
    for (std::size_t k = 0; k < vc.node_count(); ++k)
      for (std::size_t i = 0; i < n; ++i)
        m.u_[g][k][i] = m.add_var(fmt::format("u_{}_{}_{}", i, k, g), VarType::Binary, 0, 1);
    m.w_.emplace_back(vc.link_count(), std::vector<int>(graph.link_count()));
    for (std::size_t kl = 0; kl < vc.link_count(); ++kl)
      for (std::size_t e = 0; e < graph.link_count(); ++e) {
        const Link& lk = graph.links()[e];
        m.w_[g][kl][e] =
            m.add_var(fmt::format("w_{}_{}_{}_{}_{}", lk.src, lk.dst, kl, kl + 1, g), VarType::Binary, 0, 1);
      }
  }
  double z_ub_total = 0.0;
  std::vector<double> z_ub_node(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (FunctionKind f : m.functions_) {
      const auto ub = static_cast<double>(z_bound(graph.nodes()[i].pm.capacity, catalog.function(f).demand));
      m.z_[{static_cast<NodeId>(i), f}] =
          m.add_var(fmt::format("z_{}_{}", i, function_name(f)), VarType::Integer, 0, ub);
      z_ub_node[i] += ub;
    }
    z_ub_total = std::max(z_ub_total, z_ub_node[i]);
  }
  for (std::size_t i = 0; i < n; ++i) m.x_.push_back(m.add_var(fmt::format("x_{}", i), VarType::Binary, 0, 1));
  for (std::size_t i = 0; i < n; ++i) m.y_.push_back(m.add_var(fmt::format("y_{}", i), VarType::Binary, 0, 1));
  for (std::size_t c = 0; c < graph.cable_count(); ++c) {
    const Link& lk = graph.links()[2 * c];
    m.l_.push_back(m.add_var(fmt::format("l_{}_{}", lk.src, lk.dst), VarType::Binary, 0, 1));
  }

  double virtual_links = 0.0;
  for (const auto& vc : m.chains_) virtual_links += static_cast<double>(vc.link_count());
  const double scale = opts.big_m == BigMPolicy::Loose ? opts.loose_factor : 1.0;
  m.big_m_[RowFamily::CableIndicator] = virtual_links * scale;
  m.big_m_[RowFamily::SwitchIndicator] = 2.0 * static_cast<double>(n) * scale;
  m.big_m_[RowFamily::PmIndicator] = z_ub_total * scale;

  auto add_row = [&](RowFamily fam, std::string name, std::vector<Term> terms, Sense s, double rhs) {
    std::erase_if(terms, [](const Term& t) { return t.coef == 0.0; });
    if (terms.empty()) return;
    m.rows_.push_back({fam, std::move(name), std::move(terms), s, rhs});
  };

  // Node resources.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < kResourceCount; ++r) {
      std::vector<Term> t;
      for (FunctionKind f : m.functions_)
        t.push_back({m.z(static_cast<NodeId>(i), f), static_cast<double>(catalog.function(f).demand.amount[r])});
      add_row(RowFamily::Resources, fmt::format("res_{}_{}", i, kResourceTag[r]), std::move(t), Sense::LessEqual,
              static_cast<double>(graph.nodes()[i].pm.capacity.amount[r]));
    }
  }
  // Function processing capacity.
  for (std::size_t i = 0; i < n; ++i) {
    for (FunctionKind f : m.functions_) {
      std::vector<Term> t;
      for (std::size_t g = 0; g < m.demands_.size(); ++g)
        for (std::size_t k = 0; k < m.chains_[g].chain.size(); ++k)
          if (m.chains_[g].chain[k] == f) t.push_back({m.u_[g][k + 1][i], mbps(m.demands_[g].bandwidth)});
      t.push_back({m.z(static_cast<NodeId>(i), f), -mbps(catalog.function(f).processing_capacity)});
      add_row(RowFamily::Processing, fmt::format("proc_{}_{}", i, function_name(f)), std::move(t),
              Sense::LessEqual, 0.0);
    }
  }
  // Directed link capacity.
  for (std::size_t e = 0; e < graph.link_count(); ++e) {
    std::vector<Term> t;
    for (std::size_t g = 0; g < m.demands_.size(); ++g)
      for (std::size_t kl = 0; kl < m.chains_[g].link_count(); ++kl)
        t.push_back({m.w_[g][kl][e], mbps(m.demands_[g].bandwidth)});
    const Link& lk = graph.links()[e];
    add_row(RowFamily::LinkCapacity, fmt::format("cap_{}_{}", lk.src, lk.dst), std::move(t), Sense::LessEqual,
            mbps(lk.capacity));
  }
  // Function mapping requires an instance.
  for (std::size_t g = 0; g < m.demands_.size(); ++g)
    for (std::size_t k = 0; k < m.chains_[g].chain.size(); ++k)
      for (std::size_t i = 0; i < n; ++i)
        add_row(RowFamily::Mapping, fmt::format("map_{}_{}_{}", i, k + 1, g),
                {{m.u_[g][k + 1][i], 1.0}, {m.z(static_cast<NodeId>(i), m.chains_[g].chain[k]), -1.0}},
                Sense::LessEqual, 0.0);
  // End-to-end delay.
  for (std::size_t g = 0; g < m.demands_.size(); ++g) {
    double processing = 0.0;
    for (FunctionKind f : m.chains_[g].chain) processing += catalog.function(f).processing_delay_ms;
    std::vector<Term> t;
    for (std::size_t kl = 0; kl < m.chains_[g].link_count(); ++kl)
      for (std::size_t e = 0; e < graph.link_count(); ++e)
        t.push_back({m.w_[g][kl][e], graph.links()[e].delay_ms});
    const double rhs = m.demands_[g].delay_budget_ms - processing;
    if (t.empty() || std::all_of(t.begin(), t.end(), [](const Term& x) { return x.coef == 0.0; })) {
      // Zero-delay links: keep the row so infeasible budgets still show up.
      m.rows_.push_back({RowFamily::Delay, fmt::format("delay_{}", g), {}, Sense::LessEqual, rhs});
    } else {
      add_row(RowFamily::Delay, fmt::format("delay_{}", g), std::move(t), Sense::LessEqual, rhs);
    }
  }
  // Flow conservation per virtual link.
  for (std::size_t g = 0; g < m.demands_.size(); ++g)
    for (std::size_t kl = 0; kl < m.chains_[g].link_count(); ++kl)
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<Term> t;
        const auto node = static_cast<NodeId>(i);
        for (LinkId e : graph.out_links(node)) {
          t.push_back({m.w_[g][kl][static_cast<std::size_t>(e)], 1.0});
          t.push_back({m.w_[g][kl][static_cast<std::size_t>(reverse_link(e))], -1.0});
        }
        t.push_back({m.u_[g][kl][i], -1.0});
        t.push_back({m.u_[g][kl + 1][i], 1.0});
        add_row(RowFamily::FlowConservation, fmt::format("flow_{}_{}_{}_{}", i, kl, kl + 1, g), std::move(t),
                Sense::Equal, 0.0);
      }
  // Endpoint pinning.
  for (std::size_t g = 0; g < m.demands_.size(); ++g) {
    const std::size_t last = m.chains_[g].node_count() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto node = static_cast<NodeId>(i);
      m.rows_.push_back({RowFamily::Endpoints, fmt::format("src_{}_{}", i, g), {{m.u_[g][0][i], 1.0}},
                         Sense::Equal, node == m.demands_[g].src ? 1.0 : 0.0});
      m.rows_.push_back({RowFamily::Endpoints, fmt::format("dst_{}_{}", i, g), {{m.u_[g][last][i], 1.0}},
                         Sense::Equal, node == m.demands_[g].dst ? 1.0 : 0.0});
    }
  }
  // On/off indicators.
  for (std::size_t c = 0; c < graph.cable_count(); ++c) {
    std::vector<Term> t;
    for (std::size_t g = 0; g < m.demands_.size(); ++g)
      for (std::size_t kl = 0; kl < m.chains_[g].link_count(); ++kl) {
        t.push_back({m.w_[g][kl][2 * c], 1.0});
        t.push_back({m.w_[g][kl][2 * c + 1], 1.0});
      }
    t.push_back({m.l_[c], -m.big_m_[RowFamily::CableIndicator]});
    const Link& lk = graph.links()[2 * c];
    add_row(RowFamily::CableIndicator, fmt::format("cable_{}_{}", lk.src, lk.dst), std::move(t), Sense::LessEqual,
            0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Term> t;
    for (LinkId e : graph.out_links(static_cast<NodeId>(i))) t.push_back({m.l_[static_cast<std::size_t>(cable_of(e))], 1.0});
    t.push_back({m.y_[i], -m.big_m_[RowFamily::SwitchIndicator]});
    add_row(RowFamily::SwitchIndicator, fmt::format("switch_{}", i), std::move(t), Sense::LessEqual, 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Term> t;
    for (FunctionKind f : m.functions_) t.push_back({m.z(static_cast<NodeId>(i), f), 1.0});
    t.push_back({m.x_[i], -m.big_m_[RowFamily::PmIndicator]});
    add_row(RowFamily::PmIndicator, fmt::format("pm_{}", i), std::move(t), Sense::LessEqual, 0.0);
  }

  // Objective: switches, cables, PM idle power, per-instance CPU share.
  for (std::size_t i = 0; i < n; ++i) m.objective_.push_back({m.y_[i], p.p_ss});
  for (std::size_t c = 0; c < graph.cable_count(); ++c) m.objective_.push_back({m.l_[c], 2.0 * p.p_p});
  for (std::size_t i = 0; i < n; ++i) {
    m.objective_.push_back({m.x_[i], p.p_sm});
    const auto cores = static_cast<double>(graph.nodes()[i].pm.capacity.cores());
    for (FunctionKind f : m.functions_)
      m.objective_.push_back({m.z(static_cast<NodeId>(i), f),
                              (p.p_mm - p.p_sm) * static_cast<double>(catalog.function(f).demand.cores()) / cores});
  }
  return m;
}

namespace {

void append_expr(std::string& out, const MilpModel& m, const std::vector<Term>& terms, std::size_t indent) {
  std::size_t col = indent;
  bool first = true;
  for (const Term& t : terms) {
    std::string piece;
    const double a = std::abs(t.coef);
    if (!first || t.coef < 0) piece += t.coef < 0 ? "- " : "+ ";
    if (a != 1.0) piece += fmt::format("{} ", a);
    piece += m.variables()[static_cast<std::size_t>(t.var)].name;
    if (!first && col + piece.size() + 1 > 78) {
      out += '\n';
      out.append(indent, ' ');
      col = indent;
    } else if (!first) {
      out += ' ';
      ++col;
    }
    out += piece;
    col += piece.size();
    first = false;
  }
  if (first) out += "0 x_0";
}

}  // namespace

std::string export_lp(const MilpModel& m) {
  std::string out = "\\ VNF chain placement, power minimisation\n";
  out += "Minimize\n obj: ";
  append_expr(out, m, m.objective(), 6);
  out += "\nSubject To\n";
  for (const Constraint& c : m.constraints()) {
    const std::string head = fmt::format(" {}: ", c.name);
    out += head;
    if (c.terms.empty()) {
      // LP format needs a variable on the left; 0 y_0 keeps constant rows valid.
      out += fmt::format("0 {}", m.variables()[static_cast<std::size_t>(m.y(0))].name);
    } else {
      append_expr(out, m, c.terms, head.size());
    }
    const char* op = c.sense == Sense::LessEqual ? "<=" : c.sense == Sense::Equal ? "=" : ">=";
    out += fmt::format(" {} {}\n", op, c.rhs);
  }
  out += "Bounds\n";
  for (const Variable& v : m.variables())
    if (v.type == VarType::Integer) out += fmt::format(" {} <= {}\n", v.name, v.ub);
  std::vector<std::string_view> generals, binaries;
  for (const Variable& v : m.variables()) {
    if (v.type == VarType::Integer) generals.push_back(v.name);
    if (v.type == VarType::Binary) binaries.push_back(v.name);
  }
  auto list = [&](std::string_view title, const std::vector<std::string_view>& names) {
    if (names.empty()) return;
    out += fmt::format("{}\n", title);
    std::size_t col = 0;
    for (auto name : names) {
      if (col > 0 && col + name.size() + 1 > 78) {
        out += '\n';
        col = 0;
      }
      out += ' ';
      out += name;
      col += name.size() + 1;
    }
    out += '\n';
  };
  list("Generals", generals);
  list("Binary", binaries);
  out += "End\n";
  return out;
}

std::vector<std::string> validate_solution(const MilpModel& m, std::span<const double> values,
                                           std::optional<double> claimed_objective) {
  std::vector<std::string> bad;
  if (values.size() != m.variables().size()) {
    bad.push_back(fmt::format("assignment has {} values, model has {} variables", values.size(),
                              m.variables().size()));
    return bad;
  }
  constexpr double tol = 1e-6;
  for (std::size_t v = 0; v < values.size(); ++v) {
    const Variable& var = m.variables()[v];
    const double x = values[v];
    if (!std::isfinite(x) || x < var.lb - tol || x > var.ub + tol)
      bad.push_back(fmt::format("bound:{} = {}", var.name, x));
    else if (var.type != VarType::Continuous && std::abs(x - std::round(x)) > tol)
      bad.push_back(fmt::format("integrality:{} = {}", var.name, x));
  }
  for (const Constraint& c : m.constraints()) {
    double lhs = 0.0;
    for (const Term& t : c.terms) lhs += t.coef * values[static_cast<std::size_t>(t.var)];
    const double slack = tol * std::max(1.0, std::abs(c.rhs));
    const bool ok = c.sense == Sense::LessEqual  ? lhs <= c.rhs + slack
                    : c.sense == Sense::Equal    ? std::abs(lhs - c.rhs) <= slack
                                                 : lhs >= c.rhs - slack;
    if (!ok) bad.push_back(fmt::format("{}:{} (lhs {} rhs {})", family_name(c.family), c.name, lhs, c.rhs));
  }
  if (claimed_objective) {
    const double obj = m.objective_value(values);
    if (std::abs(obj - *claimed_objective) > 1e-9 * std::max(1.0, std::abs(obj)))
      bad.push_back(fmt::format("objective: claimed {} recomputed {}", *claimed_objective, obj));
  }
  return bad;
}

std::vector<double> assignment_from_state(const MilpModel& m, const NetworkState& state) {
  const auto& g = m.graph();
  if (!(state.graph() == g)) throw ValidationError("state and model use different graphs");
  std::vector<double> v(m.variables().size(), 0.0);
  for (std::size_t gi = 0; gi < m.demands().size(); ++gi) {
    const Demand& d = m.demands()[gi];
    auto it = state.allocations().find(d.id);
    if (it == state.allocations().end())
      throw ValidationError(fmt::format("demand {} has no allocation in the state", d.id));
    const Allocation& a = it->second;
    if (a.function_map.size() != d.chain.size() || a.route.segments.size() != d.chain.size() + 1)
      throw ValidationError(fmt::format("allocation of demand {} does not match its chain", d.id));
    v[static_cast<std::size_t>(m.u(d.src, 0, gi))] = 1.0;
    v[static_cast<std::size_t>(m.u(d.dst, d.chain.size() + 1, gi))] = 1.0;
    for (std::size_t k = 0; k < a.function_map.size(); ++k)
      v[static_cast<std::size_t>(m.u(a.function_map[k].pm, k + 1, gi))] = 1.0;
    for (std::size_t kl = 0; kl < a.route.segments.size(); ++kl)
      for (LinkId e : a.route.segments[kl]) v[static_cast<std::size_t>(m.w(e, kl, gi))] += 1.0;
  }
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto node = static_cast<NodeId>(i);
    for (InstanceId id : state.instances_on(node)) {
      const auto& inst = state.instances().at(id);
      if (auto idx = m.find(fmt::format("z_{}_{}", i, function_name(inst.function.kind))))
        v[static_cast<std::size_t>(*idx)] += 1.0;
      else
        throw ValidationError(fmt::format("instance {} runs a function outside the model", id));
    }
    v[static_cast<std::size_t>(m.x(node))] = state.pm_active(node) ? 1.0 : 0.0;
    v[static_cast<std::size_t>(m.y(node))] = state.switch_active(node) ? 1.0 : 0.0;
  }
  for (std::size_t c = 0; c < g.cable_count(); ++c)
    v[static_cast<std::size_t>(m.l(static_cast<CableId>(c)))] = state.cable_active(static_cast<CableId>(c)) ? 1.0 : 0.0;
  return v;
}

}  // namespace vnfp
