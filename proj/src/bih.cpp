#include "vnfp/bih.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include <fmt/format.h>

namespace vnfp {

Bandwidth cable_residual(const NetworkState& state, CableId c) {
  return std::min(state.residual(2 * c), state.residual(2 * c + 1));
}

bool BlockingIsland::contains(NodeId n) const { return std::binary_search(nodes.begin(), nodes.end(), n); }

namespace {

// BFS over qualifying cables from `start`, marking members in `member`.
BlockingIsland flood(const NetworkState& state, NodeId start, Bandwidth beta, std::vector<char>& member,
                     SearchStats* stats) {
  const auto& g = state.graph();
  BlockingIsland island;
  island.beta = beta;
  std::deque<NodeId> queue{start};
  member[static_cast<std::size_t>(start)] = 1;
  while (!queue.empty()) {
    const NodeId n = queue.front();
    queue.pop_front();
    island.nodes.push_back(n);
    for (LinkId l : g.out_links(n)) {
      if (stats) ++stats->link_visits;
      if (cable_residual(state, cable_of(l)) < beta) continue;
      island.internal_links.push_back(l);
      const NodeId m = g.link(l).dst;
      if (!member[static_cast<std::size_t>(m)]) {
        member[static_cast<std::size_t>(m)] = 1;
        queue.push_back(m);
      }
    }
  }
  std::sort(island.nodes.begin(), island.nodes.end());
  std::sort(island.internal_links.begin(), island.internal_links.end());
  return island;
}

void index_level(BiGraph& level, std::size_t node_count) {
  std::sort(level.islands.begin(), level.islands.end(),
            [](const BlockingIsland& a, const BlockingIsland& b) { return a.nodes.front() < b.nodes.front(); });
  level.island_of.assign(node_count, -1);
  for (std::size_t i = 0; i < level.islands.size(); ++i) {
    level.islands[i].id = static_cast<int>(i);
    for (NodeId n : level.islands[i].nodes) level.island_of[static_cast<std::size_t>(n)] = static_cast<int>(i);
  }
}

BiGraph build_level(const NetworkState& state, Bandwidth beta) {
  const auto n = state.graph().node_count();
  BiGraph level;
  level.beta = beta;
  std::vector<char> member(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (!member[v]) level.islands.push_back(flood(state, static_cast<NodeId>(v), beta, member, nullptr));
  index_level(level, n);
  return level;
}

}  // namespace

BlockingIsland beta_bi_search(const NetworkState& state, NodeId node, Bandwidth beta, SearchStats* stats) {
  if (!state.graph().valid_node(node)) throw ValidationError(fmt::format("unknown node {}", node));
  if (beta.kbps <= 0) throw ValidationError("beta must be positive");
  std::vector<char> member(state.graph().node_count(), 0);
  return flood(state, node, beta, member, stats);
}

std::vector<AbstractLink> abstract_links(const BiGraph& level, const NetworkState& state) {
  const auto& g = state.graph();
  std::map<std::pair<int, int>, Bandwidth> best;
  for (std::size_t c = 0; c < g.cable_count(); ++c) {
    const Link& l = g.links()[2 * c];
    const int a = level.island_of.at(static_cast<std::size_t>(l.src));
    const int b = level.island_of.at(static_cast<std::size_t>(l.dst));
    if (a == b) continue;
    const auto key = std::minmax(a, b);
    const Bandwidth r = cable_residual(state, static_cast<CableId>(c));
    auto [it, inserted] = best.emplace(key, r);
    if (!inserted) it->second = std::max(it->second, r);
  }
  std::vector<AbstractLink> out;
  for (const auto& [k, r] : best) out.push_back({k.first, k.second, r});
  return out;
}

void BiHierarchy::rebuild_fathers() {
  fathers_.assign(levels_.size(), {});
  for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
    const auto& lower = levels_[k + 1];
    for (const auto& isl : levels_[k].islands)
      fathers_[k].push_back(lower.island_of[static_cast<std::size_t>(isl.nodes.front())]);
  }
}

BiHierarchy build_bih(const NetworkState& state, std::vector<Bandwidth> betas) {
  if (betas.empty()) throw ValidationError("beta ladder is empty");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (betas[i].kbps <= 0) throw ValidationError("beta values must be positive");
    if (i > 0 && !(betas[i] < betas[i - 1]))
      throw ValidationError("beta values must be strictly descending without duplicates");
  }
  BiHierarchy h;
  h.betas_ = std::move(betas);
  for (Bandwidth b : h.betas_) h.levels_.push_back(build_level(state, b));
  h.rebuild_fathers();
  const auto& g = state.graph();
  h.synced_residual_.resize(g.cable_count());
  for (std::size_t c = 0; c < g.cable_count(); ++c)
    h.synced_residual_[c] = cable_residual(state, static_cast<CableId>(c));
  return h;
}

void update_bih(BiHierarchy& bih, const NetworkState& state, std::span<const LinkId> changed) {
  const auto& g = state.graph();
  if (bih.synced_residual_.size() != g.cable_count())
    throw ValidationError("hierarchy was built for a different graph");
  std::set<CableId> cables;
  for (LinkId l : changed) {
    if (!g.valid_link(l)) throw ValidationError(fmt::format("link {} is not in the graph", l));
    cables.insert(cable_of(l));
  }

  bool changed_any = false;
  for (std::size_t k = 0; k < bih.levels_.size(); ++k) {
    BiGraph& level = bih.levels_[k];
    const Bandwidth beta = level.beta;
    std::set<int> affected;
    for (CableId c : cables) {
      const bool before = bih.synced_residual_[static_cast<std::size_t>(c)] >= beta;
      const bool after = cable_residual(state, c) >= beta;
      if (before == after) continue;
      const Link& l = g.link(2 * c);
      affected.insert(level.island_of[static_cast<std::size_t>(l.src)]);
      affected.insert(level.island_of[static_cast<std::size_t>(l.dst)]);
    }
    if (affected.empty()) continue;
    changed_any = true;

    // Re-flood the nodes of affected islands; splits and merges both stay within them.
    std::vector<char> member(g.node_count(), 1);
    std::vector<NodeId> seeds;
    for (int id : affected)
      for (NodeId n : level.islands[static_cast<std::size_t>(id)].nodes) {
        member[static_cast<std::size_t>(n)] = 0;
        seeds.push_back(n);
      }
    std::sort(seeds.begin(), seeds.end());

    std::vector<BlockingIsland> next;
    for (auto& isl : level.islands)
      if (!affected.count(isl.id)) next.push_back(std::move(isl));
    for (NodeId n : seeds) {
      if (member[static_cast<std::size_t>(n)]) continue;
      next.push_back(flood(state, n, beta, member, nullptr));
    }
    level.islands = std::move(next);
    index_level(level, g.node_count());
  }

  for (CableId c : cables) bih.synced_residual_[static_cast<std::size_t>(c)] = cable_residual(state, c);
  if (changed_any) bih.rebuild_fathers();
}

std::optional<IslandRef> select_bi(const BiHierarchy& bih, NodeId src, NodeId dst, Bandwidth bandwidth,
                                   SelectionMode mode) {
  std::optional<IslandRef> pick;
  for (std::size_t k = 0; k < bih.level_count(); ++k) {
    const auto& lv = bih.level(k);
    if (lv.beta < bandwidth) continue;
    const int a = lv.island_of.at(static_cast<std::size_t>(src));
    if (a != lv.island_of.at(static_cast<std::size_t>(dst))) continue;
    pick = IslandRef{k, a};
    if (mode == SelectionMode::Highest) break;
  }
  return pick;
}

std::optional<IslandRef> select_bi(const BiHierarchy& bih, const Demand& demand, SelectionMode mode) {
  return select_bi(bih, demand.src, demand.dst, demand.bandwidth, mode);
}

bool structurally_equal(const BiHierarchy& a, const BiHierarchy& b) {
  if (a.betas() != b.betas() || a.level_count() != b.level_count()) return false;
  for (std::size_t k = 0; k < a.level_count(); ++k) {
    const auto& la = a.level(k);
    const auto& lb = b.level(k);
    if (la.island_of.size() != lb.island_of.size()) return false;
    auto partition = [](const BiGraph& lv) {
      std::vector<std::vector<NodeId>> p;
      for (const auto& isl : lv.islands) p.push_back(isl.nodes);
      std::sort(p.begin(), p.end());
      return p;
    };
    if (partition(la) != partition(lb)) return false;
    if (k + 1 < a.level_count()) {
      for (const auto& isl : la.islands) {
        const auto& fa = a.level(k + 1).islands.at(static_cast<std::size_t>(a.father(k, isl.id))).nodes;
        const int ib = lb.island_of[static_cast<std::size_t>(isl.nodes.front())];
        const auto& fb = b.level(k + 1).islands.at(static_cast<std::size_t>(b.father(k, ib))).nodes;
        if (fa != fb) return false;
      }
    }
  }
  return true;
}

namespace {

void dump_island(const BiHierarchy& bih, std::size_t k, int island, int depth, std::string& out) {
  const auto& lv = bih.level(k);
  const auto& isl = lv.islands.at(static_cast<std::size_t>(island));
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += fmt::format("beta={} island={} nodes=[", lv.beta.mbps(), isl.id);
  out += fmt::format("{}", fmt::join(isl.nodes, ","));
  out += "]\n";
  if (k == 0) return;
  for (const auto& child : bih.level(k - 1).islands)
    if (bih.father(k - 1, child.id) == island) dump_island(bih, k - 1, child.id, depth + 1, out);
}

}  // namespace

std::string dump_bih(const BiHierarchy& bih) {
  std::string out;
  if (bih.level_count() == 0) return out;
  const std::size_t root = bih.level_count() - 1;
  for (const auto& isl : bih.level(root).islands) dump_island(bih, root, isl.id, 0, out);
  return out;
}

}  // namespace vnfp
