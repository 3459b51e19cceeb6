#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vnfp/netstate.hpp"

namespace vnfp {

// Residual used for island membership: the weaker direction of the cable.
Bandwidth cable_residual(const NetworkState& state, CableId c);

struct BlockingIsland {
  int id = 0;
  Bandwidth beta;
  std::vector<NodeId> nodes;            // sorted
  std::vector<LinkId> internal_links;   // sorted; both directions of qualifying cables

  bool contains(NodeId n) const;
  friend bool operator==(const BlockingIsland&, const BlockingIsland&) = default;
};

// The beta-BI graph: islands partition the nodes. Island ids are their index,
// ordered by smallest member node, so equal partitions have equal ids.
struct BiGraph {
  Bandwidth beta;
  std::vector<BlockingIsland> islands;
  std::vector<int> island_of;  // node -> island id

  friend bool operator==(const BiGraph&, const BiGraph&) = default;
};

struct AbstractLink {
  int a = 0;  // island ids, a < b
  int b = 0;
  Bandwidth max_residual;
};

// Inter-island cables of one level, collapsed per island pair to the widest one.
std::vector<AbstractLink> abstract_links(const BiGraph& level, const NetworkState& state);

struct SearchStats {
  std::size_t link_visits = 0;
};

// Flood from `node` over cables with residual >= beta. Each directed link is
// examined at most once.
BlockingIsland beta_bi_search(const NetworkState& state, NodeId node, Bandwidth beta,
                              SearchStats* stats = nullptr);

class BiHierarchy {
 public:
  const std::vector<Bandwidth>& betas() const { return betas_; }
  std::size_t level_count() const { return levels_.size(); }
  const BiGraph& level(std::size_t k) const { return levels_.at(k); }
  const BlockingIsland& island_at(std::size_t k, NodeId n) const {
    const auto& lv = levels_.at(k);
    return lv.islands.at(static_cast<std::size_t>(lv.island_of.at(static_cast<std::size_t>(n))));
  }
  // Island at level k+1 (next lower beta) containing island `island` of level k.
  int father(std::size_t k, int island) const {
    return fathers_.at(k).at(static_cast<std::size_t>(island));
  }

  friend bool operator==(const BiHierarchy& a, const BiHierarchy& b) {
    return a.betas_ == b.betas_ && a.levels_ == b.levels_ && a.fathers_ == b.fathers_;
  }

 private:
  friend BiHierarchy build_bih(const NetworkState&, std::vector<Bandwidth>);
  friend void update_bih(BiHierarchy&, const NetworkState&, std::span<const LinkId>);
  void rebuild_fathers();

  std::vector<Bandwidth> betas_;  // strictly descending
  std::vector<BiGraph> levels_;
  std::vector<std::vector<int>> fathers_;
  std::vector<Bandwidth> synced_residual_;  // per cable, as of last build/update
};

// Throws ValidationError unless betas are strictly descending and positive.
BiHierarchy build_bih(const NetworkState& state, std::vector<Bandwidth> betas);

// Re-synchronise after the residuals of `changed` links moved. Only islands
// with an endpoint of a cable that crossed a level's beta are recomputed.
void update_bih(BiHierarchy& bih, const NetworkState& state, std::span<const LinkId> changed);
inline void update_on_allocation(BiHierarchy& bih, const NetworkState& state, std::span<const LinkId> route) {
  update_bih(bih, state, route);
}
inline void update_on_release(BiHierarchy& bih, const NetworkState& state, std::span<const LinkId> route) {
  update_bih(bih, state, route);
}

enum class SelectionMode { Highest, Lowest };

struct IslandRef {
  std::size_t level = 0;
  int island = 0;
};

// Among levels with beta >= bandwidth whose island holds both endpoints, the
// highest-beta (Highest) or lowest-beta (Lowest) one.
std::optional<IslandRef> select_bi(const BiHierarchy& bih, NodeId src, NodeId dst, Bandwidth bandwidth,
                                   SelectionMode mode);
std::optional<IslandRef> select_bi(const BiHierarchy& bih, const Demand& demand, SelectionMode mode);

// Same betas, same node partition per level, same father relation; island ids ignored.
bool structurally_equal(const BiHierarchy& a, const BiHierarchy& b);

// Indented tree, one line per island: level beta, island id, sorted nodes.
std::string dump_bih(const BiHierarchy& bih);

}  // namespace vnfp
