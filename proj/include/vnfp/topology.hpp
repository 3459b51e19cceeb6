#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vnfp/common.hpp"

namespace vnfp {

enum class Resource { Cpu = 0, Memory = 1, Storage = 2 };
inline constexpr std::size_t kResourceCount = 3;

// Integer resource amounts: CPU cores, memory and storage in deployment units.
// A PM capacity of zero for memory/storage means the resource is not modelled.
struct Resources {
  std::array<std::int64_t, kResourceCount> amount{};

  std::int64_t cores() const { return amount[0]; }
  std::int64_t operator[](Resource r) const { return amount[static_cast<std::size_t>(r)]; }
  std::int64_t& operator[](Resource r) { return amount[static_cast<std::size_t>(r)]; }

  static Resources cpu(std::int64_t cores) {
    Resources r;
    r.amount[0] = cores;
    return r;
  }
  bool fits_within(const Resources& cap) const {
    for (std::size_t i = 0; i < kResourceCount; ++i)
      if (amount[i] > cap.amount[i]) return false;
    return true;
  }
  friend Resources operator+(Resources a, const Resources& b) {
    for (std::size_t i = 0; i < kResourceCount; ++i) a.amount[i] += b.amount[i];
    return a;
  }
  friend Resources operator-(Resources a, const Resources& b) {
    for (std::size_t i = 0; i < kResourceCount; ++i) a.amount[i] -= b.amount[i];
    return a;
  }
  friend bool operator==(const Resources&, const Resources&) = default;
};

struct PmSpec {
  Resources capacity;
  friend bool operator==(const PmSpec&, const PmSpec&) = default;
};

struct NodeSpec {
  NodeId id = 0;
  std::string name;
  PmSpec pm;
  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct Link {
  NodeId src = 0;
  NodeId dst = 0;
  Bandwidth capacity;
  double delay_ms = 0.0;
  friend bool operator==(const Link&, const Link&) = default;
};

// One physical cable; the graph expands it into two directed links.
struct CableSpec {
  NodeId a = 0;
  NodeId b = 0;
  Bandwidth capacity;
  double delay_ms = 0.0;
};

struct PowerParams {
  double p_ss = 130.0;  // switch static, W
  double p_p = 1.0;     // per active port, W
  double p_sm = 150.0;  // PM idle, W
  double p_mm = 250.0;  // PM at full CPU, W

  void validate() const;
  friend bool operator==(const PowerParams&, const PowerParams&) = default;
};

// Immutable substrate network.
class NetworkGraph {
 public:
  NetworkGraph(std::vector<NodeSpec> nodes, const std::vector<CableSpec>& cables,
               PowerParams power = {});

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return links_.size(); }
  std::size_t cable_count() const { return links_.size() / 2; }

  const NodeSpec& node(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n)); }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const Link& link(LinkId l) const { return links_.at(static_cast<std::size_t>(l)); }
  const std::vector<Link>& links() const { return links_; }
  std::span<const LinkId> out_links(NodeId n) const { return out_.at(static_cast<std::size_t>(n)); }
  std::optional<LinkId> find_link(NodeId src, NodeId dst) const;
  bool valid_node(NodeId n) const { return n >= 0 && static_cast<std::size_t>(n) < nodes_.size(); }
  bool valid_link(LinkId l) const { return l >= 0 && static_cast<std::size_t>(l) < links_.size(); }

  const PowerParams& power() const { return power_; }
  double max_link_delay() const { return max_delay_; }

  friend bool operator==(const NetworkGraph& a, const NetworkGraph& b) {
    return a.nodes_ == b.nodes_ && a.links_ == b.links_ && a.power_ == b.power_;
  }

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  PowerParams power_;
  double max_delay_ = 0.0;
};

enum class FunctionKind { NAT = 0, FW, TM, WOC, VOC, IDPS };
inline constexpr std::size_t kFunctionKindCount = 6;

std::string_view function_name(FunctionKind f);
std::optional<FunctionKind> parse_function_kind(std::string_view name);

struct FunctionType {
  FunctionKind kind = FunctionKind::NAT;
  Resources demand;
  Bandwidth processing_capacity;
  double processing_delay_ms = 0.0;
  friend bool operator==(const FunctionType&, const FunctionType&) = default;
};

struct ServiceType {
  std::string name;
  std::vector<FunctionKind> chain;
  Bandwidth bandwidth;
  double delay_budget_ms = 0.0;
  double traffic_share = 0.0;
};

struct Catalog {
  std::vector<FunctionType> functions;  // indexed by FunctionKind
  std::vector<ServiceType> services;

  const FunctionType& function(FunctionKind f) const {
    return functions.at(static_cast<std::size_t>(f));
  }
  const ServiceType* find_service(std::string_view name) const;
  // Throws ValidationError when shares do not sum to one or an entry is malformed.
  void validate() const;
};

// Six functions (4 cores, 200 Mb/s, 10 ms) and the four evaluation services.
Catalog default_catalog();

// Propagation delay over optical fibre at 2e8 m/s, i.e. 5 us per km.
double link_delay_from_length(double length_km);

// Line format:
//   node <id> <cores> [name]
//   link <src> <dst> <capacity_mbps> <length>   length: "<x>km", "<x>ms" or bare km
// '#' starts a comment. Each link line is one cable; both directions are emitted.
NetworkGraph parse_topology(std::string_view text, PowerParams power = {});
std::string serialize_topology(const NetworkGraph& g);

// SNDlib Nobel Germany: 17 nodes, 26 cables at 1 Gb/s, 16-core PMs.
// Lengths are great-circle distances between the SNDlib node coordinates.
std::string_view nobel_germany_text();
NetworkGraph nobel_germany(PowerParams power = {});

}  // namespace vnfp
