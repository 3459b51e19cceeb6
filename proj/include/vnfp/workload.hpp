#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vnfp/common.hpp"
#include "vnfp/topology.hpp"

namespace vnfp {

// Demand g = (src, dst, delay budget, bandwidth, chain).
struct Demand {
  DemandId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  std::string service;
  Bandwidth bandwidth;
  double delay_budget_ms = 0.0;
  std::vector<FunctionKind> chain;

  friend bool operator==(const Demand&, const Demand&) = default;
};

Demand make_demand(DemandId id, NodeId src, NodeId dst, const ServiceType& service);

// n demands with uniform ordered (src, dst), src != dst, and service drawn by
// traffic share. The stream is std::mt19937_64 seeded with `seed`; bounded
// integers use rejection sampling on the raw 64-bit words and uniform reals use
// the top 53 bits, so sequences are reproducible across platforms.
std::vector<Demand> generate_demands(const NetworkGraph& graph, std::size_t n, const Catalog& catalog,
                                     std::uint64_t seed);

// Line-delimited "id src dst service_name"; '#' comments allowed.
std::string write_demands(const std::vector<Demand>& demands);
std::vector<Demand> read_demands(std::string_view text, const Catalog& catalog,
                                 const NetworkGraph* graph = nullptr);

// Copy of the catalog with every service chain cut to at most `max_len` functions.
Catalog truncate_chains(Catalog catalog, std::size_t max_len);

}  // namespace vnfp
