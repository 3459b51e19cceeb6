#include "vnfp/workload.hpp"

#include <charconv>
#include <limits>
#include <random>

#include <fmt/format.h>

namespace vnfp {

namespace {

// Unbiased draw in [0, bound) from raw 64-bit output.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

double unit_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Demand make_demand(DemandId id, NodeId src, NodeId dst, const ServiceType& service) {
  return Demand{id, src, dst, service.name, service.bandwidth, service.delay_budget_ms, service.chain};
}

std::vector<Demand> generate_demands(const NetworkGraph& graph, std::size_t n, const Catalog& catalog,
                                     std::uint64_t seed) {
  catalog.validate();
  const std::uint64_t nodes = graph.node_count();
  if (nodes < 2) throw ValidationError("demand generation needs at least two nodes");

  std::mt19937_64 rng(seed);
  std::vector<Demand> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t pair = bounded(rng, nodes * (nodes - 1));
    const auto src = static_cast<NodeId>(pair / (nodes - 1));
    auto dst = static_cast<NodeId>(pair % (nodes - 1));
    if (dst >= src) ++dst;

    const double u = unit_real(rng);
    std::size_t pick = catalog.services.size() - 1;
    double acc = 0.0;
    for (std::size_t s = 0; s < catalog.services.size(); ++s) {
      acc += catalog.services[s].traffic_share;
      if (u < acc) {
        pick = s;
        break;
      }
    }
    out.push_back(make_demand(static_cast<DemandId>(i), src, dst, catalog.services[pick]));
  }
  return out;
}

std::string write_demands(const std::vector<Demand>& demands) {
  std::string out = "# id src dst service\n";
  for (const auto& d : demands) out += fmt::format("{} {} {} {}\n", d.id, d.src, d.dst, d.service);
  return out;
}

std::vector<Demand> read_demands(std::string_view text, const Catalog& catalog, const NetworkGraph* graph) {
  std::vector<Demand> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::string_view> tok;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      if (j > i) tok.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tok.empty()) continue;
    if (tok.size() != 4) throw ParseError(line_no, "expected 'id src dst service'");

    int id = 0, src = 0, dst = 0;
    auto num = [&](std::string_view s, int& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError(line_no, "bad integer");
    };
    num(tok[0], id);
    num(tok[1], src);
    num(tok[2], dst);
    const ServiceType* svc = catalog.find_service(tok[3]);
    if (!svc) throw ParseError(line_no, fmt::format("unknown service '{}'", tok[3]));
    if (src == dst) throw ParseError(line_no, "source equals destination");
    if (graph && (!graph->valid_node(src) || !graph->valid_node(dst)))
      throw ParseError(line_no, "endpoint not in topology");
    out.push_back(make_demand(id, src, dst, *svc));
  }
  return out;
}

Catalog truncate_chains(Catalog catalog, std::size_t max_len) {
  if (max_len == 0) throw ValidationError("chain limit must be at least 1");
  for (auto& s : catalog.services)
    if (s.chain.size() > max_len) s.chain.resize(max_len);
  return catalog;
}

}  // namespace vnfp
