#include "vnfp/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>

namespace vnfp {

void PowerParams::validate() const {
  if (!(p_ss > 0.0)) throw ValidationError("p_ss must be positive");
  if (!(p_p >= 0.0)) throw ValidationError("p_p must be non-negative");
  if (!(p_sm > 0.0 && p_sm < p_mm)) throw ValidationError("need 0 < p_sm < p_mm");
  if (!std::isfinite(p_mm)) throw ValidationError("p_mm must be finite");
}

NetworkGraph::NetworkGraph(std::vector<NodeSpec> nodes, const std::vector<CableSpec>& cables,
                           PowerParams power)
    : nodes_(std::move(nodes)), power_(power) {
  power_.validate();
  if (nodes_.empty()) throw ValidationError("topology has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<NodeId>(i))
      throw ValidationError(fmt::format("node ids must be dense 0..{}; found {} at position {}",
                                        nodes_.size() - 1, nodes_[i].id, i));
    const auto& cap = nodes_[i].pm.capacity;
    if (cap.cores() <= 0) throw ValidationError(fmt::format("node {} has no CPU cores", i));
    for (auto a : cap.amount)
      if (a < 0) throw ValidationError(fmt::format("node {} has negative capacity", i));
  }

  out_.resize(nodes_.size());
  links_.reserve(cables.size() * 2);
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& c : cables) {
    if (!valid_node(c.a) || !valid_node(c.b))
      throw ValidationError(fmt::format("cable {}-{} references an unknown node", c.a, c.b));
    if (c.a == c.b) throw ValidationError(fmt::format("self-loop at node {}", c.a));
    if (c.capacity.kbps <= 0)
      throw ValidationError(fmt::format("cable {}-{} needs positive capacity", c.a, c.b));
    if (!std::isfinite(c.delay_ms) || c.delay_ms < 0.0)
      throw ValidationError(fmt::format("cable {}-{} needs a finite non-negative delay", c.a, c.b));
    if (!seen.insert(std::minmax(c.a, c.b)).second)
      throw ValidationError(fmt::format("duplicate cable between {} and {}", c.a, c.b));

    const auto id = static_cast<LinkId>(links_.size());
    links_.push_back(Link{c.a, c.b, c.capacity, c.delay_ms});
    links_.push_back(Link{c.b, c.a, c.capacity, c.delay_ms});
    out_[static_cast<std::size_t>(c.a)].push_back(id);
    out_[static_cast<std::size_t>(c.b)].push_back(id + 1);
    max_delay_ = std::max(max_delay_, c.delay_ms);
  }
}

std::optional<LinkId> NetworkGraph::find_link(NodeId src, NodeId dst) const {
  if (!valid_node(src)) return std::nullopt;
  for (LinkId l : out_links(src))
    if (links_[static_cast<std::size_t>(l)].dst == dst) return l;
  return std::nullopt;
}

namespace {

constexpr std::array<std::string_view, kFunctionKindCount> kFunctionNames = {
    "NAT", "FW", "TM", "WOC", "VOC", "IDPS"};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  // from_chars(double) is unavailable on some older libstdc++ builds.
  std::string tmp(s);
  std::istringstream in(tmp);
  in.imbue(std::locale::classic());
  in >> out;
  return !in.fail() && in.peek() == std::char_traits<char>::eof() && std::isfinite(out);
}

}  // namespace

std::string_view function_name(FunctionKind f) {
  return kFunctionNames.at(static_cast<std::size_t>(f));
}

std::optional<FunctionKind> parse_function_kind(std::string_view name) {
  for (std::size_t i = 0; i < kFunctionNames.size(); ++i)
    if (kFunctionNames[i] == name) return static_cast<FunctionKind>(i);
  return std::nullopt;
}

const ServiceType* Catalog::find_service(std::string_view name) const {
  for (const auto& s : services)
    if (s.name == name) return &s;
  return nullptr;
}

void Catalog::validate() const {
  if (functions.size() != kFunctionKindCount)
    throw ValidationError("catalog must define every function kind");
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const auto& f = functions[i];
    if (static_cast<std::size_t>(f.kind) != i)
      throw ValidationError("catalog functions must be ordered by kind");
    if (f.processing_capacity.kbps <= 0)
      throw ValidationError(fmt::format("{} needs positive processing capacity", function_name(f.kind)));
    if (f.demand.cores() <= 0)
      throw ValidationError(fmt::format("{} needs at least one core", function_name(f.kind)));
    if (f.processing_delay_ms < 0.0)
      throw ValidationError(fmt::format("{} has negative processing delay", function_name(f.kind)));
  }
  if (services.empty()) throw ValidationError("catalog has no services");
  double share = 0.0;
  for (const auto& s : services) {
    if (s.chain.empty()) throw ValidationError(fmt::format("service {} has an empty chain", s.name));
    if (s.bandwidth.kbps <= 0) throw ValidationError(fmt::format("service {} has no bandwidth", s.name));
    if (s.traffic_share < 0.0) throw ValidationError(fmt::format("service {} has negative share", s.name));
    if (s.name.empty() || s.name.find_first_of(" \t") != std::string::npos)
      throw ValidationError("service names must be non-empty single tokens");
    share += s.traffic_share;
  }
  if (std::abs(share - 1.0) > 1e-9)
    throw ValidationError(fmt::format("service traffic shares sum to {}, expected 1", share));
}

Catalog default_catalog() {
  using enum FunctionKind;
  Catalog c;
  for (std::size_t i = 0; i < kFunctionKindCount; ++i)
    c.functions.push_back(FunctionType{static_cast<FunctionKind>(i), Resources::cpu(4),
                                       Bandwidth::from_mbps(200.0), 10.0});
  c.services = {
      {"WebService", {NAT, FW, TM, WOC, IDPS}, Bandwidth::from_kbps(100), 500.0, 0.182},
      {"VoIP", {NAT, FW, TM, FW, NAT}, Bandwidth::from_kbps(64), 100.0, 0.118},
      {"VideoStreaming", {NAT, FW, TM, VOC, IDPS}, Bandwidth::from_kbps(4000), 100.0, 0.699},
      // Listed as NAF-FW-VOC-WOC-IDPS in the source table; NAF is read as NAT.
      {"OnlineGaming", {NAT, FW, VOC, WOC, IDPS}, Bandwidth::from_kbps(50), 60.0, 0.001},
  };
  return c;
}

double link_delay_from_length(double length_km) {
  if (!(length_km >= 0.0) || !std::isfinite(length_km))
    throw ValidationError("link length must be finite and non-negative");
  return length_km * 0.005;
}

NetworkGraph parse_topology(std::string_view text, PowerParams power) {
  std::vector<NodeSpec> nodes;
  std::vector<CableSpec> cables;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = split_ws(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (tok[0] == "node") {
      if (tok.size() != 3 && tok.size() != 4)
        throw ParseError(line_no, "expected 'node <id> <cores> [name]'");
      int id = 0;
      std::int64_t cores = 0;
      if (!parse_number(tok[1], id)) throw ParseError(line_no, "bad node id");
      if (!parse_number(tok[2], cores) || cores <= 0) throw ParseError(line_no, "bad core count");
      NodeSpec n{id, tok.size() == 4 ? std::string(tok[3]) : std::string(), PmSpec{Resources::cpu(cores)}};
      nodes.push_back(std::move(n));
    } else if (tok[0] == "link") {
      if (tok.size() != 5)
        throw ParseError(line_no, "expected 'link <src> <dst> <capacity_mbps> <length>'");
      CableSpec c;
      double cap = 0.0;
      if (!parse_number(tok[1], c.a) || !parse_number(tok[2], c.b))
        throw ParseError(line_no, "bad link endpoint");
      if (!parse_double(tok[3], cap) || cap <= 0.0) throw ParseError(line_no, "bad capacity");
      c.capacity = Bandwidth::from_mbps(cap);
      std::string_view len = tok[4];
      bool is_delay = false;
      if (len.size() > 2 && len.substr(len.size() - 2) == "ms") {
        is_delay = true;
        len.remove_suffix(2);
      } else if (len.size() > 2 && len.substr(len.size() - 2) == "km") {
        len.remove_suffix(2);
      }
      double v = 0.0;
      if (!parse_double(len, v) || v < 0.0) throw ParseError(line_no, "bad length/delay");
      c.delay_ms = is_delay ? v : link_delay_from_length(v);
      cables.push_back(c);
    } else {
      throw ParseError(line_no, fmt::format("unknown directive '{}'", tok[0]));
    }
    if (end == text.size()) break;
  }

  std::sort(nodes.begin(), nodes.end(), [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
  return NetworkGraph(std::move(nodes), cables, power);
}

std::string serialize_topology(const NetworkGraph& g) {
  std::string out;
  for (const auto& n : g.nodes()) {
    out += fmt::format("node {} {}", n.id, n.pm.capacity.cores());
    if (!n.name.empty()) out += fmt::format(" {}", n.name);
    out += '\n';
  }
  for (std::size_t c = 0; c < g.cable_count(); ++c) {
    const Link& l = g.link(static_cast<LinkId>(2 * c));
    out += fmt::format("link {} {} {} {}ms\n", l.src, l.dst, l.capacity.mbps(), l.delay_ms);
  }
  return out;
}

NetworkGraph nobel_germany(PowerParams power) { return parse_topology(nobel_germany_text(), power); }

}  // namespace vnfp
