#include "vnfp/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "vnfp/exact.hpp"

namespace vnfp {

namespace {

constexpr std::pair<Algorithm, std::string_view> kAlgorithms[] = {
    {Algorithm::BiLbi, "bi-lbi"}, {Algorithm::BiHbi, "bi-hbi"},           {Algorithm::Bc, "bc"},
    {Algorithm::ExactSmall, "exact-small"}, {Algorithm::LpExport, "lp-export"},
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  for (const auto& [k, name] : kAlgorithms)
    if (k == a) return name;
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (const auto& [k, n] : kAlgorithms)
    if (n == name) return k;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (seeds < 1) throw ValidationError("at least one seed is required");
  if (algorithms.empty()) throw ValidationError("no algorithm selected");
  if (betas_mbps.empty()) throw ValidationError("beta ladder is empty");
  for (std::size_t i = 0; i < betas_mbps.size(); ++i) {
    if (!(betas_mbps[i] > 0.0)) throw ValidationError("beta values must be positive");
    if (i > 0 && !(betas_mbps[i] < betas_mbps[i - 1]))
      throw ValidationError("beta values must be strictly descending");
  }
  if (chain_limit && *chain_limit == 0) throw ValidationError("chain limit must be at least 1");
  path.validate();
}

ExperimentConfig config_from_json(std::string_view text, ExperimentConfig cfg) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "topology") {
        cfg.topology = v.get<std::string>();
      } else if (key == "algo" || key == "algorithms") {
        cfg.algorithms.clear();
        auto names = v.is_array() ? v.get<std::vector<std::string>>() : std::vector<std::string>{v.get<std::string>()};
        for (const auto& n : names) {
          auto a = parse_algorithm(n);
          if (!a) throw ValidationError(fmt::format("unknown algorithm '{}'", n));
          cfg.algorithms.push_back(*a);
        }
      } else if (key == "demands") {
        cfg.demand_counts = v.get<std::vector<std::size_t>>();
      } else if (key == "seeds") {
        cfg.seeds = v.get<std::size_t>();
      } else if (key == "base_seed") {
        cfg.base_seed = v.get<std::uint64_t>();
      } else if (key == "betas") {
        cfg.betas_mbps = v.get<std::vector<double>>();
      } else if (key == "delta_w") {
        cfg.path.delta_w = v.get<double>();
      } else if (key == "chain_limit") {
        cfg.chain_limit = v.get<std::size_t>();
      } else if (key == "cross_check") {
        cfg.cross_check = v.get<bool>();
      } else if (key == "timing") {
        cfg.timing = v.get<bool>();
      } else if (key == "out") {
        cfg.out = v.get<std::string>();
      } else {
        throw ValidationError(fmt::format("unknown config key '{}'", key));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("bad config value: {}", e.what()));
  }
  return cfg;
}

NetworkGraph load_topology(std::string_view name_or_path) {
  if (name_or_path == "nobel-germany") return nobel_germany();
  return parse_topology(read_file(std::string(name_or_path)));
}

Stat mean_std(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return s;
}

bool MetricsReport::valid() const {
  for (const auto& r : runs)
    if (!r.violations.empty()) return false;
  return true;
}

namespace {

SolutionSet run_exact(NetworkState& state, const std::vector<Demand>& demands) {
  const MilpModel model = build_model(state.graph(), state.catalog(), demands);
  SolutionSet sol;
  const auto t0 = std::chrono::steady_clock::now();
  const ExactSolution ex = solve_exact_small(model);
  if (ex.feasible) realize(model, ex, state);
  sol.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const Demand& d : demands) {
    DemandOutcome o;
    o.demand = d.id;
    if (ex.feasible) {
      o.accepted = true;
      o.allocation = state.allocations().at(d.id);
    } else {
      o.reason = "instance infeasible as a whole";
    }
    sol.outcomes.push_back(std::move(o));
  }
  summarize(sol, state);
  return sol;
}

std::vector<std::string> check_run(const NetworkState& state, const SolutionSet& sol,
                                   const std::vector<Demand>& demands, bool cross_check) {
  auto bad = validate_state(state);
  std::vector<Demand> accepted;
  for (std::size_t i = 0; i < sol.outcomes.size(); ++i) {
    const auto& o = sol.outcomes[i];
    if (!o.accepted) continue;
    const Demand& d = demands[i];
    accepted.push_back(d);
    const Allocation& a = *o.allocation;
    if (a.function_map.size() != d.chain.size()) {
      bad.push_back(fmt::format("demand {}: chain length mismatch", d.id));
      continue;
    }
    for (std::size_t k = 0; k < d.chain.size(); ++k)
      if (a.function_map[k].function != d.chain[k]) bad.push_back(fmt::format("demand {}: chain order broken", d.id));
    if (a.total_delay_ms > d.delay_budget_ms + 1e-9)
      bad.push_back(fmt::format("demand {}: delay {} over budget {}", d.id, a.total_delay_ms, d.delay_budget_ms));
  }
  const double recomputed = total_power(state);
  if (!close(sol.total_power, recomputed))
    bad.push_back(fmt::format("reported power {} differs from recomputed {}", sol.total_power, recomputed));
  if (!close(sol.network_power + sol.pm_power, sol.total_power)) bad.push_back("power split does not add up");
  if (cross_check) {
    const MilpModel model = build_model(state.graph(), state.catalog(), accepted);
    const auto values = assignment_from_state(model, state);
    for (auto& v : validate_solution(model, values, recomputed)) bad.push_back("ilp " + v);
  }
  return bad;
}

std::filesystem::path lp_path(const std::string& out, std::size_t count, std::uint64_t seed) {
  std::filesystem::path base = out.empty() ? std::filesystem::path("model") : std::filesystem::path(out);
  const auto stem = base.stem().string();
  return base.parent_path() / fmt::format("{}_n{}_s{}.lp", stem, count, seed);
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const NetworkGraph graph = load_topology(cfg.topology);
  const Catalog catalog = cfg.chain_limit ? truncate_chains(default_catalog(), *cfg.chain_limit) : default_catalog();
  std::vector<Bandwidth> betas;
  for (double b : cfg.betas_mbps) betas.push_back(Bandwidth::from_mbps(b));

  for (Algorithm a : cfg.algorithms) {
    if (a != Algorithm::ExactSmall) continue;
    const ExactLimits lim;
    if (graph.node_count() > lim.max_nodes)
      throw ValidationError(fmt::format("exact-small handles at most {} nodes; the topology has {} (use lp-export)",
                                        lim.max_nodes, graph.node_count()));
    for (std::size_t c : cfg.demand_counts)
      if (c > lim.max_demands)
        throw ValidationError(fmt::format("exact-small handles at most {} demands per run", lim.max_demands));
    for (const auto& s : catalog.services)
      if (s.chain.size() > lim.max_chain)
        throw ValidationError(
            fmt::format("exact-small handles chains of at most {} functions; pass a chain limit", lim.max_chain));
  }

  MetricsReport report;
  for (Algorithm algo : cfg.algorithms) {
    for (std::size_t count : cfg.demand_counts) {
      std::vector<double> total, network, pm, delay, accept, runtime;
      for (std::size_t r = 0; r < cfg.seeds; ++r) {
        const std::uint64_t seed = cfg.base_seed + r;
        const auto demands = generate_demands(graph, count, catalog, seed);
        RunRecord rec{algo, count, seed, {}, {}, {}};
        if (algo == Algorithm::LpExport) {
          const auto path = lp_path(cfg.out, count, seed);
          std::ofstream f(path, std::ios::binary);
          if (!f) throw ValidationError(fmt::format("cannot write {}", path.string()));
          f << export_lp(build_model(graph, catalog, demands));
          rec.lp_path = path.string();
          report.lp_files.push_back(rec.lp_path);
          report.runs.push_back(std::move(rec));
          continue;
        }
        NetworkState state(graph, catalog);
        switch (algo) {
          case Algorithm::BiLbi:
          case Algorithm::BiHbi: {
            BiPlacementOptions opts;
            opts.betas = betas;
            opts.mode = algo == Algorithm::BiLbi ? SelectionMode::Lowest : SelectionMode::Highest;
            opts.path = cfg.path;
            rec.solution = place_all(state, demands, opts);
            break;
          }
          case Algorithm::Bc: rec.solution = bc_place_all(state, demands); break;
          case Algorithm::ExactSmall: rec.solution = run_exact(state, demands); break;
          case Algorithm::LpExport: break;
        }
        rec.violations = check_run(state, rec.solution, demands, cfg.cross_check);
        const auto& s = rec.solution;
        total.push_back(s.total_power);
        network.push_back(s.network_power);
        pm.push_back(s.pm_power);
        if (s.accepted() > 0) delay.push_back(s.mean_delay_ms);
        accept.push_back(100.0 * s.acceptance_rate);
        runtime.push_back(s.runtime_s);
        report.runs.push_back(std::move(rec));
      }
      if (algo == Algorithm::LpExport) continue;
      report.rows.push_back({algo, count, cfg.seeds, mean_std(total), mean_std(network), mean_std(pm),
                             mean_std(delay), mean_std(accept), mean_std(runtime)});
    }
  }
  return report;
}

std::string to_csv(const MetricsReport& report, bool timing) {
  std::string out =
      "algorithm,demands,runs,total_power_w_mean,total_power_w_std,network_power_w_mean,network_power_w_std,"
      "pm_power_w_mean,pm_power_w_std,delay_ms_mean,delay_ms_std,acceptance_pct_mean,acceptance_pct_std";
  if (timing) out += ",runtime_s_mean,runtime_s_std";
  out += '\n';
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{}", algorithm_name(r.algorithm), r.demands, r.runs);
    for (const Stat* s : {&r.total_power, &r.network_power, &r.pm_power, &r.delay_ms, &r.acceptance_pct})
      out += fmt::format(",{:.6f},{:.6f}", s->mean, s->std);
    if (timing) out += fmt::format(",{:.6f},{:.6f}", r.runtime_s.mean, r.runtime_s.std);
    out += '\n';
  }
  return out;
}

void emit_csv(const MetricsReport& report, const std::string& path, bool timing) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write {}", path));
  f << to_csv(report, timing);
  if (!f) throw Error(fmt::format("failed writing {}", path));
}

}  // namespace vnfp
