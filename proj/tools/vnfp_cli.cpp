// vnfp: run placement experiments, generate demand files, export the ILP.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vnfp/exact.hpp"
#include "vnfp/harness.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vnfp::ValidationError(fmt::format("cannot open {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vnfp::Error(fmt::format("cannot write {}", path));
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-aware VNF chain placement"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment and write per-(algorithm, count) metrics as CSV");
  std::string config_path, topology, algos, counts, betas;
  std::size_t seeds = 0;
  std::uint64_t base_seed = 0;
  double delta_w = 0.0;
  std::size_t chain_limit = 0;
  std::string out;
  bool timing = false, no_cross_check = false;
  run->add_option("--config", config_path, "JSON file mirroring the flags below");
  run->add_option("--topology", topology, "Topology file or 'nobel-germany'");
  run->add_option("--algo", algos, "Comma list of bi-lbi, bi-hbi, bc, exact-small, lp-export");
  run->add_option("--demands", counts, "Comma list of demand counts");
  run->add_option("--seeds", seeds, "Repetitions per cell");
  run->add_option("--base-seed", base_seed, "Seed of the first repetition");
  run->add_option("--betas", betas, "Beta ladder in Mb/s, strictly descending");
  run->add_option("--delta-w", delta_w, "Weight step of the path search");
  run->add_option("--chain-limit", chain_limit, "Cut every service chain to this many functions");
  run->add_option("--out", out, "CSV output path ('-' for stdout)");
  run->add_flag("--timing", timing, "Add runtime columns (makes the CSV run-dependent)");
  run->add_flag("--no-cross-check", no_cross_check, "Skip the ILP row check of accepted allocations");

  // demands
  auto* dem = app.add_subcommand("demands", "Generate a demand file");
  std::string dem_topology = "nobel-germany", dem_out;
  std::size_t dem_count = 10;
  std::uint64_t dem_seed = 1;
  dem->add_option("--topology", dem_topology, "Topology file or 'nobel-germany'");
  dem->add_option("-n,--count", dem_count, "Number of demands");
  dem->add_option("--seed", dem_seed, "Generator seed");
  dem->add_option("--out", dem_out, "Output path (stdout when omitted)");

  // lp
  auto* lp = app.add_subcommand("lp", "Export the placement ILP of a topology and demand file");
  std::string lp_topology = "nobel-germany", lp_demands, lp_out;
  lp->add_option("--topology", lp_topology, "Topology file or 'nobel-germany'");
  lp->add_option("--demands", lp_demands, "Demand file")->required();
  lp->add_option("--out", lp_out, "Output path (stdout when omitted)");

  // topology
  auto* topo = app.add_subcommand("topology", "Print a topology in the text format");
  std::string topo_name = "nobel-germany";
  topo->add_option("name", topo_name, "Topology file or 'nobel-germany'");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      vnfp::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = vnfp::config_from_json(slurp(config_path), cfg);
      if (run->count("--topology")) cfg.topology = topology;
      if (run->count("--algo")) {
        cfg.algorithms.clear();
        for (const auto& name : CLI::detail::split(algos, ',')) {
          auto a = vnfp::parse_algorithm(name);
          if (!a) throw vnfp::ValidationError(fmt::format("unknown algorithm '{}'", name));
          cfg.algorithms.push_back(*a);
        }
      }
      if (run->count("--demands")) {
        cfg.demand_counts.clear();
        for (const auto& c : CLI::detail::split(counts, ',')) cfg.demand_counts.push_back(std::stoul(c));
      }
      if (run->count("--seeds")) cfg.seeds = seeds;
      if (run->count("--base-seed")) cfg.base_seed = base_seed;
      if (run->count("--betas")) {
        cfg.betas_mbps.clear();
        for (const auto& b : CLI::detail::split(betas, ',')) cfg.betas_mbps.push_back(std::stod(b));
      }
      if (run->count("--delta-w")) cfg.path.delta_w = delta_w;
      if (run->count("--chain-limit")) cfg.chain_limit = chain_limit;
      if (run->count("--out")) cfg.out = out;
      if (timing) cfg.timing = true;
      if (no_cross_check) cfg.cross_check = false;

      const auto report = vnfp::run_experiment(cfg);
      for (const auto& r : report.runs)
        for (const auto& v : r.violations)
          std::cerr << fmt::format("{} n={} seed={}: {}\n", vnfp::algorithm_name(r.algorithm), r.demands, r.seed, v);
      for (const auto& f : report.lp_files) std::cerr << "wrote " << f << '\n';
      if (!report.rows.empty() || cfg.out.empty() || cfg.out == "-")
        write_or_print(cfg.out, vnfp::to_csv(report, cfg.timing));
      return report.valid() ? 0 : 3;
    }
    if (*dem) {
      const auto graph = vnfp::load_topology(dem_topology);
      const auto demands = vnfp::generate_demands(graph, dem_count, vnfp::default_catalog(), dem_seed);
      write_or_print(dem_out, vnfp::write_demands(demands));
      return 0;
    }
    if (*lp) {
      const auto graph = vnfp::load_topology(lp_topology);
      const auto catalog = vnfp::default_catalog();
      auto demands = vnfp::read_demands(slurp(lp_demands), catalog, &graph);
      write_or_print(lp_out, vnfp::export_lp(vnfp::build_model(graph, catalog, std::move(demands))));
      return 0;
    }
    if (*topo) {
      std::cout << vnfp::serialize_topology(vnfp::load_topology(topo_name));
      return 0;
    }
  } catch (const vnfp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const vnfp::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
