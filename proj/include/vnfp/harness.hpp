#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vnfp/placement.hpp"

namespace vnfp {

enum class Algorithm { BiLbi, BiHbi, Bc, ExactSmall, LpExport };
std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct ExperimentConfig {
  std::string topology = "nobel-germany";  // builtin name or file path
  std::vector<Algorithm> algorithms{Algorithm::BiLbi};
  std::vector<std::size_t> demand_counts{10};
  std::size_t seeds = 30;
  std::uint64_t base_seed = 1;  // run r uses base_seed + r
  std::vector<double> betas_mbps{900, 700, 500, 300};
  PathSearchConfig path;
  std::optional<std::size_t> chain_limit;
  bool cross_check = true;  // also check accepted allocations against the ILP rows
  bool timing = false;      // add runtime columns to the CSV
  std::string out;          // CSV path; LP files are written next to it

  void validate() const;
};

// Keys mirror the CLI flags: topology, algo (string or list), demands, seeds,
// base_seed, betas, delta_w, chain_limit, cross_check, timing, out.
ExperimentConfig config_from_json(std::string_view text, ExperimentConfig base = {});

NetworkGraph load_topology(std::string_view name_or_path);

struct RunRecord {
  Algorithm algorithm = Algorithm::BiLbi;
  std::size_t demands = 0;
  std::uint64_t seed = 0;
  SolutionSet solution;
  std::vector<std::string> violations;  // empty when the final state checks out
  std::string lp_path;                  // lp-export only
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single run
};
Stat mean_std(const std::vector<double>& xs);

struct MetricsRow {
  Algorithm algorithm = Algorithm::BiLbi;
  std::size_t demands = 0;
  std::size_t runs = 0;
  Stat total_power;
  Stat network_power;
  Stat pm_power;
  Stat delay_ms;        // over runs with at least one accepted demand
  Stat acceptance_pct;
  Stat runtime_s;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;     // lp-export produces no rows
  std::vector<RunRecord> runs;
  std::vector<std::string> lp_files;

  bool valid() const;
};

// Throws ValidationError for a bad config before any run starts.
MetricsReport run_experiment(const ExperimentConfig& cfg);

std::string to_csv(const MetricsReport& report, bool timing = false);
void emit_csv(const MetricsReport& report, const std::string& path, bool timing = false);

}  // namespace vnfp
