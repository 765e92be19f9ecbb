#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fanet/simulation.hpp"

namespace fanet::cli {

inline constexpr std::string_view kVersion = "0.3.0";

enum ExitCode : int { ok = 0, config_error = 2, io_error = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat JSON object, one key per setting. Unknown keys are rejected. Relative
// trace paths resolve against base_dir. Throws ConfigError naming the field.
ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);  // IoError if unreadable

// "w3": w3 = 0, 0.1, ..., 1 with w1 = w2.
// "w1w2:<w3>": w3 fixed, w1 = 0, 0.1, ..., 1 - w3, w2 = 1 - w1 - w3.
// "a,b,c;d,e,f": explicit points.
std::vector<Weights> parse_grid(std::string_view spec);  // throws ConfigError

std::vector<RouterKind> parse_router_list(std::string_view list, const ScenarioConfig& base);

// Replication r runs with seed base + r. Cells are independent and are
// distributed over `jobs` threads; results come back in replication order.
std::vector<MetricsReport> run_replications(const ScenarioConfig& cfg, std::uint64_t base_seed,
                                            unsigned jobs);
std::vector<PredictionRun> run_predictions(const ScenarioConfig& cfg, std::uint64_t base_seed,
                                           unsigned jobs);

struct ResultRow {
  std::string router;
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::size_t flows = 0;
  double success_rate = 0.0;
  double mean_throughput_mbps = 0.0;
  double weighted_throughput_mbps = 0.0;
  double mean_fct = 0.0;
  std::optional<double> mean_fct_success;
  std::uint64_t reroutes = 0;

  bool operator==(const ResultRow&) const = default;
};

std::vector<ResultRow> to_rows(const std::vector<MetricsReport>& reports);
void write_rows(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_rows(std::istream& in);  // throws IoError on malformed input
void write_flow_rows(std::ostream& out, const std::vector<MetricsReport>& reports);

// Mean of every metric over replications, one entry per weight point, in
// grid order.
struct SweepPoint {
  Weights weights{1.0, 0.0, 0.0};
  double success_rate = 0.0;
  double weighted_throughput_mbps = 0.0;
  double mean_fct = 0.0;
};

std::vector<SweepPoint> aggregate_sweep(const std::vector<Weights>& grid,
                                        const std::vector<ResultRow>& rows);

// Overall winner: lowest mean FCT, then highest success rate, then smallest w3.
std::size_t best_point(const std::vector<SweepPoint>& points);

struct SweepOutcome {
  std::vector<ResultRow> rows;
  std::vector<SweepPoint> points;
  std::size_t best = 0;
};

// One lb_opar lane per grid point, all lanes sharing each replication's
// mobility and flows.
SweepOutcome sweep_weights(ScenarioConfig cfg, const std::vector<Weights>& grid,
                           std::uint64_t base_seed, unsigned jobs);

// Whole command line: run|sweep-weights|predict-eval with their flags.
int main(int argc, char** argv);

}  // namespace fanet::cli
