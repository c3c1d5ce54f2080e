#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermal_designs/analysis.hpp"
#include "thermal_designs/csv.hpp"

namespace thermal_designs {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitNumeric = 4;

struct BetaRange {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.1;
};

// One JSON file per run:
//   { "ensemble": {...}, "t": 2,
//     "beta_grid": {"start": 0, "stop": 3, "step": 0.05},
//     "estimators": ["trace_norm", "sym_overlap", "cycle", "bound"],
//     "output": "sweep.csv", "threads": 1, "memory_cap": 4096,
//     "t_list": [4, 8], "epsilons": [0.2, 0.4], "bins": 50 }
// Only "ensemble" is always required; each command checks what it needs.
struct RunConfig {
    EnsembleSpec ensemble;
    std::optional<int> t;
    std::optional<BetaRange> beta_grid;
    std::optional<EstimatorSet> estimators;  // default: every feasible estimator
    std::optional<std::filesystem::path> output;
    std::optional<int> threads;
    long long memory_cap = kDefaultMemoryCap;
    std::vector<int> t_list;
    std::vector<double> epsilons;
    std::optional<int> bins;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

// Flag > THERMAL_DESIGNS_THREADS > config > 1.
int resolve_threads(std::optional<int> flag, const RunConfig& config);

// Estimators to compute: the configured set (checked against the cap, throws
// CapacityError) or every feasible one.
EstimatorSet resolve_estimators(const RunConfig& config);

// Human-readable feasibility line for (D, t) under the cap.
std::string feasibility_report(long long D, int t, long long memory_cap);

// CSV: header beta,trace_norm,sym_overlap,cycle,bound,stderr, one row per
// grid point, trailing '#' metadata lines with the full config and seed.
CsvTable sweep_table(const SweepResult& sweep, const RunConfig& config);
SweepResult cmd_sweep(const RunConfig& config, int threads);

// Derivative of every estimator column of a sweep CSV plus kink metadata.
CsvTable derivative_table(const CsvTable& sweep_csv);
void cmd_derivative(const std::filesystem::path& input, const std::filesystem::path& output);

// Rows (t, epsilon, beta_star, temperature); global ensembles only.
CsvTable threshold_table(const RunConfig& config, const std::vector<int>& t_list, const std::vector<double>& epsilons,
                         int threads);
void cmd_threshold(const RunConfig& config, const std::vector<int>& t_list, const std::vector<double>& epsilons,
                   const std::filesystem::path& output, int threads);

// Rows (bin_center, density, reference_density) plus kurtosis metadata.
CsvTable dos_table(const RunConfig& config, int bins, int threads);
void cmd_dos(const RunConfig& config, int bins, const std::filesystem::path& output, int threads);

// Reduced-scale invariant self-test; one PASS/FAIL line per check. Returns
// the number of failed checks.
int cmd_check(std::ostream& log, int threads);

}  // namespace thermal_designs
