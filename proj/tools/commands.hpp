#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isocl/scenario.hpp"
#include "isocl/synthetic.hpp"

namespace isocl::cli {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitDiverged = 4;

struct MetricsOptions {
  std::string input;
  bool class_geometry = false;
  double shrinkage = 0.05;
};

struct SynthOptions {
  ClusterSpec spec = ClusterSpec::reference();
  std::vector<double> rhos = {0, 2000, 5000, 10000, 20000};
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = ".";
  std::optional<std::string> dump;  // FeatureFile of the first (rho, seed) point
  unsigned threads = 1;
};

struct SimulateOptions {
  std::string config;
  std::string out_dir = ".";
  std::vector<double> lambda_iso;            // empty: use the config value
  std::vector<std::uint64_t> seeds;          // empty: use the config seed
  bool full_epochs = false;
  unsigned threads = 1;
};

/// Prints one JSON object with the isotropy and (optionally) class geometry.
int cmd_metrics(const MetricsOptions& opts, std::ostream& out, std::ostream& err);

/// Writes sweep.csv (per point) and sweep_mean.csv (seed-averaged).
int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);

/// Writes metrics.ndjson (one object per experience and run) and summary.csv.
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);

/// Per-point rows `rho,seed,iso_entropy,iso_score`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
/// Averaged rows `rho,iso_entropy_mean,iso_score_mean,n_seeds`.
void write_sweep_mean_csv(std::ostream& out, const std::vector<SweepMean>& means);

/// One NDJSON line per experience record.
void write_metrics_ndjson(std::ostream& out, const ScenarioConfig& cfg, const MetricsLog& log);

inline constexpr const char* kSummaryHeader =
    "scenario,loss,lambda_iso,seed,final_iso_score,final_iso_entropy,final_ratio,final_accuracy";
void write_summary_row(std::ostream& out, const ScenarioConfig& cfg, const MetricsLog& log);

}  // namespace isocl::cli
