#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isocl/encoder.hpp"
#include "isocl/geometry.hpp"
#include "isocl/objectives.hpp"
#include "isocl/probe.hpp"
#include "isocl/replay_buffer.hpp"
#include "isocl/schedule.hpp"
#include "isocl/synthetic.hpp"

namespace isocl {

/// What one optimization step saw. Labels are per source sample, not per view.
struct BatchRecord {
  int experience = 0;
  int epoch = 0;
  std::size_t step = 0;
  std::vector<int> labels;
  std::vector<bool> current;
};

using BatchObserver = std::function<void(const BatchRecord&)>;

struct TrainContext {
  LossVariant variant = LossVariant::Co2L;
  LossConfig loss;
  double learning_rate = 0.5;
  int batch_size = 512;
  double augment_std = 0.1;
  int experience_index = 0;
  std::size_t step_offset = 0;  // global index of the first step, for diagnostics
  std::uint64_t seed = 0;
  const Encoder* past_model = nullptr;          // frozen; required for distillation terms
  const PrototypeSet* past_prototypes = nullptr;
  BatchObserver observer;
};

struct TrainResult {
  Encoder model;
  std::vector<double> loss_trace;  // mean step loss per epoch
  std::size_t steps = 0;
};

/// Runs entry.epochs epochs of plain SGD on current data plus the buffer.
/// Each mini-batch is expanded into two views by additive Gaussian input
/// noise. Distillation terms are active only when a past model is supplied.
/// Throws TrainingDiverged on a non-finite loss.
TrainResult train_experience(const Encoder& model, const FeatureMatrix& experience_data,
                             const ReplayBuffer& buffer, const Experience& entry,
                             const TrainContext& ctx);

struct ScenarioConfig {
  std::string scenario = "20x5";  // preset, fraction list, or "centralized"
  LossVariant loss = LossVariant::Co2L;
  LossConfig loss_cfg = [] {
    LossConfig c;
    c.reduction = Reduction::Mean;
    return c;
  }();

  ClusterSpec data = [] {
    ClusterSpec s;
    s.num_clusters = 10;
    s.dimension = 16;
    s.alpha = 3.0;
    s.sigma = 1.0;
    s.rho = 0.0;
    s.scaled_dims = 0;
    s.samples_per_cluster = 500;
    return s;
  }();
  std::optional<std::string> data_file;  // overrides the synthetic source
  int eval_per_class = 100;               // held-out samples per synthetic class
  double eval_fraction = 0.2;             // held-out share per class for file data
  bool shuffle_labels = false;            // chance-level control

  std::size_t buffer_capacity = 200;
  double learning_rate = 0.5;
  int batch_size = 128;
  int probe_epochs = 100;
  int epochs_base = 50;
  int epochs_per_class = 5;
  int centralized_epochs = 100;
  std::vector<int> hidden = {64, 64};
  int latent_dim = 128;
  double augment_std = -1.0;  // negative: 0.1 * sqrt(data.sigma)
  std::uint64_t seed = 0;
  GeometryOptions geometry;

  bool centralized() const noexcept { return scenario == "centralized"; }
  /// Restores the full-length epoch budgets (500 / 50 per class / 1000 centralized).
  void use_full_epochs();
  void validate() const;
  ExperienceSchedule schedule(int num_classes) const;
  double effective_augment_std() const;
};

struct ExperienceRecord {
  int experience = 0;
  std::vector<int> classes;
  double iso_score = 0.0;
  double iso_entropy = 0.0;
  double inter_intra_ratio = 0.0;
  double intra = 0.0;
  double inter = 0.0;
  double probe_accuracy = 0.0;
  std::vector<double> loss_trace;
  double experience_loss = 0.0;  // mean step loss of the final epoch
  std::size_t steps = 0;

  friend bool operator==(const ExperienceRecord&, const ExperienceRecord&) = default;
};

struct MetricsLog {
  std::vector<ExperienceRecord> records;
  double total_loss = 0.0;  // sum of experience_loss over records

  friend bool operator==(const MetricsLog&, const MetricsLog&) = default;
};

struct ScenarioData {
  FeatureMatrix train;
  FeatureMatrix eval;
  int num_classes = 0;
};

/// Train/held-out split for a configuration (synthetic or file-backed).
ScenarioData load_scenario_data(const ScenarioConfig& cfg);

MetricsLog run_scenario(const ScenarioConfig& cfg, const BatchObserver& observer = {});

/// Runs independent configurations on up to `threads` workers; results are in
/// input order and identical to sequential execution.
std::vector<MetricsLog> run_scenarios(const std::vector<ScenarioConfig>& cfgs, unsigned threads);

/// Reads `key = value` lines ('#' starts a comment) on top of the defaults.
ScenarioConfig parse_scenario_config(std::istream& in);
ScenarioConfig parse_scenario_config(const std::string& path);

}  // namespace isocl
