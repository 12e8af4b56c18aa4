#include "isocl/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <thread>

#include "isocl/error.hpp"
#include "isocl/feature_io.hpp"
#include "isocl/isotropy.hpp"

namespace isocl {

namespace {

FeatureMatrix select_classes(const FeatureMatrix& x, const std::set<int>& classes) {
  const auto& labels = *x.labels();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < x.samples(); ++j) {
    if (classes.count(labels[static_cast<std::size_t>(j)]) > 0) cols.push_back(j);
  }
  Matrix data(x.dimension(), static_cast<Eigen::Index>(cols.size()));
  std::vector<int> out_labels;
  out_labels.reserve(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    data.col(static_cast<Eigen::Index>(i)) = x.data().col(cols[i]);
    out_labels.push_back(labels[static_cast<std::size_t>(cols[i])]);
  }
  return FeatureMatrix(std::move(data), std::move(out_labels));
}

FeatureMatrix concat(const FeatureMatrix& a, const FeatureMatrix& b) {
  Matrix data(a.dimension(), a.samples() + b.samples());
  data << a.data(), b.data();
  std::vector<int> labels = *a.labels();
  labels.insert(labels.end(), b.labels()->begin(), b.labels()->end());
  return FeatureMatrix(std::move(data), std::move(labels));
}

bool uses_prototypes(LossVariant v) { return v == LossVariant::SupCP || v == LossVariant::NCI; }

bool is_asymmetric(LossVariant v) {
  return v == LossVariant::Co2L || v == LossVariant::NCI || v == LossVariant::Co2LIso;
}

}  // namespace

TrainResult train_experience(const Encoder& model, const FeatureMatrix& experience_data,
                             const ReplayBuffer& buffer, const Experience& entry,
                             const TrainContext& ctx) {
  require(experience_data.has_labels(), "train_experience: experience data must be labeled");
  require(ctx.batch_size >= 1, "train_experience: batch size must be positive");
  require(ctx.learning_rate >= 0.0, "train_experience: learning rate must be non-negative");
  require(ctx.augment_std >= 0.0, "train_experience: augmentation noise must be non-negative");
  require(entry.epochs > 0, "train_experience: epochs must be positive");

  const FeatureMatrix replay = buffer.as_features(experience_data.dimension());
  const FeatureMatrix pool = concat(experience_data, replay);
  const auto& pool_labels = *pool.labels();
  const auto num_current = static_cast<std::size_t>(experience_data.samples());
  const auto n = static_cast<std::size_t>(pool.samples());
  require(n >= 1, "train_experience: no training data");

  LossConfig loss = ctx.loss;
  if (ctx.past_model == nullptr) {
    loss.lambda_ird = 0.0;
    loss.lambda_pird = 0.0;
  } else if (ctx.variant == LossVariant::NCI && loss.lambda_pird > 0.0) {
    require(ctx.past_prototypes != nullptr, "train_experience: PIRD needs past prototypes");
  }
  const bool need_past_z = ctx.past_model != nullptr && is_asymmetric(ctx.variant) &&
                           (loss.lambda_ird > 0.0 || (ctx.variant == LossVariant::NCI && loss.lambda_pird > 0.0));

  std::seed_seq seq{static_cast<std::uint32_t>(ctx.seed), static_cast<std::uint32_t>(ctx.seed >> 32),
                    static_cast<std::uint32_t>(ctx.experience_index), 0x7a11u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, 1.0);

  TrainResult result{model, {}, 0};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(ctx.batch_size);

  for (int epoch = 0; epoch < entry.epochs; ++epoch) {
    std::optional<PrototypeSet> protos;
    if (uses_prototypes(ctx.variant)) {
      protos = PrototypeSet::from_embeddings(result.model.forward(pool.data()), pool_labels, epoch);
    }
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const auto m = static_cast<Eigen::Index>(stop - start);

      BatchRecord record;
      record.experience = ctx.experience_index;
      record.epoch = epoch;
      record.step = ctx.step_offset + result.steps;
      Matrix views(pool.dimension(), 2 * m);
      std::vector<int> labels(static_cast<std::size_t>(2 * m));
      std::vector<bool> current(static_cast<std::size_t>(2 * m));
      std::vector<int> view_of(static_cast<std::size_t>(2 * m));
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t src = order[start + static_cast<std::size_t>(i)];
        const int y = pool_labels[src];
        const bool is_current = src < num_current;
        record.labels.push_back(y);
        record.current.push_back(is_current);
        for (Eigen::Index v = 0; v < 2; ++v) {
          const Eigen::Index col = v * m + i;
          for (Eigen::Index r = 0; r < pool.dimension(); ++r) {
            views(r, col) = pool.data()(r, static_cast<Eigen::Index>(src)) + ctx.augment_std * noise(rng);
          }
          labels[static_cast<std::size_t>(col)] = y;
          current[static_cast<std::size_t>(col)] = is_current;
          view_of[static_cast<std::size_t>(col)] = static_cast<int>(src);
        }
      }
      if (is_asymmetric(ctx.variant) &&
          std::none_of(record.current.begin(), record.current.end(), [](bool c) { return c; })) {
        continue;  // replay-only batch: no anchors
      }
      if (ctx.observer) ctx.observer(record);

      Encoder::ForwardCache cache;
      const Matrix z = result.model.forward(views, cache);
      if (!z.allFinite()) {
        const std::size_t step = ctx.step_offset + result.steps;
        throw TrainingDiverged(step, "training diverged at step " + std::to_string(step) + ": non-finite embeddings");
      }
      EmbeddingBatch eb{z, std::move(labels), std::move(current), std::move(view_of)};
      Matrix past_z;
      CompositeInputs inputs;
      if (need_past_z) {
        past_z = ctx.past_model->forward(views);
        inputs.past_z = &past_z;
        inputs.past_protos = ctx.past_prototypes;
      }
      if (protos) inputs.protos = &*protos;

      const LossOutput out = composite(eb, inputs, loss, ctx.variant);
      if (!std::isfinite(out.value) || !out.grad_z.allFinite()) {
        const std::size_t step = ctx.step_offset + result.steps;
        throw TrainingDiverged(step, "training diverged at step " + std::to_string(step) +
                                         " (experience " + std::to_string(ctx.experience_index) + ")");
      }
      if (ctx.learning_rate > 0.0) {
        result.model.apply(result.model.backward(cache, out.grad_z), ctx.learning_rate);
      }
      epoch_loss += out.value;
      ++epoch_steps;
      ++result.steps;
    }
    result.loss_trace.push_back(epoch_steps > 0 ? epoch_loss / static_cast<double>(epoch_steps) : 0.0);
  }
  if (!result.model.all_finite()) {
    const std::size_t step = ctx.step_offset + result.steps;
    throw TrainingDiverged(step, "model parameters became non-finite");
  }
  return result;
}

void ScenarioConfig::use_full_epochs() {
  epochs_base = 500;
  epochs_per_class = 50;
  centralized_epochs = 1000;
}

void ScenarioConfig::validate() const {
  loss_cfg.validate();
  require(buffer_capacity >= 1, "config: buffer_capacity must be positive");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, "config: lr must be non-negative");
  require(batch_size >= 1, "config: batch_size must be positive");
  require(probe_epochs >= 0, "config: probe_epochs must be non-negative");
  require(epochs_base >= 1 && epochs_per_class >= 1 && centralized_epochs >= 1,
          "config: epoch settings must be positive");
  require(latent_dim >= 2, "config: latent dimension must be at least 2");
  for (int h : hidden) require(h >= 1, "config: hidden layer sizes must be positive");
  require(eval_per_class >= 1, "config: eval_per_class must be positive");
  require(eval_fraction > 0.0 && eval_fraction < 1.0, "config: eval_fraction must lie in (0, 1)");
  if (!data_file) data.validate();
  if (!centralized()) (void)parse_partition(scenario);
  require(loss_cfg.lambda_iso == 0.0 || loss == LossVariant::Co2LIso,
          "config: lambda_iso > 0 only applies to loss co2l+iso");
}

ExperienceSchedule ScenarioConfig::schedule(int num_classes) const {
  if (centralized()) return centralized_schedule(num_classes, centralized_epochs);
  return build_schedule(num_classes, scenario, epochs_base, epochs_per_class);
}

double ScenarioConfig::effective_augment_std() const {
  if (augment_std >= 0.0) return augment_std;
  return 0.1 * std::sqrt(data.sigma);
}

ScenarioData load_scenario_data(const ScenarioConfig& cfg) {
  ScenarioData out;
  std::vector<double> train_vals, eval_vals;
  std::vector<int> train_labels, eval_labels;
  FeatureMatrix all;
  std::vector<bool> is_eval;

  if (cfg.data_file) {
    all = read_feature_csv(std::filesystem::path(*cfg.data_file));
    require(all.has_labels(), "scenario: data file must be labeled");
    // Every class is split in file order; the last eval_fraction of each class is held out.
    std::map<int, std::vector<Eigen::Index>> by_class;
    for (Eigen::Index j = 0; j < all.samples(); ++j) by_class[(*all.labels())[static_cast<std::size_t>(j)]].push_back(j);
    is_eval.assign(static_cast<std::size_t>(all.samples()), false);
    for (const auto& [y, cols] : by_class) {
      const auto held = static_cast<std::size_t>(std::ceil(cfg.eval_fraction * static_cast<double>(cols.size())));
      require(held >= 1 && held < cols.size(),
              "scenario: class " + std::to_string(y) + " is too small to split");
      for (std::size_t i = cols.size() - held; i < cols.size(); ++i) is_eval[static_cast<std::size_t>(cols[i])] = true;
    }
    const auto classes = all.classes();
    require(classes.front() == 0 && classes.back() == static_cast<int>(classes.size()) - 1,
            "scenario: data file labels must be 0..C-1");
    out.num_classes = static_cast<int>(classes.size());
  } else {
    ClusterSpec spec = cfg.data;
    spec.samples_per_cluster = cfg.data.samples_per_cluster + cfg.eval_per_class;
    all = sample_clusters(spec);
    is_eval.assign(static_cast<std::size_t>(all.samples()), false);
    const Eigen::Index per = spec.samples_per_cluster;
    for (Eigen::Index j = 0; j < all.samples(); ++j) {
      is_eval[static_cast<std::size_t>(j)] = (j % per) >= cfg.data.samples_per_cluster;
    }
    out.num_classes = spec.num_clusters;
  }

  std::vector<int> labels = *all.labels();
  if (cfg.shuffle_labels) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), 0x5a1eu};
    std::mt19937_64 rng(seq);
    std::shuffle(labels.begin(), labels.end(), rng);
  }

  Eigen::Index n_eval = 0;
  for (bool e : is_eval) n_eval += e ? 1 : 0;
  Matrix train(all.dimension(), all.samples() - n_eval);
  Matrix eval(all.dimension(), n_eval);
  Eigen::Index ti = 0, ei = 0;
  for (Eigen::Index j = 0; j < all.samples(); ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    if (is_eval[static_cast<std::size_t>(j)]) {
      eval.col(ei++) = all.data().col(j);
      eval_labels.push_back(y);
    } else {
      train.col(ti++) = all.data().col(j);
      train_labels.push_back(y);
    }
  }
  out.train = FeatureMatrix(std::move(train), std::move(train_labels));
  out.eval = FeatureMatrix(std::move(eval), std::move(eval_labels));
  return out;
}

MetricsLog run_scenario(const ScenarioConfig& cfg, const BatchObserver& observer) {
  cfg.validate();
  const ScenarioData data = load_scenario_data(cfg);
  const ExperienceSchedule schedule = cfg.schedule(data.num_classes);

  std::vector<int> sizes{static_cast<int>(data.train.dimension())};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(cfg.latent_dim);
  Encoder model(sizes, cfg.seed);

  ReplayBuffer buffer;
  buffer.capacity = cfg.buffer_capacity;
  buffer.rng_seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;

  std::optional<Encoder> past;
  std::optional<PrototypeSet> past_protos;
  std::set<int> seen;
  std::size_t steps = 0;
  MetricsLog log;
  ProbeOptions probe;
  probe.epochs = cfg.probe_epochs;

  for (std::size_t t = 0; t < schedule.size(); ++t) {
    const Experience& entry = schedule.experiences[t];
    const std::set<int> classes(entry.classes.begin(), entry.classes.end());
    seen.insert(classes.begin(), classes.end());
    const FeatureMatrix current = select_classes(data.train, classes);

    TrainContext ctx;
    ctx.variant = cfg.loss;
    ctx.loss = cfg.loss_cfg;
    ctx.learning_rate = cfg.learning_rate;
    ctx.batch_size = cfg.batch_size;
    ctx.augment_std = cfg.effective_augment_std();
    ctx.experience_index = static_cast<int>(t);
    ctx.step_offset = steps;
    ctx.seed = cfg.seed;
    ctx.past_model = past ? &*past : nullptr;
    ctx.past_prototypes = past_protos ? &*past_protos : nullptr;
    ctx.observer = observer;

    TrainResult trained = train_experience(model, current, buffer, entry, ctx);
    model = std::move(trained.model);
    steps += trained.steps;

    // What the learner may legally access during this experience.
    const FeatureMatrix accessible = concat(current, buffer.as_features(current.dimension()));
    const Matrix accessible_z = model.forward(accessible.data());

    past = model;
    past_protos = PrototypeSet::from_embeddings(accessible_z, *accessible.labels(), static_cast<int>(t));
    if (!cfg.centralized()) buffer = update_buffer(buffer, current, seen);

    const FeatureMatrix eval = select_classes(data.eval, seen);
    const FeatureMatrix eval_z(model.forward(eval.data()), eval.labels());
    const FeatureMatrix train_z(accessible_z, accessible.labels());

    ExperienceRecord rec;
    rec.experience = static_cast<int>(t);
    rec.classes = entry.classes;
    const IsotropyReport iso = isotropy_report(eval_z);
    rec.iso_score = iso.iso_score;
    rec.iso_entropy = iso.iso_entropy;
    if (seen.size() >= 2) {
      const ClassGeometryReport geo = inter_intra_ratio(eval_z, cfg.geometry);
      rec.inter_intra_ratio = geo.ratio;
      rec.intra = geo.intra;
      rec.inter = geo.inter;
    }
    rec.probe_accuracy = linear_probe(train_z, eval_z, probe);
    rec.loss_trace = std::move(trained.loss_trace);
    rec.experience_loss = rec.loss_trace.empty() ? 0.0 : rec.loss_trace.back();
    rec.steps = trained.steps;
    log.total_loss += rec.experience_loss;
    log.records.push_back(std::move(rec));
  }
  return log;
}

std::vector<MetricsLog> run_scenarios(const std::vector<ScenarioConfig>& cfgs, unsigned threads) {
  std::vector<MetricsLog> out(cfgs.size());
  std::vector<std::exception_ptr> errors(cfgs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        out[i] = run_scenario(cfgs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfgs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace isocl
