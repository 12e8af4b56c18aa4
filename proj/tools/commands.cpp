#include "commands.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "isocl/error.hpp"
#include "isocl/feature_io.hpp"
#include "isocl/geometry.hpp"
#include "isocl/isotropy.hpp"

namespace isocl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::DegenerateSpectrum:
    case ErrorKind::SingularCovariance:
      return kExitDegenerate;
    case ErrorKind::TrainingDiverged:
      return kExitDiverged;
    case ErrorKind::InvalidInput:
    case ErrorKind::InvalidBatch:
      return kExitInputError;
  }
  return kExitInputError;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

int cmd_metrics(const MetricsOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const FeatureMatrix x = read_feature_csv(fs::path(opts.input));
    require(x.dimension() >= 2, "feature file needs at least 2 feature columns");
    require(x.samples() >= 2, "feature file needs at least 2 rows");
    const IsotropyReport iso = isotropy_report(x);

    json j;
    j["dimension"] = iso.dimension;
    j["sample_count"] = iso.sample_count;
    j["iso_score"] = iso.iso_score;
    j["iso_entropy"] = iso.iso_entropy;
    j["defect"] = iso.defect;
    j["intra"] = nullptr;
    j["inter"] = nullptr;
    j["ratio"] = nullptr;
    if (opts.class_geometry) {
      require(x.has_labels(), "--class-geometry requires a labeled feature file");
      const ClassGeometryReport geo = inter_intra_ratio(x, opts.shrinkage);
      j["intra"] = geo.intra;
      j["inter"] = geo.inter;
      j["ratio"] = finite_or_null(geo.ratio);
      j["shrinkage"] = geo.shrinkage_used;
      j["num_classes"] = geo.centroids.size();
    }
    out << j.dump() << '\n';
    return kExitOk;
  } catch (const ParseError& e) {
    err << "error: " << opts.input << ": " << e.what() << '\n';
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << "rho,seed,iso_entropy,iso_score\n";
  for (const auto& r : records) {
    out << format_double(r.rho) << ',' << r.seed << ',' << format_double(r.iso_entropy) << ','
        << format_double(r.iso_score) << '\n';
  }
}

void write_sweep_mean_csv(std::ostream& out, const std::vector<SweepMean>& means) {
  out << "rho,iso_entropy_mean,iso_score_mean,n_seeds\n";
  for (const auto& m : means) {
    out << format_double(m.rho) << ',' << format_double(m.iso_entropy_mean) << ','
        << format_double(m.iso_score_mean) << ',' << m.n_seeds << '\n';
  }
}

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    opts.spec.validate();
    require(!opts.rhos.empty(), "--rho list is empty");
    require(!opts.seeds.empty(), "seed list is empty");
    for (double r : opts.rhos) require(std::isfinite(r) && r >= 0.0, "rho values must be >= 0");

    // Points are independent; each worker writes only its own slots.
    std::vector<SweepRecord> records(opts.rhos.size() * opts.seeds.size());
    std::vector<std::exception_ptr> errors(records.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < records.size(); i = next++) {
        try {
          const double rho = opts.rhos[i / opts.seeds.size()];
          const std::uint64_t seed = opts.seeds[i % opts.seeds.size()];
          records[i] = anisotropy_sweep(opts.spec, {rho}, {seed}).front();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::max(1u, opts.threads); ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    fs::create_directories(opts.out_dir);
    {
      auto f = open_output(fs::path(opts.out_dir) / "sweep.csv");
      write_sweep_csv(f, records);
    }
    {
      auto f = open_output(fs::path(opts.out_dir) / "sweep_mean.csv");
      write_sweep_mean_csv(f, average_sweep(records));
    }
    if (opts.dump) {
      ClusterSpec spec = opts.spec;
      spec.rho = opts.rhos.front();
      spec.seed = opts.seeds.front();
      write_feature_csv(fs::path(*opts.dump), sample_clusters(spec));
    }
    out << "wrote " << records.size() << " sweep points to " << opts.out_dir << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

void write_metrics_ndjson(std::ostream& out, const ScenarioConfig& cfg, const MetricsLog& log) {
  for (const auto& r : log.records) {
    json j;
    j["scenario"] = cfg.scenario;
    j["loss"] = std::string(to_string(cfg.loss));
    j["lambda_iso"] = cfg.loss_cfg.lambda_iso;
    j["seed"] = cfg.seed;
    j["experience"] = r.experience;
    j["classes"] = r.classes;
    j["iso_score"] = r.iso_score;
    j["iso_entropy"] = r.iso_entropy;
    j["inter_intra_ratio"] = finite_or_null(r.inter_intra_ratio);
    j["intra"] = r.intra;
    j["inter"] = r.inter;
    j["probe_accuracy"] = r.probe_accuracy;
    j["experience_loss"] = r.experience_loss;
    j["steps"] = r.steps;
    j["loss_trace"] = r.loss_trace;
    out << j.dump() << '\n';
  }
}

void write_summary_row(std::ostream& out, const ScenarioConfig& cfg, const MetricsLog& log) {
  const ExperienceRecord& last = log.records.back();
  out << cfg.scenario << ',' << to_string(cfg.loss) << ',' << format_double(cfg.loss_cfg.lambda_iso)
      << ',' << cfg.seed << ',' << format_double(last.iso_score) << ','
      << format_double(last.iso_entropy) << ',' << format_double(last.inter_intra_ratio) << ','
      << format_double(last.probe_accuracy) << '\n';
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<ScenarioConfig> runs;
  try {
    ScenarioConfig base = parse_scenario_config(opts.config);
    if (opts.full_epochs) base.use_full_epochs();
    base.validate();
    const std::vector<double> lambdas =
        opts.lambda_iso.empty() ? std::vector<double>{base.loss_cfg.lambda_iso} : opts.lambda_iso;
    const std::vector<std::uint64_t> seeds =
        opts.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : opts.seeds;
    for (std::uint64_t seed : seeds) {
      for (double lambda : lambdas) {
        ScenarioConfig cfg = base;
        cfg.seed = seed;
        cfg.data.seed = base.data.seed + seed;
        cfg.loss_cfg.lambda_iso = lambda;
        cfg.validate();
        runs.push_back(std::move(cfg));
      }
    }
  } catch (const Error& e) {
    err << "error: " << opts.config << ": " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    const std::vector<MetricsLog> logs = run_scenarios(runs, opts.threads);
    fs::create_directories(opts.out_dir);
    auto ndjson = open_output(fs::path(opts.out_dir) / "metrics.ndjson");
    auto summary = open_output(fs::path(opts.out_dir) / "summary.csv");
    summary << kSummaryHeader << '\n';
    for (std::size_t i = 0; i < runs.size(); ++i) {
      write_metrics_ndjson(ndjson, runs[i], logs[i]);
      write_summary_row(summary, runs[i], logs[i]);
    }
    out << "completed " << runs.size() << " run(s); results in " << opts.out_dir << '\n';
    return kExitOk;
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << " (step " << e.step() << ")\n";
    return kExitDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace isocl::cli
