#include <iostream>
#include <numeric>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

std::vector<std::uint64_t> expand_seeds(const std::vector<std::uint64_t>& seeds) {
  // A single value is a count: 0..N-1.
  if (seeds.size() != 1) return seeds;
  std::vector<std::uint64_t> out(seeds.front());
  std::iota(out.begin(), out.end(), std::uint64_t{0});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace isocl::cli;

  CLI::App app{"isocl: isotropy and class-geometry analysis of feature spaces, synthetic "
               "anisotropy baselines, and class-incremental contrastive simulations"};
  app.require_subcommand(1);

  MetricsOptions metrics;
  auto* m = app.add_subcommand("metrics", "IsoScore, IsoEntropy and class geometry of a feature CSV");
  m->add_option("input", metrics.input, "CSV with header label,f0,...,f{D-1}")->required();
  m->add_flag("--class-geometry", metrics.class_geometry, "Also report Mahalanobis inter/intra distances");
  m->add_option("--shrinkage", metrics.shrinkage, "Shrinkage of the pooled within-class covariance")
      ->capture_default_str();

  SynthOptions synth;
  std::vector<std::uint64_t> synth_seeds{1};
  std::vector<std::uint64_t> synth_seed_list;
  auto* s = app.add_subcommand("synth", "Sweep anisotropy strength on synthetic Gaussian clusters");
  s->add_option("--clusters,-M", synth.spec.num_clusters, "Number of clusters")->capture_default_str();
  s->add_option("--dim,-D", synth.spec.dimension, "Feature dimension")->capture_default_str();
  s->add_option("--alpha", synth.spec.alpha, "Centroid radius")->capture_default_str();
  s->add_option("--sigma", synth.spec.sigma, "Base per-dimension variance")->capture_default_str();
  s->add_option("--k", synth.spec.scaled_dims, "Number of inflated dimensions")->capture_default_str();
  s->add_option("--n", synth.spec.samples_per_cluster, "Samples per cluster")->capture_default_str();
  s->add_option("--rho", synth.rhos, "Comma-separated anisotropy strengths")->delimiter(',');
  s->add_option("--seeds", synth_seeds, "Seed count N (seeds 0..N-1)");
  s->add_option("--seed-list", synth_seed_list, "Explicit comma-separated seeds")->delimiter(',');
  s->add_option("--out", synth.out_dir, "Output directory")->capture_default_str();
  s->add_option("--dump", synth.dump, "Also write a feature CSV of the first (rho, seed) point");
  s->add_option("--threads", synth.threads, "Worker threads")->capture_default_str();

  SimulateOptions sim;
  std::vector<std::uint64_t> sim_seed_list;
  std::uint64_t sim_seed_count = 0;
  auto* r = app.add_subcommand("simulate", "Run a class-incremental scenario from a config file");
  r->add_option("config", sim.config, "key = value configuration file")->required();
  r->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();
  r->add_option("--lambda-iso", sim.lambda_iso, "Comma-separated isotropy weights")->delimiter(',');
  r->add_option("--seeds", sim_seed_count, "Seed count N (seeds 0..N-1)");
  r->add_option("--seed-list", sim_seed_list, "Explicit comma-separated seeds")->delimiter(',');
  r->add_flag("--paper-epochs,--full-epochs", sim.full_epochs,
              "Use the full-length budgets: 500 base, 50 per class, 1000 centralized");
  r->add_option("--threads", sim.threads, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  if (*m) return cmd_metrics(metrics, std::cout, std::cerr);
  if (*s) {
    synth.seeds = synth_seed_list.empty() ? expand_seeds(synth_seeds) : synth_seed_list;
    return cmd_synth(synth, std::cout, std::cerr);
  }
  if (sim_seed_count > 0) {
    sim.seeds.resize(sim_seed_count);
    std::iota(sim.seeds.begin(), sim.seeds.end(), std::uint64_t{0});
  }
  if (!sim_seed_list.empty()) sim.seeds = sim_seed_list;
  return cmd_simulate(sim, std::cout, std::cerr);
}
