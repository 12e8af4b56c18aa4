#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "isocl/error.hpp"
#include "isocl/feature_io.hpp"
#include "isocl/scenario.hpp"

namespace isocl {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text, std::size_t line) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line, "invalid value '" + text + "' for key '" + key + "'");
  }
  return v;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text, std::size_t line) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_value<int>(key, trim(part), line));
  return out;
}

bool parse_bool(const std::string& key, const std::string& text, std::size_t line) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError(line, "invalid boolean '" + text + "' for key '" + key + "'");
}

}  // namespace

ScenarioConfig parse_scenario_config(std::istream& in) {
  ScenarioConfig cfg;
  bool full_epochs = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));

    auto dbl = [&] { return parse_value<double>(key, value, line); };
    auto integer = [&] { return parse_value<int>(key, value, line); };

    if (key == "scenario") cfg.scenario = value;
    else if (key == "loss") {
      try {
        cfg.loss = parse_loss_variant(value);
      } catch (const Error& e) {
        throw ParseError(line, e.what());
      }
    }
    else if (key == "tau") cfg.loss_cfg.tau = dbl();
    else if (key == "tau_ird_past") cfg.loss_cfg.tau_ird_past = dbl();
    else if (key == "tau_ird_current") cfg.loss_cfg.tau_ird_current = dbl();
    else if (key == "lambda_ird") cfg.loss_cfg.lambda_ird = dbl();
    else if (key == "lambda_pird") cfg.loss_cfg.lambda_pird = dbl();
    else if (key == "lambda_iso") cfg.loss_cfg.lambda_iso = dbl();
    else if (key == "iso_zeta") cfg.loss_cfg.iso_cfg.zeta = dbl();
    else if (key == "iso_epsilon") cfg.loss_cfg.iso_cfg.epsilon = dbl();
    else if (key == "reduction") {
      if (value == "mean") cfg.loss_cfg.reduction = Reduction::Mean;
      else if (value == "sum") cfg.loss_cfg.reduction = Reduction::Sum;
      else throw ParseError(line, "reduction must be 'mean' or 'sum'");
    }
    else if (key == "buffer_capacity") cfg.buffer_capacity = parse_value<std::size_t>(key, value, line);
    else if (key == "lr") cfg.learning_rate = dbl();
    else if (key == "batch_size") cfg.batch_size = integer();
    else if (key == "probe_epochs") cfg.probe_epochs = integer();
    else if (key == "epochs_base") cfg.epochs_base = integer();
    else if (key == "epochs_per_class") cfg.epochs_per_class = integer();
    else if (key == "centralized_epochs") cfg.centralized_epochs = integer();
    else if (key == "full_epochs") full_epochs = parse_bool(key, value, line);
    else if (key == "seed") cfg.seed = parse_value<std::uint64_t>(key, value, line);
    else if (key == "augment_std") cfg.augment_std = dbl();
    else if (key == "encoder.hidden") cfg.hidden = parse_int_list(key, value, line);
    else if (key == "encoder.latent") cfg.latent_dim = integer();
    else if (key == "eval_per_class") cfg.eval_per_class = integer();
    else if (key == "eval_fraction") cfg.eval_fraction = dbl();
    else if (key == "shuffle_labels") cfg.shuffle_labels = parse_bool(key, value, line);
    else if (key == "geometry.shrinkage") cfg.geometry.shrinkage = dbl();
    else if (key == "data.file") cfg.data_file = value;
    else if (key == "data.clusters") cfg.data.num_clusters = integer();
    else if (key == "data.dim") cfg.data.dimension = integer();
    else if (key == "data.alpha") cfg.data.alpha = dbl();
    else if (key == "data.sigma") cfg.data.sigma = dbl();
    else if (key == "data.rho") cfg.data.rho = dbl();
    else if (key == "data.k") cfg.data.scaled_dims = integer();
    else if (key == "data.n") cfg.data.samples_per_cluster = integer();
    else if (key == "data.seed") cfg.data.seed = parse_value<std::uint64_t>(key, value, line);
    else throw ParseError(line, "unknown key '" + key + "'");
  }
  if (full_epochs) cfg.use_full_epochs();
  return cfg;
}

ScenarioConfig parse_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open config file '" + path + "'");
  return parse_scenario_config(in);
}

}  // namespace isocl
