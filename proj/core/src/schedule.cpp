#include "isocl/schedule.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "isocl/error.hpp"

namespace isocl {

namespace {

double parse_number(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  require(ec == std::errc() && ptr == end, "schedule: cannot parse number '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

void ExperienceSchedule::validate() const {
  require(!experiences.empty(), "schedule: no experiences");
  std::set<int> seen;
  for (const auto& e : experiences) {
    require(!e.classes.empty(), "schedule: experience without classes");
    require(e.epochs > 0, "schedule: epoch counts must be positive");
    for (int c : e.classes) {
      require(seen.insert(c).second, "schedule: class " + std::to_string(c) + " appears twice");
    }
  }
}

std::vector<double> parse_partition(std::string_view preset) {
  require(!preset.empty(), "schedule: empty preset");
  std::vector<double> fractions;
  if (const auto x = preset.find('x'); x != std::string_view::npos) {
    const double pct = parse_number(preset.substr(0, x));
    const double count = parse_number(preset.substr(x + 1));
    require(count >= 1 && std::floor(count) == count, "schedule: bad repetition count in '" +
                                                          std::string(preset) + "'");
    fractions.assign(static_cast<std::size_t>(count), pct / 100.0);
  } else if (preset.find('+') != std::string_view::npos) {
    for (auto part : split(preset, '+')) fractions.push_back(parse_number(part) / 100.0);
  } else {
    for (auto part : split(preset, ',')) fractions.push_back(parse_number(part));
  }
  const double total = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  require(std::abs(total - 1.0) < 1e-9, "schedule: fractions of '" + std::string(preset) +
                                            "' sum to " + std::to_string(total) + ", not 1");
  return fractions;
}

ExperienceSchedule build_schedule(int num_classes, const std::vector<double>& fractions,
                                  int epochs_base, int epochs_per_class) {
  require(num_classes >= 1, "schedule: need at least one class");
  require(!fractions.empty(), "schedule: no fractions");
  require(epochs_base > 0 && epochs_per_class > 0, "schedule: epoch settings must be positive");
  const double total = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  require(std::abs(total - 1.0) < 1e-9, "schedule: fractions must sum to 1");

  ExperienceSchedule schedule;
  int next = 0;
  for (std::size_t t = 0; t < fractions.size(); ++t) {
    const double exact = fractions[t] * num_classes;
    const double rounded = std::round(exact);
    require(std::abs(exact - rounded) < 1e-6 && rounded >= 1.0,
            "schedule: fraction " + std::to_string(fractions[t]) + " of " +
                std::to_string(num_classes) + " classes is not a positive whole number");
    Experience e;
    const int count = static_cast<int>(rounded);
    for (int c = 0; c < count; ++c) e.classes.push_back(next++);
    e.epochs = t == 0 ? epochs_base : epochs_per_class * count;
    schedule.experiences.push_back(std::move(e));
  }
  require(next == num_classes, "schedule: partition does not cover all classes");
  schedule.validate();
  return schedule;
}

ExperienceSchedule build_schedule(int num_classes, std::string_view preset, int epochs_base,
                                  int epochs_per_class) {
  return build_schedule(num_classes, parse_partition(preset), epochs_base, epochs_per_class);
}

ExperienceSchedule centralized_schedule(int num_classes, int epochs) {
  require(num_classes >= 1 && epochs > 0, "schedule: invalid centralized settings");
  Experience e;
  e.epochs = epochs;
  for (int c = 0; c < num_classes; ++c) e.classes.push_back(c);
  return ExperienceSchedule{{std::move(e)}};
}

}  // namespace isocl
