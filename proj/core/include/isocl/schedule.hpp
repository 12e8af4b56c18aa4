#pragma once

#include <string_view>
#include <vector>

namespace isocl {

struct Experience {
  std::vector<int> classes;
  int epochs = 0;

  friend bool operator==(const Experience&, const Experience&) = default;
};

struct ExperienceSchedule {
  std::vector<Experience> experiences;

  std::size_t size() const noexcept { return experiences.size(); }
  /// Disjoint, non-empty class sets and positive epoch counts.
  void validate() const;
};

/// Parses "50+50", "40+30+30", "20x5" or a comma list of fractions into
/// per-experience class fractions summing to one.
std::vector<double> parse_partition(std::string_view preset);

/// Assigns classes 0..C-1 in ascending order. The first experience trains for
/// epochs_base epochs, later ones for epochs_per_class times their class count.
ExperienceSchedule build_schedule(int num_classes, const std::vector<double>& fractions,
                                  int epochs_base, int epochs_per_class);
ExperienceSchedule build_schedule(int num_classes, std::string_view preset, int epochs_base,
                                  int epochs_per_class);

/// Single experience containing every class.
ExperienceSchedule centralized_schedule(int num_classes, int epochs);

}  // namespace isocl
