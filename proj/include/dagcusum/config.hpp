#pragma once

#include "dagcusum/experiment.hpp"

#include <string>

namespace dagcusum {

/// Builds a plan from JSON text. A relative "topology" path is resolved
/// against `base_dir`. Throws ConfigError naming the offending field.
ExperimentPlan parse_plan(const std::string& text,
                          const std::string& base_dir = ".");
ExperimentPlan load_plan(const std::string& path);

/// M = 5000 and 2000 replications.
void apply_paper_scale(ExperimentPlan& plan);

}  // namespace dagcusum
