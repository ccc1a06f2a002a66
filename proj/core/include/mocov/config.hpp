#pragma once

// Pipeline configuration: flat key/value text with [section] headers.
// Unknown keys are errors; every key has a documented default
// (see default_config_text()). CLI flags override file values through
// apply_override("section.key", "value").

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mocov/covariance.hpp"
#include "mocov/features.hpp"
#include "mocov/flow.hpp"
#include "mocov/omp.hpp"
#include "mocov/tsc.hpp"

namespace mocov {

struct PipelineConfig {
  // [pipeline]
  int clip_length = 20;
  uint64_t seed = 42;
  std::string method = "tsc";              // omp | tsc | nn | all
  std::string covariance_path = "integral";  // integral | direct

  // [features]
  FeatureSetMask mask;          // default: full 19-feature stack
  uint16_t depth_threshold = 0;  // 0 disables depth masking

  // [flow]
  FlowParams flow;

  // [covariance]
  RegularizeParams reg;
  bool vectorize_weighted = true;

  // [omp]
  OmpParams omp;

  // [tsc]
  TscParams tsc;

  // [split]
  std::vector<std::string> test_groups;
  bool one_shot = false;

  static PipelineConfig parse(const std::string& text, const std::string& origin);
  static PipelineConfig load(const std::filesystem::path& path);
  void apply_override(const std::string& dotted_key, const std::string& value);
  void validate() const;

  // Annotated config with every default inline.
  static std::string default_config_text();

  std::vector<std::string> methods() const;  // expands "all"
  std::string split_id() const;
};

}  // namespace mocov
