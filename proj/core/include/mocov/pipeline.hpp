#pragma once

// End-to-end orchestration shared by the CLI subcommands and the test
// harness: descriptor extraction into an on-disk store, dictionary training
// over the group-disjoint split, evaluation with clip-level voting, and the
// feature-mask ablation harness.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mocov/classify.hpp"
#include "mocov/config.hpp"
#include "mocov/covariance.hpp"
#include "mocov/dataset.hpp"

namespace mocov {

// --- descriptor store ------------------------------------------------------
// A store directory holds one .mdesc file per clip plus index.txt:
//   mocov-index 1
//   mask <description> d <d> logw <0|1>
//   clip <video_id> <clip_index> <label> <group_id> <n> <file>

struct StoreEntry {
  std::string video_id;
  int clip_index = 0;
  std::string label;
  std::string group_id;
  long n = 0;
  std::string file;
};

struct DescriptorStore {
  std::filesystem::path dir;
  std::string mask_description;
  int d = 0;
  bool log_weighted = true;
  std::vector<StoreEntry> entries;

  static DescriptorStore open(const std::filesystem::path& dir);
  DescriptorRecord load_record(const StoreEntry& entry) const;
  std::vector<StoreEntry> entries_for(const std::string& video_id) const;
};

struct ExtractOptions {
  // When set, the first flow field of every video is dumped as u/v pixmaps.
  std::filesystem::path flow_dump_dir;
};

struct ExtractStats {
  int videos = 0;
  int clips = 0;
  int skipped_videos = 0;
  int skipped_clips = 0;
};

ExtractStats extract_dataset(const DatasetManifest& manifest, const PipelineConfig& config,
                             const std::filesystem::path& store_dir,
                             const ExtractOptions& opts = {});

// --- dictionary ------------------------------------------------------------
// Dictionary file: "mocov-dict 1", "atoms <p>", then descriptor records.

struct TrainedDictionary {
  std::vector<DescriptorRecord> atoms;
  int d = 0;
  bool log_weighted = true;

  std::vector<LogDescriptor> log_descriptors() const;
  TensorDictionary tensor_dictionary() const;
  std::vector<std::string> groups() const;
};

// Keeps only train-split clips (groups not listed in config.test_groups);
// with config.one_shot, a single exemplar video per class. Writes the
// dictionary file and returns it.
TrainedDictionary train_dictionary(const DescriptorStore& store,
                                   const DatasetManifest& manifest,
                                   const PipelineConfig& config,
                                   const std::filesystem::path& dict_path);

void save_dictionary(const std::filesystem::path& path, const TrainedDictionary& dict);
TrainedDictionary load_dictionary(const std::filesystem::path& path);

// --- evaluation ------------------------------------------------------------

struct VideoPrediction {
  std::string video_id;
  std::string truth;
  std::string predicted;
  std::vector<ClipPrediction> clips;
};

struct MethodEval {
  std::string method;
  EvalReport report;
  std::vector<VideoPrediction> predictions;
};

// Classifies every test-split video with each configured method and writes,
// per method: eval_<m>.txt, eval_<m>.tsv, confusion_<m>.csv,
// predictions_<m>.tsv. Asserts train/test group disjointness against the
// dictionary's provenance before touching any video.
std::vector<MethodEval> evaluate_dataset(const DescriptorStore& store,
                                         const DatasetManifest& manifest,
                                         const TrainedDictionary& dict,
                                         const PipelineConfig& config,
                                         const std::filesystem::path& out_dir);

// --- ablation --------------------------------------------------------------

struct AblationCell {
  std::string mask_name;
  std::string method;
  EvalReport report;
};

// One extraction pass per mask (flow shared across masks within a video),
// then train+eval per (mask, method). Writes ablation.tsv and ablation.txt.
std::vector<AblationCell> run_ablation(const DatasetManifest& manifest,
                                       const PipelineConfig& config,
                                       const std::vector<std::string>& mask_names,
                                       const std::vector<std::string>& methods,
                                       const std::filesystem::path& out_dir);

// Serialization helpers shared with the report files.
std::string eval_report_tsv(const EvalReport& report);
std::string eval_report_table(const EvalReport& report);
std::string confusion_csv(const EvalReport& report);

}  // namespace mocov
