#pragma once

// Dataset manifests and group-aware splits.
//
// Manifest format (text, paths relative to the manifest's directory,
// whitespace-free):
//   mocov-manifest 1
//   classes <c1> <c2> ...
//   video <video_id> <label> <group_id> <frames_dir> <depth_dir|-> <frame_count>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mocov/image.hpp"

namespace mocov {

struct VideoRecord {
  std::string video_id;
  std::string label;
  std::string group_id;
  std::filesystem::path frames_dir;                 // relative to manifest root
  std::optional<std::filesystem::path> depth_dir;
  int frame_count = 0;
};

struct DatasetManifest {
  std::vector<std::string> classes;
  std::vector<VideoRecord> videos;
  std::filesystem::path root;

  static DatasetManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // Invariants: labels in class set, frame counts >= 2, directories present.
  void validate() const;
};

// Sorted frame files of one directory (.ppm/.pgm).
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

struct VideoFrames {
  std::vector<GrayFrame> gray;
  std::vector<ColorFrame> color;  // empty for grayscale sources
  std::vector<DepthFrame> depth;  // empty without a depth directory
  bool has_color() const { return !color.empty(); }
};

VideoFrames load_video(const DatasetManifest& manifest, const VideoRecord& video);

struct Split {
  std::vector<int> train;  // indices into manifest.videos
  std::vector<int> test;
};

// Group-disjoint split: videos whose group is listed go to test, the rest to
// train. Throws when either side ends up empty or a group id is unknown.
Split make_split(const DatasetManifest& manifest,
                 const std::vector<std::string>& test_groups);

}  // namespace mocov
