#pragma once

// Synthetic labeled video generator: textured blobs over textured backgrounds
// performing class-specific motion (horizontal translation, vertical
// oscillation, in-place rotation). Appearance statistics are drawn from the
// same distributions for every class, so only motion separates them unless
// color context is explicitly enabled. Fully deterministic under a fixed
// seed, including the written bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "mocov/dataset.hpp"

namespace mocov {

struct SynthSpec {
  std::vector<std::string> classes = {"translate", "oscillate", "rotate"};
  int videos_per_class = 10;
  int frames = 40;
  int width = 64;
  int height = 64;
  uint64_t seed = 42;
  bool color = true;          // P6 frames; false writes grayscale P5
  bool depth = false;         // 16-bit P5 depth alongside each video
  bool color_context = false; // per-class tint (appearance becomes informative)
};

// Generates the dataset under outdir, writes manifest.txt and a truth.tsv
// sidecar with the motion parameters, and returns the loaded manifest.
DatasetManifest synth_dataset(const SynthSpec& spec, const std::filesystem::path& outdir);

}  // namespace mocov
