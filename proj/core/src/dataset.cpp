#include "mocov/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mocov/pnm.hpp"
#include "mocov/textio.hpp"

namespace mocov {

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path.string());
  DatasetManifest m;
  m.root = path.parent_path();

  std::string line;
  if (!std::getline(in, line) || line != "mocov-manifest 1")
    throw std::runtime_error("manifest: bad header in " + path.string());
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "classes") {
      m.classes.assign(toks.begin() + 1, toks.end());
    } else if (toks[0] == "video") {
      if (toks.size() != 7)
        throw std::runtime_error("manifest: bad video record in " + path.string() +
                                 ": '" + line + "'");
      VideoRecord rec;
      rec.video_id = toks[1];
      rec.label = toks[2];
      rec.group_id = toks[3];
      rec.frames_dir = toks[4];
      if (toks[5] != "-") rec.depth_dir = toks[5];
      rec.frame_count = std::stoi(toks[6]);
      m.videos.push_back(std::move(rec));
    } else {
      throw std::runtime_error("manifest: unknown record '" + toks[0] + "' in " +
                               path.string());
    }
  }
  m.validate();
  return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  out << "mocov-manifest 1\n";
  out << "classes";
  for (const auto& c : classes) out << " " << c;
  out << "\n";
  for (const auto& v : videos) {
    out << "video " << v.video_id << " " << v.label << " " << v.group_id << " "
        << v.frames_dir.generic_string() << " "
        << (v.depth_dir ? v.depth_dir->generic_string() : "-") << " "
        << v.frame_count << "\n";
  }
  atomic_write_file(path, out.str());
}

void DatasetManifest::validate() const {
  if (classes.empty()) throw std::runtime_error("manifest: no class set declared");
  std::set<std::string> class_set(classes.begin(), classes.end());
  std::set<std::string> ids;
  for (const auto& v : videos) {
    if (!class_set.count(v.label))
      throw std::runtime_error("manifest: label '" + v.label +
                               "' outside declared class set (video " + v.video_id + ")");
    if (v.frame_count < 2)
      throw std::runtime_error("manifest: video " + v.video_id + " has fewer than 2 frames");
    if (!ids.insert(v.video_id).second)
      throw std::runtime_error("manifest: duplicate video id " + v.video_id);
    if (!std::filesystem::is_directory(root / v.frames_dir))
      throw std::runtime_error("manifest: missing frames directory " +
                               (root / v.frames_dir).string());
    if (v.depth_dir && !std::filesystem::is_directory(root / *v.depth_dir))
      throw std::runtime_error("manifest: missing depth directory " +
                               (root / *v.depth_dir).string());
  }
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

VideoFrames load_video(const DatasetManifest& manifest, const VideoRecord& video) {
  VideoFrames out;
  const auto frames = list_frames(manifest.root / video.frames_dir);
  if (frames.empty())
    throw std::runtime_error("dataset: no frames in " +
                             (manifest.root / video.frames_dir).string());
  for (const auto& f : frames) {
    const std::string kind = probe_pnm(f);
    if (kind == "P6") {
      ColorFrame c = read_ppm(f);
      out.gray.push_back(c.to_gray());
      out.color.push_back(std::move(c));
    } else if (kind == "P5") {
      out.gray.push_back(read_pgm(f));
    } else {
      throw std::runtime_error("dataset: unexpected 16-bit frame " + f.string());
    }
  }
  if (!out.color.empty() && out.color.size() != out.gray.size())
    throw std::runtime_error("dataset: mixed color/grayscale frames in " +
                             video.video_id);

  if (video.depth_dir) {
    const auto depth_files = list_frames(manifest.root / *video.depth_dir);
    if (depth_files.size() != out.gray.size())
      throw std::runtime_error("dataset: depth/frame count mismatch for " +
                               video.video_id);
    for (const auto& f : depth_files) out.depth.push_back(read_pgm16(f));
    for (const auto& d : out.depth)
      if (d.width != out.gray[0].width || d.height != out.gray[0].height)
        throw std::runtime_error("dataset: depth dimensions mismatch for " +
                                 video.video_id);
  }
  return out;
}

Split make_split(const DatasetManifest& manifest,
                 const std::vector<std::string>& test_groups) {
  std::set<std::string> test_set(test_groups.begin(), test_groups.end());
  std::set<std::string> known;
  for (const auto& v : manifest.videos) known.insert(v.group_id);
  for (const auto& g : test_set)
    if (!known.count(g))
      throw std::runtime_error("split: unknown test group '" + g + "'");

  Split split;
  for (int i = 0; i < static_cast<int>(manifest.videos.size()); ++i) {
    if (test_set.count(manifest.videos[i].group_id))
      split.test.push_back(i);
    else
      split.train.push_back(i);
  }
  if (split.test.empty()) throw std::runtime_error("split: empty test split");
  if (split.train.empty()) throw std::runtime_error("split: empty training split");
  return split;
}

}  // namespace mocov
