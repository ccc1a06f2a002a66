#include "mocov/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mocov/pnm.hpp"
#include "mocov/spd.hpp"
#include "mocov/textio.hpp"

namespace mocov {

namespace {

// Non-overlapping [begin, end) windows; a final short window survives only
// with at least 2 frames.
std::vector<std::pair<int, int>> clip_windows(int frame_count, int clip_length) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < frame_count; a += clip_length) {
    const int b = std::min(a + clip_length, frame_count);
    if (b - a >= 2)
      out.emplace_back(a, b);
  }
  return out;
}

std::string clip_file_name(const std::string& video_id, int clip_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_c%03d.mdesc", clip_index);
  return video_id + buf;
}

// Extracts every clip descriptor of one video, once per mask. Flow fields are
// computed per clip and shared across masks.
std::vector<std::vector<DescriptorRecord>> extract_video(
    const DatasetManifest& manifest, const VideoRecord& video,
    const PipelineConfig& config, const std::vector<FeatureSetMask>& masks,
    ExtractStats* stats, const ExtractOptions& opts) {
  std::vector<std::vector<DescriptorRecord>> per_mask(masks.size());

  VideoFrames vf = load_video(manifest, video);
  const int T = static_cast<int>(vf.gray.size());
  if (T < 2) {
    std::cerr << "warning: skipping video " << video.video_id
              << " (fewer than 2 readable frames)\n";
    if (stats) ++stats->skipped_videos;
    return per_mask;
  }

  bool any_motion = false;
  for (const auto& m : masks) any_motion |= m.basic_motion || m.kinematic;

  bool flow_dumped = false;
  const auto windows = clip_windows(T, config.clip_length);
  for (size_t w = 0; w < windows.size(); ++w) {
    const auto [a, b] = windows[w];
    ClipFrames clip;
    clip.gray.assign(vf.gray.begin() + a, vf.gray.begin() + b);
    if (vf.has_color())
      clip.color.assign(vf.color.begin() + a, vf.color.begin() + b);
    if (!vf.depth.empty() && config.depth_threshold > 0)
      for (int t = a; t < b; ++t)
        clip.validity.push_back(depth_mask(vf.depth[t], config.depth_threshold));

    std::vector<FlowField> flows;
    if (any_motion) {
      flows.reserve(b - a - 1);
      for (int t = a; t + 1 < b; ++t)
        flows.push_back(estimate_flow(vf.gray[t], vf.gray[t + 1], config.flow));
      if (!opts.flow_dump_dir.empty() && !flow_dumped) {
        std::filesystem::create_directories(opts.flow_dump_dir);
        dump_flow_debug(flows.front(), opts.flow_dump_dir / video.video_id);
        flow_dumped = true;
      }
    }

    bool skipped = false;
    for (size_t mi = 0; mi < masks.size(); ++mi) {
      FeatureStack stack = assemble_stack(clip, flows, masks[mi]);
      if (stack.count() < 2) {
        std::cerr << "warning: skipping clip " << video.video_id << "#" << w
                  << " (fewer than 2 samples after masking)\n";
        skipped = true;
        continue;
      }
      CovarianceDescriptor cov = config.covariance_path == "direct"
                                     ? covariance_direct(stack)
                                     : covariance_integral(stack);
      DescriptorRecord rec;
      rec.video_id = video.video_id;
      rec.clip_index = static_cast<int>(w);
      rec.label = video.label;
      rec.group_id = video.group_id;
      rec.d = cov.d;
      rec.n = cov.n;
      rec.cov = regularize(cov.C, config.reg);
      rec.log_vec = vectorize_sym(matrix_log(rec.cov), config.vectorize_weighted);
      rec.log_weighted = config.vectorize_weighted;
      per_mask[mi].push_back(std::move(rec));
    }
    if (stats) {
      if (skipped)
        ++stats->skipped_clips;
      else
        ++stats->clips;
    }
  }
  if (stats) ++stats->videos;
  return per_mask;
}

LogDescriptor to_log_descriptor(const DescriptorRecord& rec) {
  LogDescriptor d;
  d.v = rec.log_vec;
  d.d = rec.d;
  d.label = rec.label;
  d.video_id = rec.video_id;
  d.group_id = rec.group_id;
  d.clip_index = rec.clip_index;
  return d;
}

struct MemoryDataset {
  // test-split videos in manifest order
  std::vector<std::string> video_ids;
  std::vector<std::string> truths;
  std::vector<std::vector<DescriptorRecord>> clips;
};

std::vector<VideoPrediction> classify_videos(const std::string& method,
                                             const TrainedDictionary& dict,
                                             const MemoryDataset& test,
                                             const PipelineConfig& config) {
  std::vector<VideoPrediction> out;

  VectorDictionary vdict;
  TensorDictionary tdict;
  std::vector<LogDescriptor> exemplars;
  if (method == "omp")
    vdict = build_dictionary(dict.log_descriptors());
  else if (method == "tsc")
    tdict = dict.tensor_dictionary();
  else if (method == "nn")
    exemplars = dict.log_descriptors();
  else
    throw std::runtime_error("unknown method '" + method + "'");

  OmpParams omp_params = config.omp;
  omp_params.sparsity = std::min(omp_params.sparsity, static_cast<int>(dict.atoms.size()));
  TscParams tsc_params = config.tsc;
  tsc_params.reg_rel = config.reg.rel;
  tsc_params.reg_floor = config.reg.floor;

  for (size_t v = 0; v < test.video_ids.size(); ++v) {
    VideoPrediction pred;
    pred.video_id = test.video_ids[v];
    pred.truth = test.truths[v];

    const auto& records = test.clips[v];
    if (method == "omp") {
      std::vector<Eigen::VectorXd> queries;
      queries.reserve(records.size());
      for (const auto& r : records) queries.push_back(r.log_vec);
      auto codes = batch_omp(vdict, queries, omp_params);
      for (const auto& code : codes) {
        ClipPrediction cp;
        cp.score = std::numeric_limits<double>::infinity();
        for (const auto& [cls, res] : code.per_class_residual)
          if (res < cp.score) {
            cp.score = res;
            cp.label = cls;
          }
        pred.clips.push_back(cp);
      }
    } else if (method == "tsc") {
      for (const auto& r : records) {
        auto [label, scores] = tsc_classify_clip(r.cov, tdict, tsc_params);
        ClipPrediction cp;
        cp.label = label;
        cp.score = scores.at(label);
        pred.clips.push_back(cp);
      }
    } else {
      for (const auto& r : records) {
        NnResult nn = nn_classify_clip(r.log_vec, exemplars);
        pred.clips.push_back({nn.label, nn.distance});
      }
    }
    pred.predicted = majority_vote(pred.clips);
    out.push_back(std::move(pred));
  }
  return out;
}

EvalReport report_from_predictions(const std::vector<VideoPrediction>& preds,
                                   const std::vector<std::string>& classes,
                                   const std::string& split_id,
                                   const std::string& method) {
  std::vector<std::string> predicted, truth;
  for (const auto& p : preds) {
    predicted.push_back(p.predicted);
    truth.push_back(p.truth);
  }
  return evaluate(predicted, truth, classes, split_id, method);
}

std::string predictions_tsv(const std::vector<VideoPrediction>& preds) {
  std::ostringstream out;
  out << "mocov-pred 1\n";
  for (const auto& p : preds) {
    out << "video " << p.video_id << " " << p.truth << " " << p.predicted << " ";
    for (size_t i = 0; i < p.clips.size(); ++i)
      out << (i ? "," : "") << p.clips[i].label;
    out << " ";
    for (size_t i = 0; i < p.clips.size(); ++i)
      out << (i ? "," : "") << fmt_g17(p.clips[i].score);
    out << "\n";
  }
  return out.str();
}

MemoryDataset gather_test_records(const DescriptorStore& store,
                                  const DatasetManifest& manifest, const Split& split) {
  MemoryDataset test;
  for (int idx : split.test) {
    const auto& video = manifest.videos[idx];
    auto entries = store.entries_for(video.video_id);
    if (entries.empty()) {
      std::cerr << "warning: no descriptors in store for test video "
                << video.video_id << "\n";
      continue;
    }
    std::vector<DescriptorRecord> records;
    records.reserve(entries.size());
    for (const auto& e : entries) records.push_back(store.load_record(e));
    test.video_ids.push_back(video.video_id);
    test.truths.push_back(video.label);
    test.clips.push_back(std::move(records));
  }
  if (test.video_ids.empty()) throw std::runtime_error("evaluate: empty test split");
  return test;
}

}  // namespace

DescriptorStore DescriptorStore::open(const std::filesystem::path& dir) {
  DescriptorStore store;
  store.dir = dir;
  const auto index_path = dir / "index.txt";
  std::ifstream in(index_path);
  if (!in) throw std::runtime_error("store: cannot open " + index_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "mocov-index 1")
    throw std::runtime_error("store: bad index header in " + index_path.string());
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "mask") {
      if (toks.size() != 6 || toks[2] != "d" || toks[4] != "logw")
        throw std::runtime_error("store: bad mask line in " + index_path.string());
      store.mask_description = toks[1];
      store.d = std::stoi(toks[3]);
      store.log_weighted = toks[5] == "1";
    } else if (toks[0] == "clip") {
      if (toks.size() != 7)
        throw std::runtime_error("store: bad clip line in " + index_path.string());
      StoreEntry e;
      e.video_id = toks[1];
      e.clip_index = std::stoi(toks[2]);
      e.label = toks[3];
      e.group_id = toks[4];
      e.n = std::stol(toks[5]);
      e.file = toks[6];
      store.entries.push_back(std::move(e));
    } else {
      throw std::runtime_error("store: unknown record '" + toks[0] + "' in " +
                               index_path.string());
    }
  }
  return store;
}

DescriptorRecord DescriptorStore::load_record(const StoreEntry& entry) const {
  return load_descriptor(dir / entry.file);
}

std::vector<StoreEntry> DescriptorStore::entries_for(const std::string& video_id) const {
  std::vector<StoreEntry> out;
  for (const auto& e : entries)
    if (e.video_id == video_id) out.push_back(e);
  return out;
}

ExtractStats extract_dataset(const DatasetManifest& manifest, const PipelineConfig& config,
                             const std::filesystem::path& store_dir,
                             const ExtractOptions& opts) {
  std::filesystem::create_directories(store_dir);
  ExtractStats stats;
  std::ostringstream index;
  index << "mocov-index 1\n";
  index << "mask " << config.mask.describe() << " d " << config.mask.dim() << " logw "
        << (config.vectorize_weighted ? 1 : 0) << "\n";

  for (const auto& video : manifest.videos) {
    auto per_mask = extract_video(manifest, video, config, {config.mask}, &stats, opts);
    for (const auto& rec : per_mask[0]) {
      const std::string file = clip_file_name(rec.video_id, rec.clip_index);
      save_descriptor(store_dir / file, rec);
      index << "clip " << rec.video_id << " " << rec.clip_index << " " << rec.label
            << " " << rec.group_id << " " << rec.n << " " << file << "\n";
    }
  }
  atomic_write_file(store_dir / "index.txt", index.str());
  return stats;
}

std::vector<LogDescriptor> TrainedDictionary::log_descriptors() const {
  std::vector<LogDescriptor> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(to_log_descriptor(a));
  return out;
}

TensorDictionary TrainedDictionary::tensor_dictionary() const {
  TensorDictionary dict;
  for (const auto& a : atoms) {
    dict.atoms.push_back(a.cov);
    dict.meta.push_back({a.label, a.video_id, a.group_id, a.clip_index});
  }
  return dict;
}

std::vector<std::string> TrainedDictionary::groups() const {
  std::vector<std::string> out;
  for (const auto& a : atoms)
    if (std::find(out.begin(), out.end(), a.group_id) == out.end())
      out.push_back(a.group_id);
  return out;
}

void save_dictionary(const std::filesystem::path& path, const TrainedDictionary& dict) {
  std::ostringstream out;
  out << "mocov-dict 1\n";
  out << "atoms " << dict.atoms.size() << "\n";
  for (const auto& a : dict.atoms) out << serialize_descriptor(a);
  atomic_write_file(path, out.str());
}

TrainedDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("dictionary: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "mocov-dict 1")
    throw std::runtime_error("dictionary: bad header in " + path.string());
  if (!std::getline(in, line))
    throw std::runtime_error("dictionary: truncated file " + path.string());
  auto toks = split_ws(line);
  if (toks.size() != 2 || toks[0] != "atoms")
    throw std::runtime_error("dictionary: missing atom count in " + path.string());
  const int count = std::stoi(toks[1]);

  TrainedDictionary dict;
  for (int i = 0; i < count; ++i)
    dict.atoms.push_back(parse_descriptor(in, path.string()));
  if (dict.atoms.empty())
    throw std::runtime_error("dictionary: no atoms in " + path.string());
  dict.d = dict.atoms[0].d;
  dict.log_weighted = dict.atoms[0].log_weighted;
  for (const auto& a : dict.atoms)
    if (a.d != dict.d)
      throw std::runtime_error("dictionary: mixed descriptor dimensions in " +
                               path.string());
  return dict;
}

TrainedDictionary train_dictionary(const DescriptorStore& store,
                                   const DatasetManifest& manifest,
                                   const PipelineConfig& config,
                                   const std::filesystem::path& dict_path) {
  const Split split = make_split(manifest, config.test_groups);

  std::set<std::string> train_videos;
  for (int idx : split.train) train_videos.insert(manifest.videos[idx].video_id);

  if (config.one_shot) {
    // one exemplar video per class: smallest video id within the train split
    std::map<std::string, std::string> chosen;
    for (int idx : split.train) {
      const auto& v = manifest.videos[idx];
      auto it = chosen.find(v.label);
      if (it == chosen.end() || v.video_id < it->second) chosen[v.label] = v.video_id;
    }
    train_videos.clear();
    for (const auto& [cls, vid] : chosen) train_videos.insert(vid);
  }

  TrainedDictionary dict;
  for (const auto& entry : store.entries) {
    if (!train_videos.count(entry.video_id)) continue;
    dict.atoms.push_back(store.load_record(entry));
  }
  if (dict.atoms.empty()) throw std::runtime_error("train: empty training split");
  dict.d = dict.atoms[0].d;
  dict.log_weighted = dict.atoms[0].log_weighted;
  for (const auto& a : dict.atoms)
    if (a.d != dict.d) throw std::runtime_error("train: mixed descriptor dimensions");

  if (!dict_path.empty()) save_dictionary(dict_path, dict);
  return dict;
}

std::string eval_report_tsv(const EvalReport& report) {
  std::ostringstream out;
  out << "mocov-eval 1\n";
  out << "split " << (report.split_id.empty() ? "-" : report.split_id) << "\n";
  out << "method " << report.method << "\n";
  out << "videos " << report.confusion.sum() << "\n";
  out << "accuracy " << fmt_g17(report.accuracy) << "\n";
  for (size_t c = 0; c < report.classes.size(); ++c)
    out << "class " << report.classes[c] << " " << fmt_g17(report.precision[c]) << " "
        << fmt_g17(report.recall[c]) << " " << fmt_g17(report.f_measure[c]) << "\n";
  for (size_t c = 0; c < report.classes.size(); ++c) {
    out << "confusion " << report.classes[c];
    for (int j = 0; j < report.confusion.cols(); ++j)
      out << " " << report.confusion(static_cast<int>(c), j);
    out << "\n";
  }
  return out.str();
}

std::string eval_report_table(const EvalReport& report) {
  char buf[160];
  std::ostringstream out;
  std::snprintf(buf, sizeof(buf), "method %s  split %s  videos %d  accuracy %.4f\n",
                report.method.c_str(),
                report.split_id.empty() ? "-" : report.split_id.c_str(),
                report.confusion.sum(), report.accuracy);
  out << buf;
  out << "class                precision   recall  f-measure\n";
  for (size_t c = 0; c < report.classes.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "%-20s  %8.4f %8.4f   %8.4f\n",
                  report.classes[c].c_str(), report.precision[c], report.recall[c],
                  report.f_measure[c]);
    out << buf;
  }
  out << "confusion (rows = truth):\n";
  out << "                    ";
  for (const auto& c : report.classes) {
    std::snprintf(buf, sizeof(buf), " %10s", c.c_str());
    out << buf;
  }
  out << "\n";
  for (size_t c = 0; c < report.classes.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "%-20s", report.classes[c].c_str());
    out << buf;
    for (int j = 0; j < report.confusion.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), " %10d", report.confusion(static_cast<int>(c), j));
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::string confusion_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "truth\\pred";
  for (const auto& c : report.classes) out << "," << c;
  out << "\n";
  for (size_t c = 0; c < report.classes.size(); ++c) {
    out << report.classes[c];
    for (int j = 0; j < report.confusion.cols(); ++j)
      out << "," << report.confusion(static_cast<int>(c), j);
    out << "\n";
  }
  return out.str();
}

std::vector<MethodEval> evaluate_dataset(const DescriptorStore& store,
                                         const DatasetManifest& manifest,
                                         const TrainedDictionary& dict,
                                         const PipelineConfig& config,
                                         const std::filesystem::path& out_dir) {
  const Split split = make_split(manifest, config.test_groups);

  // Split hygiene: no dictionary atom may come from a test group.
  std::set<std::string> test_groups(config.test_groups.begin(), config.test_groups.end());
  for (const auto& g : dict.groups())
    if (test_groups.count(g))
      throw std::runtime_error("evaluate: dictionary contains test group '" + g + "'");

  if (store.d != 0 && store.d != dict.d)
    throw std::runtime_error("evaluate: descriptor dimension mismatch (store d=" +
                             std::to_string(store.d) + ", dictionary d=" +
                             std::to_string(dict.d) + ")");
  if (store.log_weighted != dict.log_weighted)
    throw std::runtime_error("evaluate: vectorization weighting mismatch between store and dictionary");

  MemoryDataset test = gather_test_records(store, manifest, split);

  std::filesystem::create_directories(out_dir);
  std::vector<MethodEval> evals;
  for (const auto& method : config.methods()) {
    MethodEval me;
    me.method = method;
    me.predictions = classify_videos(method, dict, test, config);
    me.report = report_from_predictions(me.predictions, manifest.classes,
                                        config.split_id(), method);
    atomic_write_file(out_dir / ("eval_" + method + ".tsv"), eval_report_tsv(me.report));
    atomic_write_file(out_dir / ("eval_" + method + ".txt"), eval_report_table(me.report));
    atomic_write_file(out_dir / ("confusion_" + method + ".csv"), confusion_csv(me.report));
    atomic_write_file(out_dir / ("predictions_" + method + ".tsv"),
                      predictions_tsv(me.predictions));
    evals.push_back(std::move(me));
  }
  return evals;
}

std::vector<AblationCell> run_ablation(const DatasetManifest& manifest,
                                       const PipelineConfig& config,
                                       const std::vector<std::string>& mask_names,
                                       const std::vector<std::string>& methods,
                                       const std::filesystem::path& out_dir) {
  if (mask_names.empty() || methods.empty())
    throw std::runtime_error("ablate: need at least one mask and one method");
  for (const auto& m : methods)
    if (m != "omp" && m != "tsc" && m != "nn")
      throw std::runtime_error("ablate: unknown method '" + m + "'");

  std::vector<FeatureSetMask> masks;
  for (const auto& name : mask_names) {
    FeatureSetMask m = FeatureSetMask::parse(name);
    m.standard_tau2 = config.mask.standard_tau2;
    masks.push_back(m);
  }

  const Split split = make_split(manifest, config.test_groups);
  std::set<int> test_idx(split.test.begin(), split.test.end());

  // One pass over the dataset; every mask's records are built from the same
  // frames and flow fields.
  std::vector<TrainedDictionary> dicts(masks.size());
  std::vector<MemoryDataset> tests(masks.size());
  for (int vi = 0; vi < static_cast<int>(manifest.videos.size()); ++vi) {
    const auto& video = manifest.videos[vi];
    auto per_mask = extract_video(manifest, video, config, masks, nullptr, {});
    for (size_t mi = 0; mi < masks.size(); ++mi) {
      if (per_mask[mi].empty()) continue;
      if (test_idx.count(vi)) {
        tests[mi].video_ids.push_back(video.video_id);
        tests[mi].truths.push_back(video.label);
        tests[mi].clips.push_back(std::move(per_mask[mi]));
      } else {
        for (auto& rec : per_mask[mi]) dicts[mi].atoms.push_back(std::move(rec));
      }
    }
  }

  std::filesystem::create_directories(out_dir);
  std::vector<AblationCell> cells;
  std::ostringstream tsv;
  tsv << "mocov-ablate 1\n";
  std::ostringstream table;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s", "mask");
  table << buf;
  for (const auto& m : methods) {
    std::snprintf(buf, sizeof(buf), " %8s", m.c_str());
    table << buf;
  }
  table << "\n";

  for (size_t mi = 0; mi < masks.size(); ++mi) {
    if (dicts[mi].atoms.empty()) throw std::runtime_error("ablate: empty training split");
    if (tests[mi].video_ids.empty()) throw std::runtime_error("ablate: empty test split");
    dicts[mi].d = dicts[mi].atoms[0].d;
    dicts[mi].log_weighted = dicts[mi].atoms[0].log_weighted;

    std::snprintf(buf, sizeof(buf), "%-10s", mask_names[mi].c_str());
    table << buf;
    for (const auto& method : methods) {
      auto preds = classify_videos(method, dicts[mi], tests[mi], config);
      AblationCell cell;
      cell.mask_name = mask_names[mi];
      cell.method = method;
      cell.report = report_from_predictions(preds, manifest.classes, config.split_id(),
                                            method);
      tsv << "cell " << cell.mask_name << " " << method << " "
          << fmt_g17(cell.report.accuracy);
      for (double f : cell.report.f_measure) tsv << " " << fmt_g17(f);
      tsv << "\n";
      std::snprintf(buf, sizeof(buf), " %8.4f", cell.report.accuracy);
      table << buf;
      cells.push_back(std::move(cell));
    }
    table << "\n";
  }
  atomic_write_file(out_dir / "ablation.tsv", tsv.str());
  atomic_write_file(out_dir / "ablation.txt", table.str());
  return cells;
}

}  // namespace mocov
