#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "mocov/config.hpp"
#include "mocov/pipeline.hpp"
#include "mocov/pnm.hpp"
#include "mocov/synth.hpp"
#include "test_util.hpp"

using namespace mocov;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// Byte-compare two directory trees.
bool trees_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::filesystem::path> rel;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(std::filesystem::relative(e.path(), a));
  std::sort(rel.begin(), rel.end());
  std::vector<std::filesystem::path> rel_b;
  for (const auto& e : std::filesystem::recursive_directory_iterator(b))
    if (e.is_regular_file()) rel_b.push_back(std::filesystem::relative(e.path(), b));
  std::sort(rel_b.begin(), rel_b.end());
  if (rel != rel_b) return false;
  for (const auto& r : rel)
    if (slurp(a / r) != slurp(b / r)) return false;
  return true;
}

SynthSpec tiny_spec() {
  SynthSpec spec;
  spec.classes = {"translate", "rotate"};
  spec.videos_per_class = 3;
  spec.frames = 8;
  spec.width = 32;
  spec.height = 32;
  spec.seed = 99;
  return spec;
}

PipelineConfig tiny_config() {
  PipelineConfig config;
  config.clip_length = 4;
  config.flow.max_iterations = 60;
  config.test_groups = {"g02"};
  return config;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("pnm files round-trip") {
  auto dir = temp_dir("mocov_pnm_test");
  std::mt19937_64 rng(14001);

  GrayFrame g(9, 7);
  for (auto& v : g.pix) v = std::floor(testutil::uniform01(rng) * 256.0);
  write_pgm(dir / "g.pgm", g);
  GrayFrame g2 = read_pgm(dir / "g.pgm");
  CHECK(g2.pix == g.pix);

  ColorFrame c(5, 6);
  for (size_t i = 0; i < c.r.size(); ++i) {
    c.r[i] = std::floor(testutil::uniform01(rng) * 256.0);
    c.g[i] = std::floor(testutil::uniform01(rng) * 256.0);
    c.b[i] = std::floor(testutil::uniform01(rng) * 256.0);
  }
  write_ppm(dir / "c.ppm", c);
  ColorFrame c2 = read_ppm(dir / "c.ppm");
  CHECK(c2.r == c.r);
  CHECK(c2.g == c.g);
  CHECK(c2.b == c.b);

  DepthFrame d(4, 4);
  for (auto& v : d.depth) v = static_cast<uint16_t>(rng() % 65536);
  write_pgm16(dir / "d.pgm", d);
  DepthFrame d2 = read_pgm16(dir / "d.pgm");
  CHECK(d2.depth == d.depth);

  CHECK(probe_pnm(dir / "g.pgm") == "P5");
  CHECK(probe_pnm(dir / "c.ppm") == "P6");
  CHECK(probe_pnm(dir / "d.pgm") == "P5/16");
  std::filesystem::remove_all(dir);
}

TEST_CASE("default config text parses back to the defaults") {
  PipelineConfig parsed = PipelineConfig::parse(PipelineConfig::default_config_text(),
                                                "<default>");
  PipelineConfig defaults;
  CHECK(parsed.clip_length == defaults.clip_length);
  CHECK(parsed.seed == defaults.seed);
  CHECK(parsed.method == defaults.method);
  CHECK(parsed.mask.dim() == 19);
  CHECK(parsed.flow.alpha == defaults.flow.alpha);
  CHECK(parsed.omp.sparsity == defaults.omp.sparsity);
  CHECK(parsed.tsc.delta == defaults.tsc.delta);
  CHECK(parsed.vectorize_weighted == defaults.vectorize_weighted);
}

TEST_CASE("config overrides and error reporting") {
  PipelineConfig config;
  config.apply_override("omp.sparsity", "7");
  CHECK(config.omp.sparsity == 7);
  config.apply_override("features.mask", "MF");
  CHECK(config.mask.dim() == 12);
  config.apply_override("features.position", "true");
  CHECK(config.mask.dim() == 15);
  config.apply_override("split.test_groups", "g1, g2");
  CHECK(config.test_groups == std::vector<std::string>{"g1", "g2"});

  CHECK_THROWS_AS(config.apply_override("omp.nope", "1"), std::runtime_error);
  CHECK_THROWS_AS(config.apply_override("nosection.key", "1"), std::runtime_error);
  CHECK_THROWS_AS(config.apply_override("flow.alpha", "abc"), std::runtime_error);
  CHECK_THROWS_AS(PipelineConfig::parse("[pipeline]\nclip_length = 1\n", "<s>"),
                  std::runtime_error);
  CHECK_THROWS_AS(PipelineConfig::parse("clip_length = 5\n", "<s>"), std::runtime_error);
}

TEST_CASE("synthetic dataset shape and manifest integrity") {
  auto dir = temp_dir("mocov_synth_shape");
  SynthSpec spec = tiny_spec();
  DatasetManifest manifest = synth_dataset(spec, dir);
  CHECK(manifest.videos.size() == 6);
  CHECK(manifest.classes == std::vector<std::string>{"translate", "rotate"});
  std::set<std::string> groups;
  for (const auto& v : manifest.videos) {
    groups.insert(v.group_id);
    CHECK(v.frame_count == 8);
    CHECK(list_frames(dir / v.frames_dir).size() == 8);
  }
  CHECK(groups == std::set<std::string>{"g00", "g01", "g02"});
  CHECK(std::filesystem::exists(dir / "truth.tsv"));

  DatasetManifest reloaded = DatasetManifest::load(dir / "manifest.txt");
  CHECK(reloaded.videos.size() == 6);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fixed seed reproduces the dataset byte for byte") {
  auto dir1 = temp_dir("mocov_synth_det1");
  auto dir2 = temp_dir("mocov_synth_det2");
  SynthSpec spec = tiny_spec();
  spec.depth = true;
  synth_dataset(spec, dir1);
  synth_dataset(spec, dir2);
  CHECK(trees_identical(dir1, dir2));
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("rotation videos carry a consistent vorticity sign across clips") {
  auto dir = temp_dir("mocov_synth_vort");
  SynthSpec spec;
  spec.classes = {"rotate"};
  spec.videos_per_class = 2;
  spec.frames = 8;
  spec.width = 40;
  spec.height = 40;
  spec.depth = true;
  spec.seed = 4242;
  DatasetManifest manifest = synth_dataset(spec, dir);

  for (const auto& video : manifest.videos) {
    VideoFrames vf = load_video(manifest, video);
    std::vector<double> clip_vorticity;
    for (int clip = 0; clip < 2; ++clip) {
      const int a = clip * 4;
      double sum = 0.0;
      long count = 0;
      std::vector<FlowField> flows;
      for (int t = a; t + 1 < a + 4; ++t)
        flows.push_back(estimate_flow(vf.gray[t], vf.gray[t + 1], {}));
      for (int fi = 0; fi < static_cast<int>(flows.size()); ++fi) {
        FlowDerivatives der = flow_derivatives(flows, fi);
        auto mask = depth_mask(vf.depth[a + fi], 20000);
        for (size_t i = 0; i < mask.size(); ++i) {
          if (!mask[i]) continue;
          sum += der.dv_dx[i] - der.du_dy[i];
          ++count;
        }
      }
      REQUIRE(count > 0);
      clip_vorticity.push_back(sum / count);
    }
    CHECK(clip_vorticity[0] * clip_vorticity[1] > 0.0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("extraction windows, store reload, and rerun determinism") {
  auto data_dir = temp_dir("mocov_extract_data");
  SynthSpec spec = tiny_spec();
  spec.frames = 7;  // windows of 4: [0,4) and [4,7); no 1-frame tail
  DatasetManifest manifest = synth_dataset(spec, data_dir);

  PipelineConfig config = tiny_config();
  auto store1 = temp_dir("mocov_extract_s1");
  ExtractStats stats = extract_dataset(manifest, config, store1);
  CHECK(stats.videos == 6);
  CHECK(stats.clips == 12);

  DescriptorStore store = DescriptorStore::open(store1);
  CHECK(store.d == 19);
  CHECK(store.entries.size() == 12);
  CHECK(store.entries_for(manifest.videos[0].video_id).size() == 2);
  DescriptorRecord rec = store.load_record(store.entries[0]);
  CHECK(rec.d == 19);
  CHECK(rec.log_vec.size() == 190);
  CHECK(rec.n == 32 * 32 * 4);

  auto store2 = temp_dir("mocov_extract_s2");
  extract_dataset(manifest, config, store2);
  CHECK(trees_identical(store1, store2));

  std::filesystem::remove_all(data_dir);
  std::filesystem::remove_all(store1);
  std::filesystem::remove_all(store2);
}

TEST_CASE("train splits honor groups and one-shot keeps one video per class") {
  auto data_dir = temp_dir("mocov_train_data");
  DatasetManifest manifest = synth_dataset(tiny_spec(), data_dir);
  PipelineConfig config = tiny_config();
  auto store_dir = temp_dir("mocov_train_store");
  extract_dataset(manifest, config, store_dir);
  DescriptorStore store = DescriptorStore::open(store_dir);

  TrainedDictionary dict = train_dictionary(store, manifest, config, "");
  // 2 classes x 2 train groups x 2 clips
  CHECK(dict.atoms.size() == 8);
  for (const auto& a : dict.atoms) CHECK(a.group_id != "g02");
  // label histogram matches the manifest's train-split clip counts
  std::map<std::string, int> histogram;
  for (const auto& a : dict.atoms) histogram[a.label]++;
  CHECK(histogram["translate"] == 4);
  CHECK(histogram["rotate"] == 4);

  config.one_shot = true;
  TrainedDictionary one_shot = train_dictionary(store, manifest, config, "");
  std::set<std::string> videos, labels;
  for (const auto& a : one_shot.atoms) {
    videos.insert(a.video_id);
    labels.insert(a.label);
  }
  CHECK(videos.size() == 2);
  CHECK(labels.size() == 2);

  // dictionary file round-trip
  auto dict_path = store_dir / "dict.mdict";
  save_dictionary(dict_path, dict);
  TrainedDictionary loaded = load_dictionary(dict_path);
  CHECK(loaded.atoms.size() == dict.atoms.size());
  CHECK(loaded.d == dict.d);

  std::filesystem::remove_all(data_dir);
  std::filesystem::remove_all(store_dir);
}

TEST_CASE("evaluation writes reports and enforces split hygiene") {
  auto data_dir = temp_dir("mocov_eval_data");
  DatasetManifest manifest = synth_dataset(tiny_spec(), data_dir);
  PipelineConfig config = tiny_config();
  config.method = "all";
  auto store_dir = temp_dir("mocov_eval_store");
  extract_dataset(manifest, config, store_dir);
  DescriptorStore store = DescriptorStore::open(store_dir);
  TrainedDictionary dict = train_dictionary(store, manifest, config, "");

  auto out_dir = temp_dir("mocov_eval_out");
  auto evals = evaluate_dataset(store, manifest, dict, config, out_dir);
  CHECK(evals.size() == 3);
  for (const auto& method : {"omp", "tsc", "nn"}) {
    CHECK(std::filesystem::exists(out_dir / ("eval_" + std::string(method) + ".tsv")));
    CHECK(std::filesystem::exists(out_dir / ("eval_" + std::string(method) + ".txt")));
    CHECK(std::filesystem::exists(out_dir / ("confusion_" + std::string(method) + ".csv")));
    CHECK(std::filesystem::exists(out_dir / ("predictions_" + std::string(method) + ".tsv")));
  }
  for (const auto& me : evals) {
    CHECK(me.report.confusion.sum() == 2);  // two test videos
    CHECK(me.predictions.size() == 2);
  }

  // a dictionary trained over the test group must be rejected
  PipelineConfig leaky = config;
  leaky.test_groups = {"g00"};
  TrainedDictionary bad_dict = train_dictionary(store, manifest, leaky, "");
  CHECK_THROWS_WITH_AS(evaluate_dataset(store, manifest, bad_dict, config, out_dir),
                       doctest::Contains("test group"), std::runtime_error);

  // so must a dictionary whose descriptor dimension differs from the store's
  PipelineConfig motion_cfg = config;
  motion_cfg.mask = FeatureSetMask::motion_only();
  auto store12_dir = temp_dir("mocov_eval_store12");
  extract_dataset(manifest, motion_cfg, store12_dir);
  DescriptorStore store12 = DescriptorStore::open(store12_dir);
  TrainedDictionary dict12 = train_dictionary(store12, manifest, motion_cfg, "");
  CHECK_THROWS_WITH_AS(evaluate_dataset(store, manifest, dict12, config, out_dir),
                       doctest::Contains("dimension mismatch"), std::runtime_error);

  std::filesystem::remove_all(data_dir);
  std::filesystem::remove_all(store_dir);
  std::filesystem::remove_all(store12_dir);
  std::filesystem::remove_all(out_dir);
}

TEST_CASE("manifest validation rejects bad records") {
  auto dir = temp_dir("mocov_manifest_bad");
  std::filesystem::create_directories(dir / "v0");
  atomic_write_file(dir / "manifest.txt",
                    "mocov-manifest 1\nclasses a\nvideo v0 zzz g0 v0 - 5\n");
  CHECK_THROWS_WITH_AS(DatasetManifest::load(dir / "manifest.txt"),
                       doctest::Contains("class set"), std::runtime_error);
  atomic_write_file(dir / "manifest.txt",
                    "mocov-manifest 1\nclasses a\nvideo v0 a g0 missing_dir - 5\n");
  CHECK_THROWS_WITH_AS(DatasetManifest::load(dir / "manifest.txt"),
                       doctest::Contains("missing"), std::runtime_error);
  atomic_write_file(dir / "manifest.txt",
                    "mocov-manifest 1\nclasses a\nvideo v0 a g0 v0 - 1\n");
  CHECK_THROWS_WITH_AS(DatasetManifest::load(dir / "manifest.txt"),
                       doctest::Contains("fewer than 2"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("split construction validates groups") {
  auto dir = temp_dir("mocov_split");
  DatasetManifest manifest = synth_dataset(tiny_spec(), dir);
  CHECK_THROWS_AS(make_split(manifest, {"nope"}), std::runtime_error);
  CHECK_THROWS_AS(make_split(manifest, {}), std::runtime_error);
  CHECK_THROWS_AS(make_split(manifest, {"g00", "g01", "g02"}), std::runtime_error);
  Split split = make_split(manifest, {"g01"});
  CHECK(split.test.size() == 2);
  CHECK(split.train.size() == 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ablation emits one report per mask and method") {
  auto data_dir = temp_dir("mocov_ablate_data");
  DatasetManifest manifest = synth_dataset(tiny_spec(), data_dir);
  PipelineConfig config = tiny_config();
  auto out_dir = temp_dir("mocov_ablate_out");
  auto cells = run_ablation(manifest, config, {"AF", "MF", "AMF"}, {"omp", "tsc"}, out_dir);
  CHECK(cells.size() == 6);
  CHECK(std::filesystem::exists(out_dir / "ablation.tsv"));
  CHECK(std::filesystem::exists(out_dir / "ablation.txt"));
  const std::string tsv = slurp(out_dir / "ablation.tsv");
  CHECK(tsv.find("cell AF omp") != std::string::npos);
  CHECK(tsv.find("cell AMF tsc") != std::string::npos);
  std::filesystem::remove_all(data_dir);
  std::filesystem::remove_all(out_dir);
}

}  // TEST_SUITE
