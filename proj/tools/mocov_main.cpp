// mocov - clip-level covariance descriptors of motion and appearance
// features, with sparse-representation classifiers on top.
//
// Subcommands: synth, extract, train, eval, ablate.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "mocov/config.hpp"
#include "mocov/textio.hpp"
#include "mocov/dataset.hpp"
#include "mocov/pipeline.hpp"
#include "mocov/pnm.hpp"
#include "mocov/synth.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // section.key=value
  std::string mask;
  std::string method;
  std::string test_groups;
  int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
  cmd->add_option("--config", opts->config_path, "pipeline config file");
  cmd->add_option("--set", opts->overrides,
                  "override a config key, e.g. --set omp.sparsity=8")
      ->type_name("SECTION.KEY=VALUE");
  cmd->add_option("--mask", opts->mask, "feature mask preset (AF|MF|AMF|gesture)");
  cmd->add_option("--method", opts->method, "classifier (omp|tsc|nn|all)");
  cmd->add_option("--test-groups", opts->test_groups,
                  "comma-separated group ids held out for testing");
  cmd->add_option("--seed", opts->seed, "override the pipeline seed");
}

mocov::PipelineConfig build_config(const CommonOpts& opts) {
  mocov::PipelineConfig config;
  if (!opts.config_path.empty()) config = mocov::PipelineConfig::load(opts.config_path);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects section.key=value, got '" + kv + "'");
    config.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.mask.empty()) config.apply_override("features.mask", opts.mask);
  if (!opts.method.empty()) config.apply_override("pipeline.method", opts.method);
  if (!opts.test_groups.empty())
    config.apply_override("split.test_groups", opts.test_groups);
  if (opts.seed >= 0)
    config.apply_override("pipeline.seed", std::to_string(opts.seed));
  config.validate();
  return config;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clip-level covariance descriptors for action and gesture recognition"};
  app.require_subcommand(0, 1);

  std::string default_config_out;
  app.add_option("--write-default-config", default_config_out,
                 "write the annotated default config to a file and exit");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  mocov::SynthSpec spec;
  std::string synth_out, synth_classes;
  bool synth_gray = false;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--classes", synth_classes,
                    "comma-separated class names (translate|oscillate|rotate kinds)");
  synth->add_option("--videos-per-class", spec.videos_per_class, "videos per class");
  synth->add_option("--frames", spec.frames, "frames per video");
  synth->add_option("--width", spec.width, "frame width");
  synth->add_option("--height", spec.height, "frame height");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_flag("--gray", synth_gray, "write grayscale P5 frames instead of P6");
  synth->add_flag("--depth", spec.depth, "write 16-bit synthetic depth frames");
  synth->add_flag("--color-context", spec.color_context,
                  "give each class a distinctive tint");

  // extract
  auto* extract = app.add_subcommand("extract", "compute per-clip descriptors");
  CommonOpts extract_opts;
  std::string extract_manifest, extract_out, extract_flow_dump;
  extract->add_option("--manifest", extract_manifest, "dataset manifest")->required();
  extract->add_option("--out", extract_out, "descriptor store directory")->required();
  extract->add_option("--dump-flow", extract_flow_dump,
                      "directory for per-video flow debug pixmaps");
  add_common(extract, &extract_opts);

  // train
  auto* train = app.add_subcommand("train", "build a dictionary from the training split");
  CommonOpts train_opts;
  std::string train_manifest, train_store, train_out;
  bool train_one_shot = false;
  train->add_option("--manifest", train_manifest, "dataset manifest")->required();
  train->add_option("--store", train_store, "descriptor store directory")->required();
  train->add_option("--out", train_out, "dictionary file")->required();
  train->add_flag("--one-shot", train_one_shot, "keep one exemplar video per class");
  add_common(train, &train_opts);

  // eval
  auto* eval = app.add_subcommand("eval", "classify the test split and report metrics");
  CommonOpts eval_opts;
  std::string eval_manifest, eval_store, eval_dict, eval_out, eval_tsc_diag;
  eval->add_option("--manifest", eval_manifest, "dataset manifest")->required();
  eval->add_option("--store", eval_store, "descriptor store directory")->required();
  eval->add_option("--dict", eval_dict, "dictionary file")->required();
  eval->add_option("--out", eval_out, "report output directory")->required();
  eval->add_option("--tsc-diagnostics", eval_tsc_diag,
                   "append per-iteration solver diagnostics to this file");
  add_common(eval, &eval_opts);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "feature-set x method ablation table");
  CommonOpts ablate_opts;
  std::string ablate_manifest, ablate_out;
  std::string ablate_masks = "AF,MF,AMF";
  std::string ablate_methods = "omp,tsc";
  ablate->add_option("--manifest", ablate_manifest, "dataset manifest")->required();
  ablate->add_option("--out", ablate_out, "report output directory")->required();
  ablate->add_option("--masks", ablate_masks, "comma-separated mask presets");
  ablate->add_option("--methods", ablate_methods, "comma-separated methods");
  add_common(ablate, &ablate_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!default_config_out.empty()) {
      mocov::atomic_write_file(default_config_out,
                               mocov::PipelineConfig::default_config_text());
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help() << "\n";
      return 1;
    }

    if (synth->parsed()) {
      if (!synth_classes.empty()) spec.classes = split_csv(synth_classes);
      spec.color = !synth_gray;
      auto manifest = mocov::synth_dataset(spec, synth_out);
      std::cout << "wrote " << manifest.videos.size() << " videos under " << synth_out
                << "\n";
    } else if (extract->parsed()) {
      auto config = build_config(extract_opts);
      auto manifest = mocov::DatasetManifest::load(extract_manifest);
      mocov::ExtractOptions opts;
      if (!extract_flow_dump.empty()) opts.flow_dump_dir = extract_flow_dump;
      auto stats = mocov::extract_dataset(manifest, config, extract_out, opts);
      std::cout << "extracted " << stats.clips << " clips from " << stats.videos
                << " videos";
      if (stats.skipped_videos || stats.skipped_clips)
        std::cout << " (skipped " << stats.skipped_videos << " videos, "
                  << stats.skipped_clips << " clips)";
      std::cout << "\n";
    } else if (train->parsed()) {
      auto config = build_config(train_opts);
      if (train_one_shot) config.one_shot = true;
      auto manifest = mocov::DatasetManifest::load(train_manifest);
      auto store = mocov::DescriptorStore::open(train_store);
      auto dict = mocov::train_dictionary(store, manifest, config, train_out);
      std::map<std::string, int> histogram;
      for (const auto& a : dict.atoms) histogram[a.label]++;
      std::cout << "dictionary: " << dict.atoms.size() << " atoms, d=" << dict.d;
      for (const auto& [cls, count] : histogram) std::cout << " " << cls << "=" << count;
      std::cout << "\n";
    } else if (eval->parsed()) {
      auto config = build_config(eval_opts);
      std::ofstream diag_file;
      if (!eval_tsc_diag.empty()) {
        diag_file.open(eval_tsc_diag, std::ios::app);
        if (!diag_file)
          throw std::runtime_error("cannot open " + eval_tsc_diag + " for writing");
        config.tsc.solver.diagnostics = [&diag_file](const std::string& line) {
          diag_file << line << "\n";
        };
      }
      auto manifest = mocov::DatasetManifest::load(eval_manifest);
      auto store = mocov::DescriptorStore::open(eval_store);
      auto dict = mocov::load_dictionary(eval_dict);
      auto evals = mocov::evaluate_dataset(store, manifest, dict, config, eval_out);
      for (const auto& me : evals)
        std::cout << me.method << " accuracy "
                  << mocov::fmt_g17(me.report.accuracy) << "\n";
    } else if (ablate->parsed()) {
      auto config = build_config(ablate_opts);
      auto manifest = mocov::DatasetManifest::load(ablate_manifest);
      auto cells = mocov::run_ablation(manifest, config, split_csv(ablate_masks),
                                       split_csv(ablate_methods), ablate_out);
      for (const auto& cell : cells)
        std::cout << cell.mask_name << "/" << cell.method << " accuracy "
                  << mocov::fmt_g17(cell.report.accuracy) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
