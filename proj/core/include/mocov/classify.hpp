#pragma once

// Video-level classification: clip-label aggregation by majority vote,
// nearest-neighbor clip labeling for the one-shot setting, and evaluation
// metrics.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mocov/spd.hpp"

namespace mocov {

struct ClipPrediction {
  std::string label;
  double score = 0.0;  // residual or divergence; lower is better
};

// Modal label of the clip predictions. Ties break to the smallest mean score
// among the tied labels, then to the lexicographically smallest label.
// Throws on an empty vector.
std::string majority_vote(const std::vector<ClipPrediction>& clips);

struct NnResult {
  std::string label;
  double distance = 0.0;
  int index = -1;
};

// Label of the Euclidean-nearest training descriptor (log-Euclidean metric
// through the vectorization isometry). Ties keep the earliest index.
NnResult nn_classify_clip(const Eigen::VectorXd& query,
                          const std::vector<LogDescriptor>& train);

struct EvalReport {
  std::vector<std::string> classes;
  Eigen::MatrixXi confusion;  // rows = ground truth, cols = predicted
  std::vector<double> precision, recall, f_measure;
  double accuracy = 0.0;
  std::string split_id;
  std::string method;
};

// Standard confusion counts with per-class precision/recall/F-measure
// (F = 2PR/(P+R), 0 when P+R = 0). Labels outside the class set throw.
EvalReport evaluate(const std::vector<std::string>& predicted,
                    const std::vector<std::string>& ground_truth,
                    const std::vector<std::string>& classes,
                    const std::string& split_id = "", const std::string& method = "");

}  // namespace mocov
