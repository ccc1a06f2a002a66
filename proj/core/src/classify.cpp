#include "mocov/classify.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace mocov {

std::string majority_vote(const std::vector<ClipPrediction>& clips) {
  if (clips.empty()) throw std::invalid_argument("majority_vote: no clip labels");

  struct Tally {
    int count = 0;
    double score_sum = 0.0;
  };
  std::map<std::string, Tally> tally;
  for (const auto& c : clips) {
    auto& t = tally[c.label];
    ++t.count;
    t.score_sum += c.score;
  }

  int best_count = 0;
  for (const auto& [label, t] : tally) best_count = std::max(best_count, t.count);

  std::string best;
  double best_mean = 0.0;
  bool first = true;
  for (const auto& [label, t] : tally) {
    if (t.count != best_count) continue;
    const double mean = t.score_sum / t.count;
    if (first || mean < best_mean || (mean == best_mean && label < best)) {
      best = label;
      best_mean = mean;
      first = false;
    }
  }
  return best;
}

NnResult nn_classify_clip(const Eigen::VectorXd& query,
                          const std::vector<LogDescriptor>& train) {
  if (train.empty()) throw std::invalid_argument("nn_classify_clip: empty training set");
  NnResult best;
  for (size_t i = 0; i < train.size(); ++i) {
    if (train[i].v.size() != query.size())
      throw std::invalid_argument("nn_classify_clip: descriptor length mismatch");
    const double dist = (train[i].v - query).norm();
    if (best.index < 0 || dist < best.distance) {
      best.distance = dist;
      best.label = train[i].label;
      best.index = static_cast<int>(i);
    }
  }
  return best;
}

EvalReport evaluate(const std::vector<std::string>& predicted,
                    const std::vector<std::string>& ground_truth,
                    const std::vector<std::string>& classes,
                    const std::string& split_id, const std::string& method) {
  if (predicted.size() != ground_truth.size())
    throw std::invalid_argument("evaluate: prediction/truth length mismatch");
  const int k = static_cast<int>(classes.size());
  auto class_index = [&](const std::string& label) {
    for (int i = 0; i < k; ++i)
      if (classes[i] == label) return i;
    throw std::invalid_argument("evaluate: label '" + label + "' outside class set");
  };

  EvalReport rep;
  rep.classes = classes;
  rep.split_id = split_id;
  rep.method = method;
  rep.confusion = Eigen::MatrixXi::Zero(k, k);
  int correct = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const int t = class_index(ground_truth[i]);
    const int p = class_index(predicted[i]);
    rep.confusion(t, p) += 1;
    if (t == p) ++correct;
  }
  rep.accuracy = predicted.empty() ? 0.0
                                   : static_cast<double>(correct) /
                                         static_cast<double>(predicted.size());

  rep.precision.resize(k);
  rep.recall.resize(k);
  rep.f_measure.resize(k);
  for (int c = 0; c < k; ++c) {
    const double tp = rep.confusion(c, c);
    const double col = rep.confusion.col(c).sum();
    const double row = rep.confusion.row(c).sum();
    rep.precision[c] = col > 0 ? tp / col : 0.0;
    rep.recall[c] = row > 0 ? tp / row : 0.0;
    const double pr = rep.precision[c] + rep.recall[c];
    rep.f_measure[c] = pr > 0 ? 2.0 * rep.precision[c] * rep.recall[c] / pr : 0.0;
  }
  return rep;
}

}  // namespace mocov
