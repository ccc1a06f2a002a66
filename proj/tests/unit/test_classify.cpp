#include <doctest.h>

#include <algorithm>
#include <random>

#include "mocov/classify.hpp"
#include "test_util.hpp"

using namespace mocov;

TEST_SUITE("classify") {

TEST_CASE("majority vote picks the modal label") {
  CHECK(majority_vote({{"run", 0.5}, {"run", 0.4}, {"walk", 0.1}}) == "run");
  CHECK(majority_vote({{"wave", 0.9}}) == "wave");
}

TEST_CASE("vote ties break to the smallest mean score, then label") {
  // enumeration of the tie-break rule: label a mean 0.3, label b mean 0.5
  CHECK(majority_vote({{"a", 0.3}, {"b", 0.5}}) == "a");
  CHECK(majority_vote({{"b", 0.3}, {"a", 0.5}}) == "b");
  // equal means fall to the lexicographically smaller label
  CHECK(majority_vote({{"b", 0.4}, {"a", 0.4}}) == "a");
  // two clips each: means (0.25, 0.2) -> b wins
  CHECK(majority_vote({{"a", 0.1}, {"a", 0.4}, {"b", 0.2}, {"b", 0.2}}) == "b");
}

TEST_CASE("vote is invariant to clip order") {
  std::mt19937_64 rng(13001);
  std::vector<ClipPrediction> clips = {
      {"x", 0.3}, {"y", 0.2}, {"x", 0.5}, {"z", 0.1}, {"y", 0.6}, {"x", 0.2}};
  const std::string expected = majority_vote(clips);
  for (int trial = 0; trial < 20; ++trial) {
    for (size_t i = clips.size(); i > 1; --i)
      std::swap(clips[i - 1], clips[static_cast<size_t>(testutil::uniform01(rng) * i)]);
    CHECK(majority_vote(clips) == expected);
  }
}

TEST_CASE("empty vote is rejected") {
  CHECK_THROWS_AS(majority_vote({}), std::invalid_argument);
}

TEST_CASE("nearest neighbor exact and midpoint cases") {
  std::mt19937_64 rng(13002);
  std::vector<LogDescriptor> train;
  for (int i = 0; i < 5; ++i) {
    LogDescriptor d;
    d.v = testutil::random_vector(rng, 12);
    d.label = "c" + std::to_string(i);
    train.push_back(d);
  }
  NnResult exact = nn_classify_clip(train[3].v, train);
  CHECK(exact.label == "c3");
  CHECK(exact.distance == doctest::Approx(0.0));

  // midpoint nudged toward A
  Eigen::VectorXd a = Eigen::VectorXd::Zero(12), b = Eigen::VectorXd::Ones(12);
  std::vector<LogDescriptor> two = {{a, 12, "A", "", "", 0}, {b, 12, "B", "", "", 0}};
  Eigen::VectorXd query = 0.5 * (a + b) - 1e-6 * Eigen::VectorXd::Ones(12);
  CHECK(nn_classify_clip(query, two).label == "A");
}

TEST_CASE("nearest neighbor matches the exhaustive scan oracle") {
  std::mt19937_64 rng(13003);
  std::vector<LogDescriptor> train;
  for (int i = 0; i < 30; ++i) {
    LogDescriptor d;
    d.v = testutil::random_vector(rng, 8);
    d.label = "c" + std::to_string(i % 4);
    train.push_back(d);
  }
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd q = testutil::random_vector(rng, 8);
    NnResult got = nn_classify_clip(q, train);
    int best = 0;
    for (int i = 1; i < 30; ++i)
      if ((train[i].v - q).norm() < (train[best].v - q).norm()) best = i;
    CHECK(got.index == best);
    CHECK(got.label == train[best].label);
    CHECK(got.distance == doctest::Approx((train[best].v - q).norm()));
  }
}

TEST_CASE("nearest neighbor rejects an empty training set") {
  CHECK_THROWS_AS(nn_classify_clip(Eigen::VectorXd::Ones(3), {}), std::invalid_argument);
}

TEST_CASE("perfect predictions give an identity confusion and unit F") {
  std::vector<std::string> labels = {"a", "b", "c", "a", "b", "c"};
  EvalReport rep = evaluate(labels, labels, {"a", "b", "c"});
  CHECK(rep.accuracy == doctest::Approx(1.0));
  for (int i = 0; i < 3; ++i) {
    CHECK(rep.confusion(i, i) == 2);
    CHECK(rep.f_measure[i] == doctest::Approx(1.0));
  }
  CHECK(rep.confusion.sum() == 6);
}

TEST_CASE("all-one-class predictions on a balanced set") {
  std::vector<std::string> truth = {"a", "a", "b", "b"};
  std::vector<std::string> pred = {"a", "a", "a", "a"};
  EvalReport rep = evaluate(pred, truth, {"a", "b"});
  CHECK(rep.recall[0] == doctest::Approx(1.0));
  CHECK(rep.precision[0] == doctest::Approx(0.5));
  CHECK(rep.f_measure[0] == doctest::Approx(2.0 / 3.0));
  CHECK(rep.precision[1] == 0.0);
  CHECK(rep.recall[1] == 0.0);
  CHECK(rep.f_measure[1] == 0.0);  // P + R = 0 defined as 0
}

TEST_CASE("F equals 0.5 when precision and recall are both 0.5") {
  // class a: one of two predictions correct, one of two truths found
  std::vector<std::string> truth = {"a", "a", "b", "b"};
  std::vector<std::string> pred = {"a", "b", "a", "b"};
  EvalReport rep = evaluate(pred, truth, {"a", "b"});
  CHECK(rep.precision[0] == doctest::Approx(0.5));
  CHECK(rep.recall[0] == doctest::Approx(0.5));
  CHECK(rep.f_measure[0] == doctest::Approx(0.5));
}

TEST_CASE("confusion counts are conserved") {
  std::mt19937_64 rng(13004);
  std::vector<std::string> classes = {"a", "b", "c"};
  std::vector<std::string> truth, pred;
  for (int i = 0; i < 50; ++i) {
    truth.push_back(classes[static_cast<size_t>(testutil::uniform01(rng) * 3)]);
    pred.push_back(classes[static_cast<size_t>(testutil::uniform01(rng) * 3)]);
  }
  EvalReport rep = evaluate(pred, truth, classes);
  CHECK(rep.confusion.sum() == 50);
  for (int c = 0; c < 3; ++c) {
    int truth_count = 0;
    for (const auto& t : truth) truth_count += t == classes[c];
    CHECK(rep.confusion.row(c).sum() == truth_count);
  }
}

TEST_CASE("labels outside the class set are rejected") {
  CHECK_THROWS_AS(evaluate({"z"}, {"a"}, {"a", "b"}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({"a"}, {"z"}, {"a", "b"}), std::invalid_argument);
}

}  // TEST_SUITE
