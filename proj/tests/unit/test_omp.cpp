#include <doctest.h>

#include <random>

#include "mocov/omp.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mocov;

namespace {

LogDescriptor make_desc(const Eigen::VectorXd& v, const std::string& label) {
  LogDescriptor d;
  d.v = v;
  d.label = label;
  return d;
}

std::vector<LogDescriptor> random_descriptors(std::mt19937_64& rng, int l, int p,
                                              int n_classes = 2) {
  std::vector<LogDescriptor> out;
  for (int j = 0; j < p; ++j)
    out.push_back(make_desc(testutil::random_vector(rng, l),
                            "class" + std::to_string(j % n_classes)));
  return out;
}

}  // namespace

TEST_SUITE("omp") {

TEST_CASE("dictionary shape, norms, and gram oracle") {
  std::mt19937_64 rng(11001);
  auto descs = random_descriptors(rng, 78, 3);
  VectorDictionary dict = build_dictionary(descs);
  CHECK(dict.atoms.rows() == 78);
  CHECK(dict.atoms.cols() == 3);
  CHECK(dict.gram.rows() == 3);
  CHECK(dict.gram.cols() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(dict.atoms.col(j).norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(dict.original_norms[j] == doctest::Approx(descs[j].v.norm()));
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(dict.gram(i, j) ==
            doctest::Approx(dict.atoms.col(i).dot(dict.atoms.col(j))).epsilon(1e-12));
}

TEST_CASE("duplicate descriptors show unit gram off-diagonal") {
  std::mt19937_64 rng(11002);
  Eigen::VectorXd v = testutil::random_vector(rng, 20);
  auto dict = build_dictionary({make_desc(v, "a"), make_desc(2.0 * v, "b"),
                                make_desc(testutil::random_vector(rng, 20), "a")});
  CHECK(dict.gram(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate dictionaries are rejected") {
  std::mt19937_64 rng(11003);
  CHECK_THROWS_AS(build_dictionary({}), std::invalid_argument);
  CHECK_THROWS_AS(build_dictionary({make_desc(Eigen::VectorXd::Zero(5), "a")}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_dictionary({make_desc(testutil::random_vector(rng, 5), "a"),
                                    make_desc(testutil::random_vector(rng, 6), "b")}),
                  std::invalid_argument);
}

TEST_CASE("a query equal to an atom is recovered exactly") {
  std::mt19937_64 rng(11004);
  auto descs = random_descriptors(rng, 30, 6);
  VectorDictionary dict = build_dictionary(descs);
  for (int j = 0; j < 6; ++j) {
    SparseCode code = batch_omp_single(dict, descs[j].v, {3, 1e-9});
    REQUIRE(code.support.size() >= 1);
    CHECK(code.support[0] == j);
    CHECK(code.coefficients[0] == doctest::Approx(descs[j].v.norm()).epsilon(1e-8));
    CHECK(code.residual_norm < 1e-8 * descs[j].v.norm());
  }
}

TEST_CASE("orthonormal dictionary selects the top correlations") {
  std::mt19937_64 rng(11005);
  const int l = 12, p = 8;
  Eigen::MatrixXd q = testutil::random_orthogonal(rng, l).leftCols(p);
  std::vector<LogDescriptor> descs;
  for (int j = 0; j < p; ++j) descs.push_back(make_desc(q.col(j), "c"));
  VectorDictionary dict = build_dictionary(descs);

  Eigen::VectorXd y = testutil::random_vector(rng, l);
  SparseCode code = batch_omp_single(dict, y, {2, 1e-12});
  REQUIRE(code.support.size() == 2);

  // brute force over all supports of size <= 2
  double best_residual = y.norm();
  std::vector<int> best_support;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      Eigen::MatrixXd a(l, i == j ? 1 : 2);
      a.col(0) = q.col(i);
      if (i != j) a.col(1) = q.col(j);
      Eigen::VectorXd x = a.colPivHouseholderQr().solve(y);
      const double r = (y - a * x).norm();
      if (r < best_residual - 1e-12) {
        best_residual = r;
        best_support = i == j ? std::vector<int>{i} : std::vector<int>{i, j};
      }
    }
  auto sorted_support = code.support;
  std::sort(sorted_support.begin(), sorted_support.end());
  std::sort(best_support.begin(), best_support.end());
  CHECK(sorted_support == best_support);
  CHECK(code.residual_norm == doctest::Approx(best_residual).epsilon(1e-8));
  // coefficients equal the inner products for orthonormal atoms
  for (size_t i = 0; i < code.support.size(); ++i)
    CHECK(code.coefficients[static_cast<long>(i)] ==
          doctest::Approx(q.col(code.support[i]).dot(y)).epsilon(1e-8));
}

TEST_CASE("batch path equals the naive oracle on random instances") {
  std::mt19937_64 rng(11006);
  auto descs = random_descriptors(rng, 24, 8);
  VectorDictionary dict = build_dictionary(descs);
  OmpParams params{3, 1e-6};
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd y = testutil::random_vector(rng, 24);
    SparseCode code = batch_omp_single(dict, y, params);
    testoracle::NaiveCode oracle =
        testoracle::naive_omp(dict.atoms, y, params.sparsity, params.residual_tol);
    CHECK(code.support == oracle.support);
    CHECK(code.residual_norm == doctest::Approx(oracle.residual).epsilon(1e-8));
    for (size_t i = 0; i < code.support.size(); ++i)
      CHECK(code.coefficients[static_cast<long>(i)] ==
            doctest::Approx(oracle.coef[static_cast<long>(i)]).epsilon(1e-8));
  }
}

TEST_CASE("residuals are monotone in the sparsity budget") {
  std::mt19937_64 rng(11007);
  auto descs = random_descriptors(rng, 20, 10);
  VectorDictionary dict = build_dictionary(descs);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd y = testutil::random_vector(rng, 20);
    double prev = y.norm();
    for (int p = 1; p <= 6; ++p) {
      SparseCode code = batch_omp_single(dict, y, {p, 1e-14});
      CHECK(code.residual_norm <= prev + 1e-10);
      prev = code.residual_norm;
    }
  }
}

TEST_CASE("residual is orthogonal to the selected span") {
  std::mt19937_64 rng(11008);
  auto descs = random_descriptors(rng, 16, 9);
  VectorDictionary dict = build_dictionary(descs);
  Eigen::VectorXd y = testutil::random_vector(rng, 16);
  SparseCode code = batch_omp_single(dict, y, {4, 1e-14});
  Eigen::VectorXd recon = Eigen::VectorXd::Zero(16);
  for (size_t i = 0; i < code.support.size(); ++i)
    recon += code.coefficients[static_cast<long>(i)] * dict.atoms.col(code.support[i]);
  Eigen::VectorXd r = y - recon;
  for (int s : code.support) CHECK(std::abs(dict.atoms.col(s).dot(r)) < 1e-8);
  CHECK(r.norm() == doctest::Approx(code.residual_norm).epsilon(1e-8));
}

TEST_CASE("exact support recovery on a low-coherence dictionary") {
  std::mt19937_64 rng(11009);
  const int l = 256, p = 16;
  std::vector<LogDescriptor> descs = random_descriptors(rng, l, p);
  VectorDictionary dict = build_dictionary(descs);
  double coherence = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      coherence = std::max(coherence, std::abs(dict.gram(i, j)));
  REQUIRE(coherence < 0.3);  // greedy selection unambiguous for these instances

  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> truth;
    while (truth.size() < 3) {
      int k = static_cast<int>(testutil::uniform01(rng) * p);
      bool dup = false;
      for (int s : truth) dup |= s == k;
      if (!dup) truth.push_back(k);
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(l);
    for (int s : truth) {
      const double c = (1.0 + testutil::uniform01(rng)) *
                       (testutil::uniform01(rng) < 0.5 ? -1.0 : 1.0);
      y += c * dict.atoms.col(s);
    }
    SparseCode code = batch_omp_single(dict, y, {3, 1e-10});
    auto got = code.support;
    std::sort(got.begin(), got.end());
    std::sort(truth.begin(), truth.end());
    CHECK(got == truth);
    CHECK(code.residual_norm < 1e-8 * y.norm());
  }
}

TEST_CASE("sparsity outside [1, p] is rejected") {
  std::mt19937_64 rng(11010);
  VectorDictionary dict = build_dictionary(random_descriptors(rng, 10, 4));
  Eigen::VectorXd y = testutil::random_vector(rng, 10);
  CHECK_THROWS_AS(batch_omp_single(dict, y, {5, 1e-6}), std::invalid_argument);
  CHECK_THROWS_AS(batch_omp_single(dict, y, {0, 1e-6}), std::invalid_argument);
  CHECK_THROWS_AS(batch_omp_single(dict, testutil::random_vector(rng, 11), {2, 1e-6}),
                  std::invalid_argument);
}

TEST_CASE("duplicate atoms trigger the degenerate stop") {
  std::mt19937_64 rng(11011);
  Eigen::VectorXd v = testutil::random_vector(rng, 12);
  auto dict = build_dictionary({make_desc(v, "a"), make_desc(3.0 * v, "b")});
  Eigen::VectorXd y = v + 0.5 * testutil::random_vector(rng, 12);
  SparseCode code = batch_omp_single(dict, y, {2, 1e-14});
  CHECK(code.degenerate);
  CHECK(code.support.size() == 1);
}

TEST_CASE("class residuals: single-class support") {
  std::mt19937_64 rng(11012);
  // class0 atoms span the query; class1 atom orthogonal-ish
  auto descs = random_descriptors(rng, 20, 6, 3);
  VectorDictionary dict = build_dictionary(descs);
  const Eigen::VectorXd y = descs[0].v;  // atom 0 has label class0
  auto codes = batch_omp(dict, {y}, {1, 1e-10});
  const SparseCode& code = codes[0];
  REQUIRE(code.support == std::vector<int>{0});
  CHECK(code.per_class_residual.at("class0") ==
        doctest::Approx(code.residual_norm).epsilon(1e-10));
  CHECK(code.per_class_residual.at("class1") == doctest::Approx(y.norm()));
  CHECK(code.per_class_residual.at("class2") == doctest::Approx(y.norm()));
  // exactly one class beats ||y||
  int better = 0;
  for (const auto& [cls, r] : code.per_class_residual)
    if (r < y.norm() - 1e-9) ++better;
  CHECK(better == 1);
}

TEST_CASE("class residuals: mixed support dominates the overall residual") {
  std::mt19937_64 rng(11013);
  auto descs = random_descriptors(rng, 30, 10, 3);
  VectorDictionary dict = build_dictionary(descs);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd y = testutil::random_vector(rng, 30);
    SparseCode code = batch_omp_single(dict, y, {4, 1e-12});
    auto residuals = class_residuals(dict, y, code);
    for (const auto& [cls, r] : residuals) {
      CHECK(r >= code.residual_norm - 1e-9);
      // explicit reconstruction oracle
      Eigen::VectorXd recon = Eigen::VectorXd::Zero(30);
      for (size_t i = 0; i < code.support.size(); ++i)
        if (dict.label(code.support[i]) == cls)
          recon += code.coefficients[static_cast<long>(i)] *
                   dict.atoms.col(code.support[i]);
      CHECK(r == doctest::Approx((y - recon).norm()).epsilon(1e-10));
    }
  }
}

}  // TEST_SUITE
