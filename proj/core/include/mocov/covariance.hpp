#pragma once

// Clip-level covariance descriptors: direct two-pass computation, the
// integral-statistics path (running sums with shifted accumulation), SPD
// regularization, and the on-disk descriptor container.
//
// Descriptor container (text, one record per clip):
//   mocov-desc 1
//   video <id>
//   clip <index>
//   label <label>
//   group <group-id>
//   d <feature count>
//   n <sample count>
//   cov <(d^2+d)/2 upper-triangular entries, row-major, %.17g>
//   logw <0|1>                (sqrt2 off-diagonal weighting of the log vector)
//   log <(d^2+d)/2 entries>   (vectorized matrix-log descriptor)
//   end

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "mocov/features.hpp"

namespace mocov {

struct CovarianceDescriptor {
  Eigen::MatrixXd C;
  int d = 0;
  long n = 0;  // sample count
  std::string video_id;
  int clip_index = 0;
  std::string label;
  std::string group_id;
};

// Running sums over a prefix ordering of samples. Accumulation is shifted by
// the first sample to keep the final subtraction well-conditioned when the
// feature mean is large.
class IntegralStats {
 public:
  explicit IntegralStats(int d);

  void add(const double* sample);
  void add(const Eigen::VectorXd& sample);
  void merge(const IntegralStats& other);

  long count() const { return n_; }
  int dim() const { return d_; }

  // Unbiased covariance from the accumulated sums: (S - n*mu*mu^T)/(n-1)
  // in shifted coordinates; the shift cancels in the covariance.
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd mean() const;

 private:
  int d_;
  long n_ = 0;
  bool have_shift_ = false;
  Eigen::VectorXd shift_, sum_;
  Eigen::MatrixXd sumsq_;
};

// Two-pass unbiased sample covariance, symmetrized by construction.
CovarianceDescriptor covariance_direct(const FeatureStack& stack);
// Single-pass path through IntegralStats. Agrees with covariance_direct to
// ~1e-8 relative Frobenius error.
CovarianceDescriptor covariance_integral(const FeatureStack& stack);

struct RegularizeParams {
  double rel = 1e-5;     // epsilon = rel * trace(C)/d
  double floor = 1e-8;   // lower bound on epsilon
};

// C + eps*I with scale-relative eps; keeps the matrix log well-defined on
// rank-deficient covariances. Input must be symmetric to tolerance.
Eigen::MatrixXd regularize(const Eigen::MatrixXd& C, const RegularizeParams& params = {});
double regularize_epsilon(const Eigen::MatrixXd& C, const RegularizeParams& params = {});

// On-disk record: the covariance plus its vectorized matrix-log descriptor.
struct DescriptorRecord {
  std::string video_id;
  int clip_index = 0;
  std::string label;
  std::string group_id;
  int d = 0;
  long n = 0;
  Eigen::MatrixXd cov;
  Eigen::VectorXd log_vec;
  bool log_weighted = true;
};

std::string serialize_descriptor(const DescriptorRecord& rec);
DescriptorRecord parse_descriptor(std::istream& in, const std::string& origin);

void save_descriptor(const std::filesystem::path& path, const DescriptorRecord& rec);
DescriptorRecord load_descriptor(const std::filesystem::path& path);

// Upper-triangle (row-major) packing used by the container; plain entries,
// no weighting.
Eigen::VectorXd pack_upper(const Eigen::MatrixXd& sym);
Eigen::MatrixXd unpack_upper(const Eigen::VectorXd& v, int d);

}  // namespace mocov
