#include "mocov/covariance.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "mocov/pnm.hpp"
#include "mocov/textio.hpp"

namespace mocov {

namespace {

void check_stack(const FeatureStack& stack) {
  if (stack.count() < 2)
    throw std::invalid_argument("covariance: need at least 2 samples");
  for (double v : stack.samples)
    if (!std::isfinite(v))
      throw std::invalid_argument("covariance: non-finite sample value");
}

}  // namespace

IntegralStats::IntegralStats(int d)
    : d_(d),
      shift_(Eigen::VectorXd::Zero(d)),
      sum_(Eigen::VectorXd::Zero(d)),
      sumsq_(Eigen::MatrixXd::Zero(d, d)) {}

void IntegralStats::add(const double* sample) {
  Eigen::Map<const Eigen::VectorXd> f(sample, d_);
  if (!have_shift_) {
    shift_ = f;
    have_shift_ = true;
  }
  Eigen::VectorXd c = f - shift_;
  sum_ += c;
  sumsq_.selfadjointView<Eigen::Lower>().rankUpdate(c, 1.0);
  ++n_;
}

void IntegralStats::add(const Eigen::VectorXd& sample) {
  if (sample.size() != d_)
    throw std::invalid_argument("IntegralStats: sample dimension mismatch");
  add(sample.data());
}

void IntegralStats::merge(const IntegralStats& other) {
  if (other.d_ != d_) throw std::invalid_argument("IntegralStats: dimension mismatch");
  if (other.n_ == 0) return;
  if (!have_shift_) {
    *this = other;
    return;
  }
  // Rebase the other accumulator onto this shift:
  //   sum(f - s1) = sum(f - s2) + n2*(s2 - s1)
  //   sum((f-s1)(f-s1)^T) = sum((f-s2)(f-s2)^T) + q*sum(f-s2)^T + sum(f-s2)*q^T + n2*q*q^T
  // with q = s2 - s1.
  Eigen::VectorXd q = other.shift_ - shift_;
  Eigen::MatrixXd other_sq = other.sumsq_.selfadjointView<Eigen::Lower>();
  sumsq_.triangularView<Eigen::Lower>() +=
      (other_sq + q * other.sum_.transpose() + other.sum_ * q.transpose() +
       static_cast<double>(other.n_) * q * q.transpose());
  sum_ += other.sum_ + static_cast<double>(other.n_) * q;
  n_ += other.n_;
}

Eigen::VectorXd IntegralStats::mean() const {
  if (n_ == 0) throw std::invalid_argument("IntegralStats: no samples");
  return shift_ + sum_ / static_cast<double>(n_);
}

Eigen::MatrixXd IntegralStats::covariance() const {
  if (n_ < 2) throw std::invalid_argument("IntegralStats: need at least 2 samples");
  const double n = static_cast<double>(n_);
  Eigen::VectorXd mu = sum_ / n;  // mean in shifted coordinates
  Eigen::MatrixXd full = sumsq_.selfadjointView<Eigen::Lower>();
  Eigen::MatrixXd c = (full - n * mu * mu.transpose()) / (n - 1.0);
  return Eigen::MatrixXd(0.5 * (c + c.transpose()));
}

CovarianceDescriptor covariance_direct(const FeatureStack& stack) {
  check_stack(stack);
  const int d = stack.dim;
  const long n = static_cast<long>(stack.count());

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  for (long i = 0; i < n; ++i)
    mu += Eigen::Map<const Eigen::VectorXd>(stack.sample(i), d);
  mu /= static_cast<double>(n);

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd dev(d);
  for (long i = 0; i < n; ++i) {
    dev = Eigen::Map<const Eigen::VectorXd>(stack.sample(i), d) - mu;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(dev, 1.0);
  }
  CovarianceDescriptor out;
  out.C = acc.selfadjointView<Eigen::Lower>();
  out.C /= static_cast<double>(n - 1);
  out.d = d;
  out.n = n;
  return out;
}

CovarianceDescriptor covariance_integral(const FeatureStack& stack) {
  check_stack(stack);
  IntegralStats stats(stack.dim);
  const long n = static_cast<long>(stack.count());
  for (long i = 0; i < n; ++i) stats.add(stack.sample(i));
  CovarianceDescriptor out;
  out.C = stats.covariance();
  out.d = stack.dim;
  out.n = n;
  return out;
}

double regularize_epsilon(const Eigen::MatrixXd& C, const RegularizeParams& params) {
  const double scale = C.trace() / static_cast<double>(C.rows());
  return std::max(params.rel * scale, params.floor);
}

Eigen::MatrixXd regularize(const Eigen::MatrixXd& C, const RegularizeParams& params) {
  if (C.rows() != C.cols())
    throw std::invalid_argument("regularize: matrix must be square");
  const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  if (asym > 1e-9 * scale)
    throw std::invalid_argument("regularize: input not symmetric");
  return C + regularize_epsilon(C, params) * Eigen::MatrixXd::Identity(C.rows(), C.cols());
}

Eigen::VectorXd pack_upper(const Eigen::MatrixXd& sym) {
  const int d = static_cast<int>(sym.rows());
  Eigen::VectorXd v((d * d + d) / 2);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) v[k++] = sym(i, j);
  return v;
}

Eigen::MatrixXd unpack_upper(const Eigen::VectorXd& v, int d) {
  if (v.size() != (d * d + d) / 2)
    throw std::invalid_argument("unpack_upper: length inconsistent with dimension");
  Eigen::MatrixXd m(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      m(i, j) = v[k];
      m(j, i) = v[k];
      ++k;
    }
  return m;
}

std::string serialize_descriptor(const DescriptorRecord& rec) {
  std::ostringstream out;
  out << "mocov-desc 1\n";
  out << "video " << rec.video_id << "\n";
  out << "clip " << rec.clip_index << "\n";
  out << "label " << rec.label << "\n";
  out << "group " << rec.group_id << "\n";
  out << "d " << rec.d << "\n";
  out << "n " << rec.n << "\n";
  Eigen::VectorXd utri = pack_upper(rec.cov);
  out << "cov";
  for (int i = 0; i < utri.size(); ++i) out << " " << fmt_g17(utri[i]);
  out << "\n";
  out << "logw " << (rec.log_weighted ? 1 : 0) << "\n";
  out << "log";
  for (int i = 0; i < rec.log_vec.size(); ++i) out << " " << fmt_g17(rec.log_vec[i]);
  out << "\n";
  out << "end\n";
  return out.str();
}

namespace {
std::string expect_line(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("descriptor: truncated record in " + origin);
  return line;
}

Eigen::VectorXd parse_values(const std::vector<std::string>& toks, size_t from,
                             const std::string& origin) {
  Eigen::VectorXd v(static_cast<long>(toks.size() - from));
  for (size_t i = from; i < toks.size(); ++i) {
    char* end = nullptr;
    v[static_cast<long>(i - from)] = std::strtod(toks[i].c_str(), &end);
    if (end == toks[i].c_str())
      throw std::runtime_error("descriptor: bad numeric value in " + origin);
  }
  return v;
}
}  // namespace

DescriptorRecord parse_descriptor(std::istream& in, const std::string& origin) {
  DescriptorRecord rec;
  std::string line = expect_line(in, origin);
  if (line != "mocov-desc 1")
    throw std::runtime_error("descriptor: bad header in " + origin + ": '" + line + "'");
  Eigen::VectorXd cov_utri;
  bool saw_end = false;
  while (std::getline(in, line)) {
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];
    if (key == "end") {
      saw_end = true;
      break;
    }
    if (key == "video" && toks.size() == 2)
      rec.video_id = toks[1];
    else if (key == "clip" && toks.size() == 2)
      rec.clip_index = std::stoi(toks[1]);
    else if (key == "label" && toks.size() == 2)
      rec.label = toks[1];
    else if (key == "group" && toks.size() == 2)
      rec.group_id = toks[1];
    else if (key == "d" && toks.size() == 2)
      rec.d = std::stoi(toks[1]);
    else if (key == "n" && toks.size() == 2)
      rec.n = std::stol(toks[1]);
    else if (key == "cov")
      cov_utri = parse_values(toks, 1, origin);
    else if (key == "logw" && toks.size() == 2)
      rec.log_weighted = toks[1] == "1";
    else if (key == "log")
      rec.log_vec = parse_values(toks, 1, origin);
    else
      throw std::runtime_error("descriptor: unknown field '" + key + "' in " + origin);
  }
  if (!saw_end) throw std::runtime_error("descriptor: missing end marker in " + origin);
  if (rec.d <= 0) throw std::runtime_error("descriptor: missing dimension in " + origin);
  const long l = static_cast<long>(rec.d) * (rec.d + 1) / 2;
  if (cov_utri.size() != l)
    throw std::runtime_error("descriptor: covariance entry count mismatch in " + origin);
  if (rec.log_vec.size() != 0 && rec.log_vec.size() != l)
    throw std::runtime_error("descriptor: log vector length mismatch in " + origin);
  rec.cov = unpack_upper(cov_utri, rec.d);
  return rec;
}

void save_descriptor(const std::filesystem::path& path, const DescriptorRecord& rec) {
  atomic_write_file(path, serialize_descriptor(rec));
}

DescriptorRecord load_descriptor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("descriptor: cannot open " + path.string());
  return parse_descriptor(in, path.string());
}

}  // namespace mocov
