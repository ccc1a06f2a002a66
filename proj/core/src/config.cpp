#include "mocov/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mocov/textio.hpp"

namespace mocov {

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw std::runtime_error("config: bad boolean for " + key + ": '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config: bad number for " + key + ": '" + v + "'");
  return d;
}

long parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for " + key + ": '" + v + "'");
  }
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

void PipelineConfig::apply_override(const std::string& dotted_key,
                                    const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos)
    throw std::runtime_error("config: expected section.key, got '" + dotted_key + "'");
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);
  const std::string full = dotted_key;

  if (section == "pipeline") {
    if (key == "clip_length")
      clip_length = static_cast<int>(parse_int(value, full));
    else if (key == "seed")
      seed = static_cast<uint64_t>(parse_int(value, full));
    else if (key == "method")
      method = value;
    else if (key == "covariance_path")
      covariance_path = value;
    else
      throw std::runtime_error("config: unknown key " + full);
  } else if (section == "features") {
    if (key == "mask")
      mask = FeatureSetMask::parse(value);
    else if (key == "intensity")
      mask.intensity = parse_bool(value, full);
    else if (key == "gradients")
      mask.gradients = parse_bool(value, full);
    else if (key == "basic_motion")
      mask.basic_motion = parse_bool(value, full);
    else if (key == "kinematic")
      mask.kinematic = parse_bool(value, full);
    else if (key == "kinematic_higher")
      mask.kinematic_higher = parse_bool(value, full);
    else if (key == "position")
      mask.position = parse_bool(value, full);
    else if (key == "standard_tau2")
      mask.standard_tau2 = parse_bool(value, full);
    else if (key == "depth_threshold")
      depth_threshold = static_cast<uint16_t>(parse_int(value, full));
    else
      throw std::runtime_error("config: unknown key " + full);
  } else if (section == "flow") {
    if (key == "alpha")
      flow.alpha = parse_double(value, full);
    else if (key == "max_iterations")
      flow.max_iterations = static_cast<int>(parse_int(value, full));
    else if (key == "tolerance")
      flow.tolerance = parse_double(value, full);
    else
      throw std::runtime_error("config: unknown key " + full);
  } else if (section == "covariance") {
    if (key == "reg_rel")
      reg.rel = parse_double(value, full);
    else if (key == "reg_floor")
      reg.floor = parse_double(value, full);
    else if (key == "vectorize_weighted")
      vectorize_weighted = parse_bool(value, full);
    else
      throw std::runtime_error("config: unknown key " + full);
  } else if (section == "omp") {
    if (key == "sparsity")
      omp.sparsity = static_cast<int>(parse_int(value, full));
    else if (key == "residual_tol")
      omp.residual_tol = parse_double(value, full);
    else
      throw std::runtime_error("config: unknown key " + full);
  } else if (section == "tsc") {
    if (key == "delta")
      tsc.delta = parse_double(value, full);
    else if (key == "stationarity_tol")
      tsc.solver.stationarity_tol = parse_double(value, full);
    else if (key == "max_iterations")
      tsc.solver.max_iterations = static_cast<int>(parse_int(value, full));
    else
      throw std::runtime_error("config: unknown key " + full);
  } else if (section == "split") {
    if (key == "test_groups")
      test_groups = parse_list(value);
    else if (key == "one_shot")
      one_shot = parse_bool(value, full);
    else
      throw std::runtime_error("config: unknown key " + full);
  } else {
    throw std::runtime_error("config: unknown section [" + section + "]");
  }
}

PipelineConfig PipelineConfig::parse(const std::string& text, const std::string& origin) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: bad section header at " + origin + ":" +
                                 std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at " + origin + ":" +
                               std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw std::runtime_error("config: key outside any section at " + origin + ":" +
                               std::to_string(lineno));
    config.apply_override(section + "." + key, value);
  }
  config.validate();
  return config;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void PipelineConfig::validate() const {
  if (clip_length < 2) throw std::runtime_error("config: clip_length must be >= 2");
  if (flow.alpha <= 0 || flow.tolerance <= 0 || flow.max_iterations < 1)
    throw std::runtime_error("config: flow parameters must be positive");
  if (reg.rel < 0 || reg.floor <= 0)
    throw std::runtime_error("config: regularization parameters must be positive");
  if (omp.sparsity < 1 || omp.residual_tol <= 0)
    throw std::runtime_error("config: omp parameters must be positive");
  if (tsc.delta < 0 || tsc.solver.stationarity_tol <= 0 || tsc.solver.max_iterations < 1)
    throw std::runtime_error("config: tsc parameters must be positive");
  if (method != "omp" && method != "tsc" && method != "nn" && method != "all")
    throw std::runtime_error("config: method must be omp, tsc, nn, or all");
  if (covariance_path != "integral" && covariance_path != "direct")
    throw std::runtime_error("config: covariance_path must be integral or direct");
  if (mask.dim() == 0) throw std::runtime_error("config: feature mask selects nothing");
}

std::vector<std::string> PipelineConfig::methods() const {
  if (method == "all") return {"omp", "tsc", "nn"};
  return {method};
}

std::string PipelineConfig::split_id() const {
  std::string s = "test=";
  for (size_t i = 0; i < test_groups.size(); ++i) {
    if (i) s += ",";
    s += test_groups[i];
  }
  return s;
}

std::string PipelineConfig::default_config_text() {
  return R"(# mocov pipeline configuration (defaults shown)

[pipeline]
clip_length = 20          # frames per non-overlapping clip (final short clip kept if >= 2)
seed = 42                 # single seed for all randomness
method = tsc              # omp | tsc | nn | all
covariance_path = integral  # integral | direct

[features]
mask = AMF                # AF | MF | AMF | gesture; individual flags below override
intensity = true          # R,G,B normalized to [0,1]
gradients = true          # dI/dx, dI/dy, d2I/dx2, d2I/dy2
basic_motion = true       # dI/dt, u, v, du/dt, dv/dt
kinematic = true          # divergence, vorticity, tau2(G), tau3(G)
kinematic_higher = true   # tau2(S), tau3(S), tau3(R)
position = false          # x, y, t normalized to [0,1]
standard_tau2 = false     # true: tau2 = (tr^2 - tr(M^2))/2 instead of plus
depth_threshold = 0       # foreground = depth < threshold; 0 disables masking

[flow]
alpha = 15                # Horn-Schunck smoothness weight (0..255 intensities)
max_iterations = 200
tolerance = 1e-4          # mean absolute update threshold

[covariance]
reg_rel = 1e-5            # epsilon = reg_rel * trace(C)/d
reg_floor = 1e-8
vectorize_weighted = true # sqrt(2) off-diagonal weighting of log descriptors

[omp]
sparsity = 10             # max atoms per sparse code
residual_tol = 1e-6       # stop when residual < tol * ||query||

[tsc]
delta = 1e-3              # l1 sparsity weight
stationarity_tol = 1e-6
max_iterations = 2000

[split]
test_groups =             # comma-separated group ids held out for testing
one_shot = false          # train on a single exemplar video per class
)";
}

}  // namespace mocov
