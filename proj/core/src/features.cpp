#include "mocov/features.hpp"

#include <cmath>
#include <stdexcept>

namespace mocov {

namespace {
inline size_t idx(int x, int y, int w) { return static_cast<size_t>(y) * w + x; }

void gray_derivatives(const std::vector<double>& gray, AppearanceFeatures& out,
                      int w, int h) {
  out.ix.resize(gray.size());
  out.iy.resize(gray.size());
  out.ixx.resize(gray.size());
  out.iyy.resize(gray.size());
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return gray[idx(x, y, w)];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      size_t i = idx(x, y, w);
      if (x == 0)
        out.ix[i] = at(1, y) - at(0, y);
      else if (x == w - 1)
        out.ix[i] = at(w - 1, y) - at(w - 2, y);
      else
        out.ix[i] = 0.5 * (at(x + 1, y) - at(x - 1, y));
      if (y == 0)
        out.iy[i] = at(x, 1) - at(x, 0);
      else if (y == h - 1)
        out.iy[i] = at(x, h - 1) - at(x, h - 2);
      else
        out.iy[i] = 0.5 * (at(x, y + 1) - at(x, y - 1));
      out.ixx[i] = at(x + 1, y) - 2.0 * at(x, y) + at(x - 1, y);
      out.iyy[i] = at(x, y + 1) - 2.0 * at(x, y) + at(x, y - 1);
    }
}
}  // namespace

FeatureSetMask FeatureSetMask::full() { return FeatureSetMask{}; }

FeatureSetMask FeatureSetMask::motion_only() {
  FeatureSetMask m;
  m.intensity = false;
  m.gradients = false;
  return m;
}

FeatureSetMask FeatureSetMask::appearance_only() {
  FeatureSetMask m;
  m.basic_motion = false;
  m.kinematic = false;
  return m;
}

FeatureSetMask FeatureSetMask::gesture() {
  FeatureSetMask m;
  m.intensity = false;
  m.kinematic_higher = false;
  m.position = true;
  return m;
}

FeatureSetMask FeatureSetMask::parse(const std::string& name) {
  if (name == "AMF" || name == "full" || name == "all") return full();
  if (name == "MF" || name == "motion") return motion_only();
  if (name == "AF" || name == "appearance") return appearance_only();
  if (name == "gesture") return gesture();
  throw std::invalid_argument("unknown feature mask '" + name + "'");
}

std::string FeatureSetMask::describe() const {
  std::string s;
  auto add = [&](bool on, const char* tag) {
    if (on) {
      if (!s.empty()) s += "+";
      s += tag;
    }
  };
  add(intensity, "fi");
  add(gradients, "fg");
  add(basic_motion, "fm");
  add(kinematic, kinematic_higher ? "fk" : "fk4");
  add(position, "pos");
  return s;
}

AppearanceFeatures appearance_features(const ColorFrame& frame) {
  AppearanceFeatures out;
  out.width = frame.width;
  out.height = frame.height;
  const size_t n = frame.r.size();
  out.r.resize(n);
  out.g.resize(n);
  out.b.resize(n);
  std::vector<double> gray(n);
  for (size_t i = 0; i < n; ++i) {
    out.r[i] = frame.r[i] / 255.0;
    out.g[i] = frame.g[i] / 255.0;
    out.b[i] = frame.b[i] / 255.0;
    gray[i] = (0.299 * frame.r[i] + 0.587 * frame.g[i] + 0.114 * frame.b[i]) / 255.0;
  }
  gray_derivatives(gray, out, frame.width, frame.height);
  return out;
}

AppearanceFeatures appearance_features_gray(const GrayFrame& frame) {
  AppearanceFeatures out;
  out.width = frame.width;
  out.height = frame.height;
  std::vector<double> gray(frame.pix.size());
  for (size_t i = 0; i < gray.size(); ++i) gray[i] = frame.pix[i] / 255.0;
  gray_derivatives(gray, out, frame.width, frame.height);
  return out;
}

double divergence(const Eigen::Matrix2d& g) { return g(0, 0) + g(1, 1); }

double vorticity(const Eigen::Matrix2d& g) { return g(1, 0) - g(0, 1); }

std::pair<double, double> divergence_vorticity(const Eigen::Matrix2d& g) {
  return {divergence(g), vorticity(g)};
}

std::pair<double, double> tensor_invariants(const Eigen::Matrix2d& m,
                                            bool standard_tau2) {
  const double tr = m.trace();
  const double tr2 = (m * m).trace();
  const double tau2 = standard_tau2 ? 0.5 * (tr * tr - tr2) : 0.5 * (tr * tr + tr2);
  const double tau3 = -m.determinant();
  return {tau2, tau3};
}

std::pair<Eigen::Matrix2d, Eigen::Matrix2d> strain_rotation(const Eigen::Matrix2d& g) {
  Eigen::Matrix2d s = 0.5 * (g + g.transpose());
  Eigen::Matrix2d r = 0.5 * (g - g.transpose());
  return {s, r};
}

Eigen::Matrix<double, 7, 1> kinematic_vector(const Eigen::Matrix2d& g,
                                             bool standard_tau2) {
  auto [s, r] = strain_rotation(g);
  auto [t2g, t3g] = tensor_invariants(g, standard_tau2);
  auto [t2s, t3s] = tensor_invariants(s, standard_tau2);
  auto [t2r, t3r] = tensor_invariants(r, standard_tau2);
  (void)t2r;
  Eigen::Matrix<double, 7, 1> f;
  f << divergence(g), vorticity(g), t2g, t3g, t2s, t3s, t3r;
  return f;
}

std::vector<uint8_t> depth_mask(const DepthFrame& depth, uint16_t threshold) {
  std::vector<uint8_t> mask(depth.depth.size());
  for (size_t i = 0; i < mask.size(); ++i)
    mask[i] = depth.depth[i] < threshold ? 1 : 0;
  return mask;
}

BasicMotionMaps basic_motion_features(const ClipFrames& clip,
                                      const std::vector<FlowField>& flows,
                                      int frame_index) {
  const int T = static_cast<int>(clip.gray.size());
  if (T < 2)
    throw std::invalid_argument("basic_motion_features: need at least 2 frames");
  if (frame_index < 0 || frame_index >= T)
    throw std::invalid_argument("basic_motion_features: frame index out of range");
  if (static_cast<int>(flows.size()) != T - 1)
    throw std::invalid_argument("basic_motion_features: expected one flow per frame pair");

  const int nflows = static_cast<int>(flows.size());
  const int fi = std::min(frame_index, nflows - 1);
  const FlowField& flow = flows[fi];
  const GrayFrame& ref = clip.gray[frame_index];
  if (flow.width != ref.width || flow.height != ref.height)
    throw std::invalid_argument("basic_motion_features: flow dimension mismatch");

  FlowDerivatives deriv =
      nflows >= 2 ? flow_derivatives(flows, fi) : flow_gradients_spatial(flow);

  const GrayFrame& ga = frame_index + 1 < T ? clip.gray[frame_index]
                                            : clip.gray[frame_index - 1];
  const GrayFrame& gb = frame_index + 1 < T ? clip.gray[frame_index + 1]
                                            : clip.gray[frame_index];

  BasicMotionMaps out;
  out.width = ref.width;
  out.height = ref.height;
  const size_t n = ref.pix.size();
  out.didt.resize(n);
  out.u = flow.u;
  out.v = flow.v;
  out.du_dt = deriv.du_dt;
  out.dv_dt = deriv.dv_dt;
  for (size_t i = 0; i < n; ++i) out.didt[i] = (gb.pix[i] - ga.pix[i]) / 255.0;
  return out;
}

FeatureStack assemble_stack(const ClipFrames& clip, const std::vector<FlowField>& flows,
                            const FeatureSetMask& mask) {
  const int T = static_cast<int>(clip.gray.size());
  if (T == 0) throw std::invalid_argument("assemble_stack: empty clip");
  const bool motion_needed = mask.basic_motion || mask.kinematic;
  if (motion_needed && T < 2)
    throw std::invalid_argument("assemble_stack: motion features need at least 2 frames");
  if (mask.intensity && !clip.has_color())
    throw std::invalid_argument("assemble_stack: intensity block requested on grayscale input");
  if (mask.dim() == 0)
    throw std::invalid_argument("assemble_stack: mask selects zero features");
  if (motion_needed && static_cast<int>(flows.size()) != T - 1)
    throw std::invalid_argument("assemble_stack: expected one flow field per frame pair");
  if (!clip.validity.empty() && static_cast<int>(clip.validity.size()) != T)
    throw std::invalid_argument("assemble_stack: validity mask count must match frame count");

  const int w = clip.gray[0].width, h = clip.gray[0].height;
  for (const auto& f : clip.gray)
    if (f.width != w || f.height != h)
      throw std::invalid_argument("assemble_stack: inconsistent frame dimensions");
  if (!clip.validity.empty())
    for (const auto& m : clip.validity)
      if (m.size() != static_cast<size_t>(w) * h)
        throw std::invalid_argument("assemble_stack: validity mask dimension mismatch");

  FeatureStack stack;
  stack.mask = mask;
  stack.dim = mask.dim();
  stack.samples.reserve(static_cast<size_t>(w) * h * T * stack.dim);

  const int nflows = static_cast<int>(flows.size());
  for (int t = 0; t < T; ++t) {
    AppearanceFeatures app;
    if (mask.intensity || mask.gradients)
      app = clip.has_color() ? appearance_features(clip.color[t])
                             : appearance_features_gray(clip.gray[t]);

    FlowDerivatives deriv;
    if (motion_needed) {
      const int fi = std::min(t, nflows - 1);
      if (flows[fi].width != w || flows[fi].height != h)
        throw std::invalid_argument("assemble_stack: flow dimension mismatch");
      deriv = nflows >= 2 ? flow_derivatives(flows, fi)
                          : flow_gradients_spatial(flows[fi]);
    }
    BasicMotionMaps motion;
    if (mask.basic_motion) motion = basic_motion_features(clip, flows, t);

    const std::vector<uint8_t>* valid =
        clip.validity.empty() ? nullptr : &clip.validity[t];

    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const size_t i = idx(x, y, w);
        if (valid && !(*valid)[i]) continue;
        if (mask.intensity) {
          stack.samples.push_back(app.r[i]);
          stack.samples.push_back(app.g[i]);
          stack.samples.push_back(app.b[i]);
        }
        if (mask.gradients) {
          stack.samples.push_back(app.ix[i]);
          stack.samples.push_back(app.iy[i]);
          stack.samples.push_back(app.ixx[i]);
          stack.samples.push_back(app.iyy[i]);
        }
        if (mask.basic_motion) {
          stack.samples.push_back(motion.didt[i]);
          stack.samples.push_back(motion.u[i]);
          stack.samples.push_back(motion.v[i]);
          stack.samples.push_back(motion.du_dt[i]);
          stack.samples.push_back(motion.dv_dt[i]);
        }
        if (mask.kinematic) {
          Eigen::Matrix2d g;
          g << deriv.du_dx[i], deriv.du_dy[i], deriv.dv_dx[i], deriv.dv_dy[i];
          auto fk = kinematic_vector(g, mask.standard_tau2);
          stack.samples.push_back(fk[0]);
          stack.samples.push_back(fk[1]);
          stack.samples.push_back(fk[2]);
          stack.samples.push_back(fk[3]);
          if (mask.kinematic_higher) {
            stack.samples.push_back(fk[4]);
            stack.samples.push_back(fk[5]);
            stack.samples.push_back(fk[6]);
          }
        }
        if (mask.position) {
          stack.samples.push_back(w > 1 ? static_cast<double>(x) / (w - 1) : 0.0);
          stack.samples.push_back(h > 1 ? static_cast<double>(y) / (h - 1) : 0.0);
          stack.samples.push_back(T > 1 ? static_cast<double>(t) / (T - 1) : 0.0);
        }
      }
  }
  return stack;
}

}  // namespace mocov
