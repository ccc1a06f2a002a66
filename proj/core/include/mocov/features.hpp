#pragma once

// Per-pixel feature stacks: appearance (normalized intensities plus grayscale
// derivatives), basic motion (frame difference, flow, flow rate), and
// kinematic invariants of the flow gradient tensor. Feature blocks are
// selectable through a mask so ablations and the gesture variant reuse one
// assembly path.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mocov/flow.hpp"
#include "mocov/image.hpp"

namespace mocov {

// Which feature blocks enter the stack. Block order is fixed:
// intensity (3) | gradients (4) | basic motion (5) | kinematic (4 or 7) | position (3).
struct FeatureSetMask {
  bool intensity = true;      // R, G, B normalized to [0,1]
  bool gradients = true;      // dI/dx, dI/dy, d2I/dx2, d2I/dy2
  bool basic_motion = true;   // dI/dt, u, v, du/dt, dv/dt
  bool kinematic = true;      // div, vort, tau2(G), tau3(G)
  bool kinematic_higher = true;  // + tau2(S), tau3(S), tau3(R)
  bool position = false;      // x, y, t normalized to [0,1]
  // Second invariant variant: false = 0.5*(tr^2 + tr(M^2)) as used throughout,
  // true = the textbook 0.5*(tr^2 - tr(M^2)).
  bool standard_tau2 = false;

  int dim() const {
    int d = 0;
    if (intensity) d += 3;
    if (gradients) d += 4;
    if (basic_motion) d += 5;
    if (kinematic) d += kinematic_higher ? 7 : 4;
    if (position) d += 3;
    return d;
  }

  static FeatureSetMask full();             // d = 19
  static FeatureSetMask motion_only();      // d = 12
  static FeatureSetMask appearance_only();  // d = 7
  static FeatureSetMask gesture();          // d = 16
  // Accepts AF | MF | AMF | full | motion | appearance | gesture.
  static FeatureSetMask parse(const std::string& name);
  std::string describe() const;
};

// All samples of one clip, sample-major with dim() contiguous values each.
struct FeatureStack {
  int dim = 0;
  FeatureSetMask mask;
  std::vector<double> samples;

  size_t count() const { return dim == 0 ? 0 : samples.size() / dim; }
  const double* sample(size_t i) const { return samples.data() + i * dim; }
};

// Appearance maps for one frame: channels scaled to [0,1], first and second
// grayscale derivatives of I/255 via [-1,0,1]/2 and [1,-2,1] stencils.
struct AppearanceFeatures {
  int width = 0;
  int height = 0;
  std::vector<double> r, g, b;
  std::vector<double> ix, iy, ixx, iyy;
};

AppearanceFeatures appearance_features(const ColorFrame& frame);
// Gradient-only path for grayscale sources (intensity block unavailable).
AppearanceFeatures appearance_features_gray(const GrayFrame& frame);

// Flow-gradient tensor invariants.
double divergence(const Eigen::Matrix2d& g);
double vorticity(const Eigen::Matrix2d& g);
std::pair<double, double> divergence_vorticity(const Eigen::Matrix2d& g);
// (tau2, tau3): tau2 = 0.5*[tr(M)^2 + tr(M^2)] (or the standard minus
// variant), tau3 = -det(M).
std::pair<double, double> tensor_invariants(const Eigen::Matrix2d& m,
                                            bool standard_tau2 = false);
// Rate-of-strain S = (G + G^T)/2 and rate-of-rotation R = (G - G^T)/2.
std::pair<Eigen::Matrix2d, Eigen::Matrix2d> strain_rotation(const Eigen::Matrix2d& g);
// [div, vort, tau2(G), tau3(G), tau2(S), tau3(S), tau3(R)]
Eigen::Matrix<double, 7, 1> kinematic_vector(const Eigen::Matrix2d& g,
                                             bool standard_tau2 = false);

// Foreground validity from depth: true where depth < threshold.
std::vector<uint8_t> depth_mask(const DepthFrame& depth, uint16_t threshold);

// One clip's worth of source data. gray is always populated (0..255 scale);
// color is present for RGB sources; validity, when non-empty, holds one
// per-pixel mask per frame and excludes false pixels from the stack.
struct ClipFrames {
  std::vector<GrayFrame> gray;
  std::vector<ColorFrame> color;
  std::vector<std::vector<uint8_t>> validity;
  bool has_color() const { return !color.empty(); }
};

// Basic motion maps for one frame of a clip: dI/dt on the normalized
// grayscale (forward difference, backward at the last frame), the flow
// components, and their temporal derivatives (zero when only one flow field
// exists).
struct BasicMotionMaps {
  int width = 0;
  int height = 0;
  std::vector<double> didt, u, v, du_dt, dv_dt;
};

BasicMotionMaps basic_motion_features(const ClipFrames& clip,
                                      const std::vector<FlowField>& flows,
                                      int frame_index);

// Builds the per-pixel sample set for a clip. flows must hold one field per
// consecutive frame pair (gray.size() - 1 of them). Temporal flow derivatives
// fall back to zero when only one flow field exists (2-frame clip).
FeatureStack assemble_stack(const ClipFrames& clip, const std::vector<FlowField>& flows,
                            const FeatureSetMask& mask);

}  // namespace mocov
