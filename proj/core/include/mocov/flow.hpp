#pragma once

// Dense optical flow between consecutive frames and its spatial/temporal
// derivatives. The estimator is a classical Horn-Schunck iteration; flow is
// treated as an interchangeable input by everything downstream.

#include <filesystem>
#include <vector>

#include "mocov/image.hpp"

namespace mocov {

struct FlowParams {
  double alpha = 15.0;       // smoothness weight (image intensities on 0..255)
  int max_iterations = 200;
  double tolerance = 1e-4;   // mean absolute update threshold
};

struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u, v;  // pixels/frame, row-major
  bool converged = true;     // false: max iterations hit, best iterate returned

  FlowField() = default;
  FlowField(int w, int h)
      : width(w), height(h),
        u(static_cast<size_t>(w) * h, 0.0),
        v(static_cast<size_t>(w) * h, 0.0) {}
};

struct FlowDerivatives {
  int width = 0;
  int height = 0;
  // spatial gradients (1/frame)
  std::vector<double> du_dx, du_dy, dv_dx, dv_dy;
  // temporal derivatives (pixels/frame^2)
  std::vector<double> du_dt, dv_dt;
};

// Horn-Schunck flow from prev to next. Frames must have equal dimensions,
// at least 3x3. Identical frames give zero flow; textureless frames fall to
// the smoothness term and also give zero flow.
FlowField estimate_flow(const GrayFrame& prev, const GrayFrame& next,
                        const FlowParams& params = {});

// Spatial gradients via central differences (one-sided at borders) of
// flows[index]; temporal derivatives via forward difference against the next
// field (backward at the last index). Throws if flows.size() < 2.
FlowDerivatives flow_derivatives(const std::vector<FlowField>& flows, int index);

// Spatial part only, temporal derivatives zeroed. Used for single-flow clips.
FlowDerivatives flow_gradients_spatial(const FlowField& flow);

// Debug dump: u and v as 8-bit pixmaps (<base>_u.pgm, <base>_v.pgm) with the
// affine scaling recorded in <base>_scale.txt.
void dump_flow_debug(const FlowField& flow, const std::filesystem::path& base);

}  // namespace mocov
