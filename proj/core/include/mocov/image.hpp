#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mocov {

// Grayscale frame, row-major, intensities on the 0..255 scale.
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<double> pix;

  GrayFrame() = default;
  GrayFrame(int w, int h, double fill = 0.0)
      : width(w), height(h), pix(static_cast<size_t>(w) * h, fill) {}

  double& at(int x, int y) { return pix[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return pix[static_cast<size_t>(y) * width + x]; }

  // Clamped access for border stencils.
  double at_c(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return pix[static_cast<size_t>(y) * width + x];
  }

  size_t size() const { return pix.size(); }
};

// RGB frame, channels on the 0..255 scale.
struct ColorFrame {
  int width = 0;
  int height = 0;
  std::vector<double> r, g, b;

  ColorFrame() = default;
  ColorFrame(int w, int h)
      : width(w), height(h),
        r(static_cast<size_t>(w) * h, 0.0),
        g(static_cast<size_t>(w) * h, 0.0),
        b(static_cast<size_t>(w) * h, 0.0) {}

  GrayFrame to_gray() const {
    GrayFrame out(width, height);
    for (size_t i = 0; i < out.pix.size(); ++i)
      out.pix[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    return out;
  }

  static ColorFrame from_gray(const GrayFrame& f) {
    ColorFrame out(f.width, f.height);
    out.r = f.pix;
    out.g = f.pix;
    out.b = f.pix;
    return out;
  }
};

// Depth frame as produced by RGB-D sensors, 16-bit raw units.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> depth;

  DepthFrame() = default;
  DepthFrame(int w, int h, uint16_t fill = 0)
      : width(w), height(h), depth(static_cast<size_t>(w) * h, fill) {}

  uint16_t& at(int x, int y) { return depth[static_cast<size_t>(y) * width + x]; }
  uint16_t at(int x, int y) const { return depth[static_cast<size_t>(y) * width + x]; }
};

}  // namespace mocov
