#include "mocov/flow.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mocov/pnm.hpp"

namespace mocov {

namespace {

inline size_t idx(int x, int y, int w) { return static_cast<size_t>(y) * w + x; }

// Weighted neighborhood average from the original Horn-Schunck scheme:
// 1/6 on the 4-neighbors, 1/12 on the diagonals, borders replicated.
double hs_average(const std::vector<double>& f, int x, int y, int w, int h) {
  auto g = [&](int xx, int yy) {
    xx = std::clamp(xx, 0, w - 1);
    yy = std::clamp(yy, 0, h - 1);
    return f[idx(xx, yy, w)];
  };
  double cross = g(x - 1, y) + g(x + 1, y) + g(x, y - 1) + g(x, y + 1);
  double diag = g(x - 1, y - 1) + g(x + 1, y - 1) + g(x - 1, y + 1) + g(x + 1, y + 1);
  return cross / 6.0 + diag / 12.0;
}

void central_diff_x(const std::vector<double>& f, std::vector<double>& out, int w, int h) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double d;
      if (x == 0)
        d = f[idx(1, y, w)] - f[idx(0, y, w)];
      else if (x == w - 1)
        d = f[idx(w - 1, y, w)] - f[idx(w - 2, y, w)];
      else
        d = 0.5 * (f[idx(x + 1, y, w)] - f[idx(x - 1, y, w)]);
      out[idx(x, y, w)] = d;
    }
}

void central_diff_y(const std::vector<double>& f, std::vector<double>& out, int w, int h) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double d;
      if (y == 0)
        d = f[idx(x, 1, w)] - f[idx(x, 0, w)];
      else if (y == h - 1)
        d = f[idx(x, h - 1, w)] - f[idx(x, h - 2, w)];
      else
        d = 0.5 * (f[idx(x, y + 1, w)] - f[idx(x, y - 1, w)]);
      out[idx(x, y, w)] = d;
    }
}

}  // namespace

FlowField estimate_flow(const GrayFrame& prev, const GrayFrame& next,
                        const FlowParams& params) {
  if (prev.width != next.width || prev.height != next.height)
    throw std::invalid_argument("estimate_flow: frame dimension mismatch");
  if (prev.width < 3 || prev.height < 3)
    throw std::invalid_argument("estimate_flow: frames must be at least 3x3");

  const int w = prev.width, h = prev.height;
  const size_t n = prev.pix.size();

  // Brightness-constancy derivatives from the frame pair: spatial gradients of
  // the temporal average, temporal gradient as the plain frame difference.
  std::vector<double> avg(n);
  for (size_t i = 0; i < n; ++i) avg[i] = 0.5 * (prev.pix[i] + next.pix[i]);
  std::vector<double> ix(n), iy(n), it(n);
  central_diff_x(avg, ix, w, h);
  central_diff_y(avg, iy, w, h);
  for (size_t i = 0; i < n; ++i) it[i] = next.pix[i] - prev.pix[i];

  FlowField flow(w, h);
  std::vector<double> ubar(n), vbar(n);
  const double alpha2 = params.alpha * params.alpha;

  flow.converged = false;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        ubar[idx(x, y, w)] = hs_average(flow.u, x, y, w, h);
        vbar[idx(x, y, w)] = hs_average(flow.v, x, y, w, h);
      }
    double update = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double t = (ix[i] * ubar[i] + iy[i] * vbar[i] + it[i]) /
                 (alpha2 + ix[i] * ix[i] + iy[i] * iy[i]);
      double nu = ubar[i] - ix[i] * t;
      double nv = vbar[i] - iy[i] * t;
      update += std::abs(nu - flow.u[i]) + std::abs(nv - flow.v[i]);
      flow.u[i] = nu;
      flow.v[i] = nv;
    }
    if (update / static_cast<double>(n) < params.tolerance) {
      flow.converged = true;
      break;
    }
  }
  return flow;
}

FlowDerivatives flow_gradients_spatial(const FlowField& flow) {
  const int w = flow.width, h = flow.height;
  FlowDerivatives d;
  d.width = w;
  d.height = h;
  const size_t n = flow.u.size();
  d.du_dx.resize(n);
  d.du_dy.resize(n);
  d.dv_dx.resize(n);
  d.dv_dy.resize(n);
  d.du_dt.assign(n, 0.0);
  d.dv_dt.assign(n, 0.0);
  central_diff_x(flow.u, d.du_dx, w, h);
  central_diff_y(flow.u, d.du_dy, w, h);
  central_diff_x(flow.v, d.dv_dx, w, h);
  central_diff_y(flow.v, d.dv_dy, w, h);
  return d;
}

FlowDerivatives flow_derivatives(const std::vector<FlowField>& flows, int index) {
  if (flows.size() < 2)
    throw std::invalid_argument("flow_derivatives: need at least 2 flow fields for temporal derivatives");
  if (index < 0 || index >= static_cast<int>(flows.size()))
    throw std::invalid_argument("flow_derivatives: index out of range");

  const FlowField& f = flows[index];
  FlowDerivatives d = flow_gradients_spatial(f);

  // Forward difference; backward at the last field.
  const FlowField& a = (index + 1 < static_cast<int>(flows.size())) ? f : flows[index - 1];
  const FlowField& b = (index + 1 < static_cast<int>(flows.size())) ? flows[index + 1] : f;
  if (a.width != f.width || a.height != f.height || b.width != f.width || b.height != f.height)
    throw std::invalid_argument("flow_derivatives: inconsistent flow dimensions");
  for (size_t i = 0; i < f.u.size(); ++i) {
    d.du_dt[i] = b.u[i] - a.u[i];
    d.dv_dt[i] = b.v[i] - a.v[i];
  }
  return d;
}

void dump_flow_debug(const FlowField& flow, const std::filesystem::path& base) {
  auto scale_to_frame = [&](const std::vector<double>& f, GrayFrame& out,
                            double& lo, double& hi) {
    lo = f.empty() ? 0.0 : *std::min_element(f.begin(), f.end());
    hi = f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());
    double span = hi - lo;
    if (span <= 0.0) span = 1.0;
    for (size_t i = 0; i < f.size(); ++i) out.pix[i] = 255.0 * (f[i] - lo) / span;
  };
  GrayFrame gu(flow.width, flow.height), gv(flow.width, flow.height);
  double ulo, uhi, vlo, vhi;
  scale_to_frame(flow.u, gu, ulo, uhi);
  scale_to_frame(flow.v, gv, vlo, vhi);
  std::filesystem::path pu = base;
  pu += "_u.pgm";
  std::filesystem::path pv = base;
  pv += "_v.pgm";
  std::filesystem::path ps = base;
  ps += "_scale.txt";
  write_pgm(pu, gu);
  write_pgm(pv, gv);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "u_min %.17g\nu_max %.17g\nv_min %.17g\nv_max %.17g\n",
                ulo, uhi, vlo, vhi);
  atomic_write_file(ps, buf);
}

}  // namespace mocov
