#include "mocov/synth.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mocov/pnm.hpp"
#include "mocov/textio.hpp"

namespace mocov {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Hand-rolled draws on top of mt19937_64 keep the generated bytes independent
// of the standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

double pick_sign(std::mt19937_64& rng) { return uniform01(rng) < 0.5 ? -1.0 : 1.0; }

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (a + 1) + 0xbf58476d1ce4e5b9ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct BackgroundTexture {
  double base;
  double amp[4], fx[4], fy[4], phase[4];

  double value(double x, double y) const {
    double v = base;
    for (int k = 0; k < 4; ++k)
      v += amp[k] * std::sin(2.0 * kPi * (fx[k] * x + fy[k] * y) + phase[k]);
    return v;
  }
};

struct BlobMotion {
  std::string kind;
  double cx0, cy0, radius;
  double vx = 0.0;          // translate
  double amp = 0.0, freq = 0.0, phase0 = 0.0;  // oscillate
  double omega = 0.0, theta0 = 0.0;            // rotate
  double tex_amp, tex_kx, tex_ky, tex_p1, tex_p2;

  void center_at(int t, int width, double margin, double* cx, double* cy) const {
    *cx = cx0;
    *cy = cy0;
    if (kind == "translate") {
      // reflective bounce inside [margin, width-margin]
      const double span = width - 2.0 * margin;
      double pos = cx0 - margin + vx * t;
      pos = std::fmod(pos, 2.0 * span);
      if (pos < 0) pos += 2.0 * span;
      *cx = margin + (pos <= span ? pos : 2.0 * span - pos);
    } else if (kind == "oscillate") {
      *cy = cy0 + amp * std::sin(2.0 * kPi * freq * t + phase0);
    }
  }

  double angle_at(int t) const {
    return kind == "rotate" ? theta0 + omega * t : theta0;
  }
};

double smoothstep(double e0, double e1, double x) {
  double u = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

DatasetManifest synth_dataset(const SynthSpec& spec, const std::filesystem::path& outdir) {
  if (spec.classes.empty() || spec.videos_per_class < 1 || spec.frames < 2 ||
      spec.width < 16 || spec.height < 16)
    throw std::invalid_argument("synth: bad generation spec");
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (!std::filesystem::is_directory(outdir))
    throw std::runtime_error("synth: cannot create output directory " + outdir.string());

  DatasetManifest manifest;
  manifest.root = outdir;
  manifest.classes = spec.classes;
  std::ostringstream truth;
  truth << "video_id\tclass\tgroup\tkind\tvx\tamp\tfreq\tomega\tradius\n";

  for (size_t ci = 0; ci < spec.classes.size(); ++ci) {
    const std::string& cls = spec.classes[ci];
    std::string kind = cls;
    if (kind != "translate" && kind != "oscillate" && kind != "rotate")
      kind = ci % 3 == 0 ? "translate" : (ci % 3 == 1 ? "oscillate" : "rotate");

    for (int g = 0; g < spec.videos_per_class; ++g) {
      std::mt19937_64 rng(mix_seed(spec.seed, ci, static_cast<uint64_t>(g)));
      char gid[16];
      std::snprintf(gid, sizeof(gid), "g%02d", g);
      const std::string video_id = cls + "_" + gid;

      BackgroundTexture bg;
      bg.base = uniform(rng, 100.0, 120.0);
      for (int k = 0; k < 4; ++k) {
        bg.amp[k] = uniform(rng, 3.0, 8.0);
        bg.fx[k] = uniform(rng, 0.01, 0.05) * pick_sign(rng);
        bg.fy[k] = uniform(rng, 0.01, 0.05) * pick_sign(rng);
        bg.phase[k] = uniform(rng, 0.0, 2.0 * kPi);
      }

      BlobMotion blob;
      blob.kind = kind;
      blob.radius = uniform(rng, 10.0, 15.0);
      const double margin = blob.radius + 4.0;
      blob.cx0 = uniform(rng, margin, spec.width - margin);
      blob.cy0 = uniform(rng, margin + 13.0, spec.height - margin - 13.0);
      blob.theta0 = uniform(rng, 0.0, 2.0 * kPi);
      blob.vx = pick_sign(rng) * uniform(rng, 0.9, 1.4);
      blob.amp = uniform(rng, 8.0, 12.0);
      blob.freq = uniform(rng, 0.015, 0.028);
      blob.phase0 = uniform(rng, 0.0, 2.0 * kPi);
      blob.omega = pick_sign(rng) * uniform(rng, 0.07, 0.12);
      blob.tex_amp = uniform(rng, 40.0, 55.0);
      blob.tex_kx = uniform(rng, 0.55, 0.85);
      blob.tex_ky = uniform(rng, 0.55, 0.85);
      blob.tex_p1 = uniform(rng, 0.0, 2.0 * kPi);
      blob.tex_p2 = uniform(rng, 0.0, 2.0 * kPi);

      double kr = 1.0, kg = 1.0, kb = 1.0;
      // Per-channel texture layers keep the RGB block of the covariance full
      // rank, as in real footage; amplitudes and frequencies are drawn from
      // the same ranges for every class.
      double ch_amp[3], ch_fx[3], ch_fy[3], ch_phase[3];
      if (spec.color) {
        if (spec.color_context) {
          kr = ci % 3 == 0 ? 1.0 : 0.75;
          kg = ci % 3 == 1 ? 1.0 : 0.75;
          kb = ci % 3 == 2 ? 1.0 : 0.75;
          kr += uniform(rng, -0.05, 0.05);
          kg += uniform(rng, -0.05, 0.05);
          kb += uniform(rng, -0.05, 0.05);
        } else {
          kr = uniform(rng, 0.85, 1.0);
          kg = uniform(rng, 0.85, 1.0);
          kb = uniform(rng, 0.85, 1.0);
        }
        for (int c = 0; c < 3; ++c) {
          ch_amp[c] = uniform(rng, 8.0, 14.0);
          ch_fx[c] = uniform(rng, 0.03, 0.09) * pick_sign(rng);
          ch_fy[c] = uniform(rng, 0.03, 0.09) * pick_sign(rng);
          ch_phase[c] = uniform(rng, 0.0, 2.0 * kPi);
        }
      }

      const std::filesystem::path frames_rel = std::filesystem::path(video_id) / "frames";
      const std::filesystem::path depth_rel = std::filesystem::path(video_id) / "depth";
      std::filesystem::create_directories(outdir / frames_rel);
      if (spec.depth) std::filesystem::create_directories(outdir / depth_rel);

      for (int t = 0; t < spec.frames; ++t) {
        double cx, cy;
        blob.center_at(t, spec.width, margin, &cx, &cy);
        const double theta = blob.angle_at(t);
        const double ct = std::cos(theta), st = std::sin(theta);

        GrayFrame frame(spec.width, spec.height);
        DepthFrame depth(spec.width, spec.height, 0);
        for (int y = 0; y < spec.height; ++y)
          for (int x = 0; x < spec.width; ++x) {
            double val = bg.value(x, y);
            const double dx = x - cx, dy = y - cy;
            const double rho = std::sqrt(dx * dx + dy * dy);
            double fg = 0.0;
            if (rho < blob.radius) {
              // blob-local rotated coordinates make spin visible
              const double p = ct * dx + st * dy;
              const double q = -st * dx + ct * dy;
              const double tex = 170.0 +
                                 blob.tex_amp * std::sin(blob.tex_kx * p + blob.tex_p1) *
                                     std::cos(blob.tex_ky * q + blob.tex_p2);
              fg = smoothstep(blob.radius, blob.radius - 2.0, rho);
              val = (1.0 - fg) * val + fg * tex;
            }
            frame.at(x, y) = std::clamp(val, 0.0, 255.0);
            if (spec.depth)
              depth.at(x, y) = fg > 0.5 ? static_cast<uint16_t>(15000 + 10 * ((x + y) % 7))
                                        : static_cast<uint16_t>(40000 + 10 * ((x * 3 + y) % 11));
          }

        char name[32];
        if (spec.color) {
          std::snprintf(name, sizeof(name), "frame_%04d.ppm", t);
          ColorFrame c(spec.width, spec.height);
          const double tint[3] = {kr, kg, kb};
          double* chan[3] = {c.r.data(), c.g.data(), c.b.data()};
          for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x) {
              const size_t i = static_cast<size_t>(y) * spec.width + x;
              for (int ch = 0; ch < 3; ++ch) {
                const double layer =
                    ch_amp[ch] * std::sin(2.0 * kPi * (ch_fx[ch] * x + ch_fy[ch] * y) +
                                          ch_phase[ch]);
                chan[ch][i] = std::clamp(frame.pix[i] * tint[ch] + layer, 0.0, 255.0);
              }
            }
          write_ppm(outdir / frames_rel / name, c);
        } else {
          std::snprintf(name, sizeof(name), "frame_%04d.pgm", t);
          write_pgm(outdir / frames_rel / name, frame);
        }
        if (spec.depth) {
          std::snprintf(name, sizeof(name), "depth_%04d.pgm", t);
          write_pgm16(outdir / depth_rel / name, depth);
        }
      }

      VideoRecord rec;
      rec.video_id = video_id;
      rec.label = cls;
      rec.group_id = gid;
      rec.frames_dir = frames_rel;
      if (spec.depth) rec.depth_dir = depth_rel;
      rec.frame_count = spec.frames;
      manifest.videos.push_back(rec);

      truth << video_id << "\t" << cls << "\t" << gid << "\t" << kind << "\t"
            << fmt_g17(kind == "translate" ? blob.vx : 0.0) << "\t"
            << fmt_g17(kind == "oscillate" ? blob.amp : 0.0) << "\t"
            << fmt_g17(kind == "oscillate" ? blob.freq : 0.0) << "\t"
            << fmt_g17(kind == "rotate" ? blob.omega : 0.0) << "\t"
            << fmt_g17(blob.radius) << "\n";
    }
  }

  manifest.save(outdir / "manifest.txt");
  atomic_write_file(outdir / "truth.tsv", truth.str());
  return DatasetManifest::load(outdir / "manifest.txt");
}

}  // namespace mocov
