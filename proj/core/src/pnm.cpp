#include "mocov/pnm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mocov {

namespace {

uint8_t quantize8(double v) {
  double q = std::lround(std::clamp(v, 0.0, 255.0));
  return static_cast<uint8_t>(q);
}

// Reads one PNM header token, skipping whitespace and # comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) continue;
    tok.push_back(static_cast<char>(c));
    while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
      tok.push_back(static_cast<char>(in.get()));
    return tok;
  }
  throw std::runtime_error("pnm: truncated header");
}

struct PnmHeader {
  std::string magic;
  int width, height, maxval;
};

PnmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  PnmHeader h;
  h.magic = next_token(in);
  if (h.magic != "P5" && h.magic != "P6")
    throw std::runtime_error("pnm: unsupported magic '" + h.magic + "' in " + path.string());
  h.width = std::stoi(next_token(in));
  h.height = std::stoi(next_token(in));
  h.maxval = std::stoi(next_token(in));
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535)
    throw std::runtime_error("pnm: bad dimensions in " + path.string());
  // Single whitespace byte separates header from payload.
  in.get();
  return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pnm: cannot open " + path.string());
  return in;
}

void read_payload(std::istream& in, char* dst, size_t bytes, const std::filesystem::path& path) {
  in.read(dst, static_cast<std::streamsize>(bytes));
  if (static_cast<size_t>(in.gcount()) != bytes)
    throw std::runtime_error("pnm: truncated payload in " + path.string());
}

}  // namespace

void atomic_write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_pgm(const std::filesystem::path& path, const GrayFrame& frame) {
  std::string buf = "P5\n" + std::to_string(frame.width) + " " +
                    std::to_string(frame.height) + "\n255\n";
  buf.reserve(buf.size() + frame.pix.size());
  for (double v : frame.pix) buf.push_back(static_cast<char>(quantize8(v)));
  atomic_write_file(path, buf);
}

void write_pgm16(const std::filesystem::path& path, const DepthFrame& frame) {
  std::string buf = "P5\n" + std::to_string(frame.width) + " " +
                    std::to_string(frame.height) + "\n65535\n";
  buf.reserve(buf.size() + frame.depth.size() * 2);
  for (uint16_t v : frame.depth) {
    buf.push_back(static_cast<char>(v >> 8));  // big-endian per PNM convention
    buf.push_back(static_cast<char>(v & 0xff));
  }
  atomic_write_file(path, buf);
}

void write_ppm(const std::filesystem::path& path, const ColorFrame& frame) {
  std::string buf = "P6\n" + std::to_string(frame.width) + " " +
                    std::to_string(frame.height) + "\n255\n";
  buf.reserve(buf.size() + frame.r.size() * 3);
  for (size_t i = 0; i < frame.r.size(); ++i) {
    buf.push_back(static_cast<char>(quantize8(frame.r[i])));
    buf.push_back(static_cast<char>(quantize8(frame.g[i])));
    buf.push_back(static_cast<char>(quantize8(frame.b[i])));
  }
  atomic_write_file(path, buf);
}

GrayFrame read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  PnmHeader h = read_header(in, path);
  if (h.magic != "P5" || h.maxval > 255)
    throw std::runtime_error("pnm: expected 8-bit P5 in " + path.string());
  GrayFrame frame(h.width, h.height);
  std::vector<char> raw(frame.pix.size());
  read_payload(in, raw.data(), raw.size(), path);
  for (size_t i = 0; i < raw.size(); ++i)
    frame.pix[i] = static_cast<double>(static_cast<uint8_t>(raw[i]));
  return frame;
}

DepthFrame read_pgm16(const std::filesystem::path& path) {
  auto in = open_in(path);
  PnmHeader h = read_header(in, path);
  if (h.magic != "P5" || h.maxval <= 255)
    throw std::runtime_error("pnm: expected 16-bit P5 in " + path.string());
  DepthFrame frame(h.width, h.height);
  std::vector<char> raw(frame.depth.size() * 2);
  read_payload(in, raw.data(), raw.size(), path);
  for (size_t i = 0; i < frame.depth.size(); ++i) {
    auto hi = static_cast<uint8_t>(raw[2 * i]);
    auto lo = static_cast<uint8_t>(raw[2 * i + 1]);
    frame.depth[i] = static_cast<uint16_t>((hi << 8) | lo);
  }
  return frame;
}

ColorFrame read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  PnmHeader h = read_header(in, path);
  if (h.magic != "P6" || h.maxval > 255)
    throw std::runtime_error("pnm: expected 8-bit P6 in " + path.string());
  ColorFrame frame(h.width, h.height);
  std::vector<char> raw(frame.r.size() * 3);
  read_payload(in, raw.data(), raw.size(), path);
  for (size_t i = 0; i < frame.r.size(); ++i) {
    frame.r[i] = static_cast<double>(static_cast<uint8_t>(raw[3 * i]));
    frame.g[i] = static_cast<double>(static_cast<uint8_t>(raw[3 * i + 1]));
    frame.b[i] = static_cast<double>(static_cast<uint8_t>(raw[3 * i + 2]));
  }
  return frame;
}

std::string probe_pnm(const std::filesystem::path& path) {
  auto in = open_in(path);
  PnmHeader h = read_header(in, path);
  if (h.magic == "P6") return "P6";
  return h.maxval > 255 ? "P5/16" : "P5";
}

}  // namespace mocov
