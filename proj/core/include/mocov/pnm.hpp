#pragma once

// Portable pixmap I/O: binary P5 (8/16-bit) and P6 (8-bit).
// All writes are atomic (temp file + rename).

#include <filesystem>
#include <string>

#include "mocov/image.hpp"

namespace mocov {

void write_pgm(const std::filesystem::path& path, const GrayFrame& frame);
void write_pgm16(const std::filesystem::path& path, const DepthFrame& frame);
void write_ppm(const std::filesystem::path& path, const ColorFrame& frame);

GrayFrame read_pgm(const std::filesystem::path& path);
DepthFrame read_pgm16(const std::filesystem::path& path);
ColorFrame read_ppm(const std::filesystem::path& path);

// Magic-number probe: returns "P5", "P5/16", "P6", or throws.
std::string probe_pnm(const std::filesystem::path& path);

// Atomic text/binary file write used across the pipeline.
void atomic_write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace mocov
