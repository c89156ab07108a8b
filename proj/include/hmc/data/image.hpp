#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hmc/nn/tensor.hpp"

namespace hmc::data {

/// Decoded raster: row-major, interleaved channels, 8- or 16-bit samples.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  unsigned bit_depth = 8;
  std::vector<std::uint16_t> pixels;

  double max_value() const { return bit_depth > 8 ? 65535.0 : 255.0; }
};

/// Reads binary/ASCII PGM (P5/P2) or PNG, detected from the file signature.
Image read_image(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const Image& image);

/// Bilinear resize of an (H, W, C) tensor with the align-corners convention:
/// output index i samples source coordinate i * (in - 1) / (out - 1), edges clamped.
nn::Tensor resize_bilinear(const nn::Tensor& hwc, std::size_t height, std::size_t width);

/// Scales samples by the bit-depth maximum into [0, 1], replicates grayscale
/// into 3 channels (alpha is dropped) and resizes to (height, width, 3).
nn::Tensor preprocess(const Image& image, std::size_t height, std::size_t width);

}  // namespace hmc::data
