#include "hmc/data/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "hmc/core/error.hpp"

namespace hmc::data {
namespace {

using FilePtr = std::unique_ptr<FILE, int (*)(FILE*)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

// Reads the next whitespace-delimited PNM header token, skipping comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic = pnm_token(in);
  Image img;
  std::size_t maxval = 0;
  try {
    img.width = std::stoul(pnm_token(in));
    img.height = std::stoul(pnm_token(in));
    maxval = std::stoul(pnm_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header in " + path.string());
  }
  if (maxval == 0 || maxval > 65535) throw IoError("bad PGM maxval in " + path.string());
  img.channels = 1;
  img.bit_depth = maxval > 255 ? 16 : 8;
  const std::size_t n = img.width * img.height;
  img.pixels.resize(n);
  if (magic == "P5") {
    const std::size_t bytes = img.bit_depth == 16 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw IoError("truncated PGM data in " + path.string());
    for (std::size_t i = 0; i < n; ++i)
      img.pixels[i] = bytes == 2 ? static_cast<std::uint16_t>(raw[2 * i] << 8 | raw[2 * i + 1]) : raw[i];
  } else if (magic == "P2") {
    for (auto& p : img.pixels) {
      std::string tok = pnm_token(in);
      if (tok.empty()) throw IoError("truncated PGM data in " + path.string());
      p = static_cast<std::uint16_t>(std::stoul(tok));
    }
  } else {
    throw IoError("unsupported PNM variant '" + magic + "' in " + path.string());
  }
  for (auto p : img.pixels)
    if (p > maxval) throw IoError("PGM sample exceeds maxval in " + path.string());
  return img;
}

Image read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialisation failed");
  }
  Image img;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("cannot decode PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // native little-endian 16-bit samples
  png_read_update_info(png, info);

  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.channels = png_get_channels(png, info);
  img.bit_depth = png_get_bit_depth(png, info) == 16 ? 16 : 8;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * img.height);
  rows.resize(img.height);
  for (std::size_t y = 0; y < img.height; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = img.width * img.height * img.channels;
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (img.bit_depth == 16) {
      std::uint16_t v;
      std::memcpy(&v, buffer.data() + 2 * i, 2);
      img.pixels[i] = v;
    } else {
      img.pixels[i] = buffer[i];
    }
  }
  return img;
}

void check_image(const Image& image) {
  if (image.height == 0 || image.width == 0 || image.channels == 0)
    throw ValidationError("image has zero size");
  if (image.pixels.size() != image.height * image.width * image.channels)
    throw ValidationError("image pixel buffer does not match its dimensions");
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open image " + path.string());
  std::array<unsigned char, 8> sig{};
  probe.read(reinterpret_cast<char*>(sig.data()), sig.size());
  const auto got = static_cast<std::size_t>(probe.gcount());
  probe.close();
  Image img;
  if (got == 8 && png_sig_cmp(sig.data(), 0, 8) == 0)
    img = read_png(path);
  else if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2'))
    img = read_pgm(path);
  else
    throw IoError("unrecognised image format: " + path.string());
  if (img.width == 0 || img.height == 0) throw ValidationError("image has zero size: " + path.string());
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  check_image(image);
  if (image.channels != 1) throw ValidationError("PGM output needs a single-channel image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const unsigned maxval = image.bit_depth > 8 ? 65535 : 255;
  out << "P5\n" << image.width << ' ' << image.height << '\n' << maxval << '\n';
  for (std::uint16_t p : image.pixels) {
    if (maxval == 65535) {
      out.put(static_cast<char>(p >> 8));
      out.put(static_cast<char>(p & 0xff));
    } else {
      out.put(static_cast<char>(std::min<std::uint16_t>(p, 255)));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_png(const std::filesystem::path& path, const Image& image) {
  check_image(image);
  if (image.channels != 1 && image.channels != 3) throw ValidationError("PNG output supports 1 or 3 channels");
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  const unsigned depth = image.bit_depth > 8 ? 16 : 8;
  const std::size_t bytes = depth / 8;
  const std::size_t rowbytes = image.width * image.channels * bytes;
  std::vector<unsigned char> buffer(rowbytes * image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    if (bytes == 2) {
      buffer[2 * i] = static_cast<unsigned char>(image.pixels[i] >> 8);  // PNG is big-endian
      buffer[2 * i + 1] = static_cast<unsigned char>(image.pixels[i] & 0xff);
    } else {
      buffer[i] = static_cast<unsigned char>(image.pixels[i]);
    }
  }
  std::vector<png_bytep> rows(image.height);
  for (std::size_t y = 0; y < image.height; ++y) rows[y] = buffer.data() + y * rowbytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("cannot encode PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
               image.bit_depth > 8 ? 16 : 8, image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

nn::Tensor resize_bilinear(const nn::Tensor& hwc, std::size_t height, std::size_t width) {
  if (hwc.rank() != 3) throw ValidationError("resize expects an (H, W, C) tensor");
  if (height == 0 || width == 0) throw ValidationError("resize target must be non-empty");
  const std::size_t H = hwc.shape()[0], W = hwc.shape()[1], C = hwc.shape()[2];
  if (H == height && W == width) return hwc;
  auto source_coord = [](std::size_t i, std::size_t in, std::size_t out) {
    if (out == 1 || in == 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1);
  };
  nn::Tensor out({height, width, C});
  for (std::size_t y = 0; y < height; ++y) {
    const double sy = source_coord(y, H, height);
    const std::size_t y0 = std::min(static_cast<std::size_t>(sy), H - 1);
    const std::size_t y1 = std::min(y0 + 1, H - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double sx = source_coord(x, W, width);
      const std::size_t x0 = std::min(static_cast<std::size_t>(sx), W - 1);
      const std::size_t x1 = std::min(x0 + 1, W - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < C; ++c) {
        const double v00 = hwc[(y0 * W + x0) * C + c], v01 = hwc[(y0 * W + x1) * C + c];
        const double v10 = hwc[(y1 * W + x0) * C + c], v11 = hwc[(y1 * W + x1) * C + c];
        const double top = v00 + (v01 - v00) * fx;
        const double bottom = v10 + (v11 - v10) * fx;
        out[(y * width + x) * C + c] = top + (bottom - top) * fy;
      }
    }
  }
  return out;
}

nn::Tensor preprocess(const Image& image, std::size_t height, std::size_t width) {
  check_image(image);
  const double scale = image.max_value();
  const std::size_t src_c = image.channels;
  const std::size_t color = src_c >= 3 ? 3 : 1;
  nn::Tensor hwc({image.height, image.width, 3});
  for (std::size_t p = 0; p < image.height * image.width; ++p)
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t from = color == 1 ? 0 : c;
      hwc[p * 3 + c] = std::clamp(image.pixels[p * src_c + from] / scale, 0.0, 1.0);
    }
  nn::Tensor out = resize_bilinear(hwc, height, width);
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

}  // namespace hmc::data
