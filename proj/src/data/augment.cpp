#include "hmc/data/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hmc/core/error.hpp"

namespace hmc::data {
namespace {

void require_hwc(const nn::Tensor& t) {
  if (t.rank() != 3) throw ValidationError("augmentation expects an (H, W, C) tensor, got " + nn::shape_string(t.shape()));
}

}  // namespace

void AugmentConfig::validate() const {
  if (!(max_rotation_deg >= 0.0 && max_rotation_deg < 180.0))
    throw ValidationError("rotation range must lie within (-180, 180) degrees");
}

AugmentDraw draw_augment(const AugmentConfig& config, Rng& rng) {
  config.validate();
  AugmentDraw d;
  d.angle_deg = (2.0 * uniform01(rng) - 1.0) * config.max_rotation_deg;
  d.hflip = config.horizontal_flip && uniform01(rng) < 0.5;
  d.vflip = config.vertical_flip && uniform01(rng) < 0.5;
  return d;
}

nn::Tensor rotate(const nn::Tensor& hwc, double angle_deg) {
  require_hwc(hwc);
  if (angle_deg == 0.0) return hwc;
  const std::size_t H = hwc.shape()[0], W = hwc.shape()[1], C = hwc.shape()[2];
  const auto [lo_it, hi_it] = std::minmax_element(hwc.values().begin(), hwc.values().end());
  const double lo = *lo_it, hi = *hi_it;
  const double theta = angle_deg * std::numbers::pi / 180.0;
  double c = std::cos(theta), s = std::sin(theta);
  // Snap so quarter turns resample exactly.
  if (std::abs(c) < 1e-12) c = 0.0;
  if (std::abs(s) < 1e-12) s = 0.0;
  const double cr = (static_cast<double>(H) - 1.0) / 2.0, cc = (static_cast<double>(W) - 1.0) / 2.0;
  auto at = [&](std::size_t r, std::size_t col, std::size_t ch) { return hwc[(r * W + col) * C + ch]; };

  nn::Tensor out(hwc.shape());
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t col = 0; col < W; ++col) {
      const double dr = static_cast<double>(r) - cr, dc = static_cast<double>(col) - cc;
      const double sr = std::clamp(cr + c * dr + s * dc, 0.0, static_cast<double>(H - 1));
      const double sc = std::clamp(cc - s * dr + c * dc, 0.0, static_cast<double>(W - 1));
      const auto r0 = static_cast<std::size_t>(std::floor(sr)), c0 = static_cast<std::size_t>(std::floor(sc));
      const std::size_t r1 = std::min(r0 + 1, H - 1), c1 = std::min(c0 + 1, W - 1);
      const double fr = sr - static_cast<double>(r0), fc = sc - static_cast<double>(c0);
      for (std::size_t ch = 0; ch < C; ++ch) {
        const double top = at(r0, c0, ch) * (1.0 - fc) + at(r0, c1, ch) * fc;
        const double bottom = at(r1, c0, ch) * (1.0 - fc) + at(r1, c1, ch) * fc;
        out[(r * W + col) * C + ch] = std::clamp(top * (1.0 - fr) + bottom * fr, lo, hi);
      }
    }
  }
  return out;
}

nn::Tensor flip_horizontal(const nn::Tensor& hwc) {
  require_hwc(hwc);
  const std::size_t H = hwc.shape()[0], W = hwc.shape()[1], C = hwc.shape()[2];
  nn::Tensor out(hwc.shape());
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t col = 0; col < W; ++col)
      for (std::size_t ch = 0; ch < C; ++ch) out[(r * W + col) * C + ch] = hwc[(r * W + (W - 1 - col)) * C + ch];
  return out;
}

nn::Tensor flip_vertical(const nn::Tensor& hwc) {
  require_hwc(hwc);
  const std::size_t H = hwc.shape()[0], W = hwc.shape()[1], C = hwc.shape()[2];
  nn::Tensor out(hwc.shape());
  for (std::size_t r = 0; r < H; ++r)
    for (std::size_t k = 0; k < W * C; ++k) out[r * W * C + k] = hwc[(H - 1 - r) * W * C + k];
  return out;
}

nn::Tensor apply_augment(const nn::Tensor& hwc, const AugmentDraw& draw) {
  nn::Tensor out = rotate(hwc, draw.angle_deg);
  if (draw.hflip) out = flip_horizontal(out);
  if (draw.vflip) out = flip_vertical(out);
  return out;
}

nn::Tensor augment(const nn::Tensor& hwc, const AugmentConfig& config, Rng& rng) {
  return apply_augment(hwc, draw_augment(config, rng));
}

}  // namespace hmc::data
