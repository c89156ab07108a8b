#pragma once

#include "hmc/core/rng.hpp"
#include "hmc/nn/tensor.hpp"

namespace hmc::data {

struct AugmentConfig {
  double max_rotation_deg = 90.0;  // angle drawn uniformly from [-max, +max]
  bool horizontal_flip = true;
  bool vertical_flip = true;

  void validate() const;  // max_rotation_deg in [0, 180)
};

struct AugmentDraw {
  double angle_deg = 0.0;
  bool hflip = false;
  bool vflip = false;
};

AugmentDraw draw_augment(const AugmentConfig& config, Rng& rng);

/// Counter-clockwise rotation about the image centre with bilinear sampling;
/// source coordinates outside the image take the nearest edge pixel. Output is
/// clamped to the input's value range.
nn::Tensor rotate(const nn::Tensor& hwc, double angle_deg);
nn::Tensor flip_horizontal(const nn::Tensor& hwc);
nn::Tensor flip_vertical(const nn::Tensor& hwc);

/// Rotation, then the drawn flips.
nn::Tensor apply_augment(const nn::Tensor& hwc, const AugmentDraw& draw);

nn::Tensor augment(const nn::Tensor& hwc, const AugmentConfig& config, Rng& rng);

}  // namespace hmc::data
