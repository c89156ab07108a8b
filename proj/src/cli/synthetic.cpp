#include "hmc/cli/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "hmc/core/error.hpp"
#include "hmc/core/rng.hpp"

namespace hmc::cli {

namespace fs = std::filesystem;

data::Image synthetic_template(data::SubtypeLabel label, std::size_t size) {
  if (size < 4) throw ValidationError("synthetic images need at least 4x4 pixels");
  constexpr std::uint16_t background = 26, foreground = 204;
  data::Image img{size, size, 1, 8, std::vector<std::uint16_t>(size * size, background)};
  const double centre = (static_cast<double>(size) - 1.0) / 2.0;
  const double s = static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double r = std::hypot(static_cast<double>(y) - centre, static_cast<double>(x) - centre) / s;
      bool on = false;
      switch (label) {
        case data::SubtypeLabel::triple_negative: on = r <= 0.32; break;
        case data::SubtypeLabel::luminal: on = r >= 0.24 && r <= 0.40; break;
        case data::SubtypeLabel::her2_enriched: on = (r >= 0.24 && r <= 0.40) || r <= 0.12; break;
      }
      if (on) img.pixels[y * size + x] = foreground;
    }
  return img;
}

data::Image synthetic_image(data::SubtypeLabel label, std::size_t size, double noise, std::uint64_t seed) {
  data::Image img = synthetic_template(label, size);
  if (noise == 0.0) return img;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, noise * 255.0);
  for (auto& p : img.pixels) p = static_cast<std::uint16_t>(std::clamp(std::round(p + gauss(rng)), 0.0, 255.0));
  return img;
}

data::Dataset generate_synthetic(const SyntheticConfig& config, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "images", ec);
  if (ec) throw IoError("cannot create synthetic dataset directory " + dir.string() + ": " + ec.message());
  data::Dataset ds;
  std::size_t index = 0, patient = 0;
  for (auto label : data::kSubtypes) {
    const std::size_t n = config.counts[data::index_of(label)];
    for (std::size_t k = 0; k < n; ++patient) {
      for (std::size_t v = 0; v < config.images_per_patient && k < n; ++v, ++k, ++index) {
        char name[96];
        const char* view = v % 2 == 0 ? "CC" : "MLO";
        std::snprintf(name, sizeof name, "%s_p%05zu_%s%zu.pgm", std::string(data::to_string(label)).c_str(), patient,
                      view, v / 2);
        const fs::path path = dir / "images" / name;
        data::write_pgm(path, synthetic_image(label, config.size, config.noise, derive_seed(config.seed, "synthetic", index)));
        data::SampleRecord r;
        r.image = path.string();
        r.label = label;
        char pid[32];
        std::snprintf(pid, sizeof pid, "P%05zu", patient);
        r.patient_id = pid;
        r.view = v % 2 == 0 ? data::View::cc : data::View::mlo;
        ds.add(std::move(r));
      }
    }
  }
  data::write_manifest(dir / "manifest.csv", ds);
  return ds;
}

}  // namespace hmc::cli
