#include "hmc/nn/params.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "hmc/core/error.hpp"
#include "hmc/core/rng.hpp"

namespace hmc::nn {

ModelParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
  ModelParams params;
  const auto& layers = spec.layers();
  for (std::size_t i : spec.parametric_layers()) {
    Rng rng(derive_seed(seed, "init", i));
    Shape ws = spec.weight_shape(i);
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
    if (layers[i].kind == LayerKind::dense) {
      fan_in = ws[0];
      fan_out = ws[1];
    } else {
      fan_in = ws[1] * ws[2] * ws[3];
      fan_out = ws[0] * ws[1] * ws[2];
    }
    bool relu_next = i + 1 < layers.size() && layers[i + 1].kind == LayerKind::relu;
    Tensor w(ws);
    if (relu_next) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
      for (double& v : w.values()) v = dist(rng);
    } else {
      double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (double& v : w.values()) v = (2.0 * uniform01(rng) - 1.0) * limit;
    }
    params.layers.emplace(i, LayerParams{std::move(w), Tensor(spec.bias_shape(i))});
  }
  return params;
}

ModelParams zeros_like(const NetworkSpec& spec) {
  ModelParams params;
  for (std::size_t i : spec.parametric_layers())
    params.layers.emplace(i, LayerParams{Tensor(spec.weight_shape(i)), Tensor(spec.bias_shape(i))});
  return params;
}

void check_params(const NetworkSpec& spec, const ModelParams& params) {
  auto expected = spec.parametric_layers();
  if (expected.size() != params.layers.size())
    throw ValidationError("parameter set has " + std::to_string(params.layers.size()) +
                          " layers, network expects " + std::to_string(expected.size()));
  for (std::size_t i : expected) {
    auto it = params.layers.find(i);
    if (it == params.layers.end())
      throw ValidationError("missing parameters for layer " + std::to_string(i));
    if (it->second.weight.shape() != spec.weight_shape(i) ||
        it->second.bias.shape() != spec.bias_shape(i))
      throw ValidationError("parameter shape mismatch at layer " + std::to_string(i) + ": weight " +
                            shape_string(it->second.weight.shape()) + ", expected " +
                            shape_string(spec.weight_shape(i)));
  }
}

namespace {

constexpr char kMagic[4] = {'H', 'M', 'C', '1'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw ValidationError("parameter file truncated");
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(raw), std::end(raw));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_tensor(std::vector<std::uint8_t>& out, const Tensor& t) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t e : t.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
  for (double v : t.values()) put_le<double>(out, v);
}

Tensor get_tensor(Reader& in) {
  auto rank = in.get<std::uint32_t>();
  if (rank == 0 || rank > 8) throw ValidationError("bad tensor rank in parameter file");
  Shape shape(rank);
  for (auto& e : shape) e = in.get<std::uint32_t>();
  std::size_t n = shape_size(shape);
  std::vector<double> values(n);
  for (double& v : values) v = in.get<double>();
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace

std::vector<std::uint8_t> encode_params(const ModelParams& params) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  for (const auto& [index, lp] : params.layers) {
    put_tensor(out, lp.weight);
    put_tensor(out, lp.bias);
  }
  return out;
}

ModelParams decode_params(const NetworkSpec& spec, std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ValidationError("parameter file lacks the HMC1 magic");
  Reader in(bytes.subspan(4));
  ModelParams params;
  for (std::size_t i : spec.parametric_layers()) {
    Tensor w = get_tensor(in);
    Tensor b = get_tensor(in);
    params.layers.emplace(i, LayerParams{std::move(w), std::move(b)});
  }
  if (!in.done()) throw ValidationError("trailing bytes in parameter file");
  check_params(spec, params);
  return params;
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  auto bytes = encode_params(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ModelParams load_params(const NetworkSpec& spec, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_params(spec, bytes);
}

}  // namespace hmc::nn
