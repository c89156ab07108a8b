#include "hmc/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmc/core/error.hpp"

namespace hmc::nn {
namespace {

std::size_t batch_of(const NetworkSpec& spec, const Tensor& input) {
  const Shape& want = spec.input_shape();
  if (input.shape() == want) return 1;
  if (input.rank() == want.size() + 1 && std::equal(want.begin(), want.end(), input.shape().begin() + 1))
    return input.shape()[0];
  throw ValidationError("layer 0 (" + to_string(spec.layers().front().kind) + "): input shape " +
                        shape_string(input.shape()) + " does not match network input " +
                        shape_string(want));
}

Shape batched(std::size_t n, const Shape& s) {
  Shape out{n};
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

Tensor dense_forward(const Tensor& x, const LayerParams& p, std::size_t n) {
  const std::size_t in = p.weight.shape()[0];
  const std::size_t out = p.weight.shape()[1];
  Tensor y({n, out});
  const double* w = p.weight.data();
  for (std::size_t b = 0; b < n; ++b) {
    double* yr = y.data() + b * out;
    std::copy(p.bias.data(), p.bias.data() + out, yr);
    const double* xr = x.data() + b * in;
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      const double* wr = w + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wr[o];
    }
  }
  return y;
}

Tensor conv_forward(const Tensor& x, const LayerParams& p, const LayerSpec& l, const Shape& in_shape,
                    const Shape& out_shape, std::size_t n) {
  const std::size_t H = in_shape[0], W = in_shape[1], C = in_shape[2];
  const std::size_t OH = out_shape[0], OW = out_shape[1], F = out_shape[2];
  const std::size_t K = l.kernel_size, S = l.stride;
  Tensor y(batched(n, out_shape));
  const double* w = p.weight.data();
  for (std::size_t b = 0; b < n; ++b) {
    const double* xb = x.data() + b * H * W * C;
    double* yb = y.data() + b * OH * OW * F;
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        double* yp = yb + (oy * OW + ox) * F;
        for (std::size_t f = 0; f < F; ++f) {
          double acc = p.bias[f];
          const double* wf = w + f * K * K * C;
          for (std::size_t ky = 0; ky < K; ++ky) {
            const double* xrow = xb + ((oy * S + ky) * W + ox * S) * C;
            const double* wrow = wf + ky * K * C;
            for (std::size_t j = 0; j < K * C; ++j) acc += xrow[j] * wrow[j];
          }
          yp[f] = acc;
        }
      }
    }
  }
  return y;
}

Tensor maxpool_forward(const Tensor& x, std::size_t window, const Shape& in_shape,
                       const Shape& out_shape, std::size_t n) {
  const std::size_t W = in_shape[1], C = in_shape[2];
  const std::size_t OH = out_shape[0], OW = out_shape[1];
  Tensor y(batched(n, out_shape));
  for (std::size_t b = 0; b < n; ++b) {
    const double* xb = x.data() + b * in_shape[0] * W * C;
    double* yb = y.data() + b * OH * OW * C;
    for (std::size_t oy = 0; oy < OH; ++oy)
      for (std::size_t ox = 0; ox < OW; ++ox)
        for (std::size_t c = 0; c < C; ++c) {
          double best = -std::numeric_limits<double>::infinity();
          for (std::size_t ky = 0; ky < window; ++ky)
            for (std::size_t kx = 0; kx < window; ++kx)
              best = std::max(best, xb[((oy * window + ky) * W + ox * window + kx) * C + c]);
          yb[(oy * OW + ox) * C + c] = best;
        }
  }
  return y;
}

Tensor softmax_rows(const Tensor& x, std::size_t n) {
  const std::size_t k = x.size() / n;
  Tensor y({n, k});
  for (std::size_t b = 0; b < n; ++b) {
    const double* xr = x.data() + b * k;
    double* yr = y.data() + b * k;
    double top = *std::max_element(xr, xr + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      yr[j] = std::exp(xr[j] - top);
      sum += yr[j];
    }
    for (std::size_t j = 0; j < k; ++j) yr[j] /= sum;
  }
  return y;
}

template <typename MaskFn>
ForwardResult run_forward(const NetworkSpec& spec, const ModelParams& params, const Tensor& input,
                          Mode mode, MaskFn&& mask_for) {
  const std::size_t n = batch_of(spec, input);
  ForwardTrace trace;
  trace.mode = mode;
  trace.masks.resize(spec.size());
  trace.inputs.reserve(spec.size());
  Tensor x = input.reshaped(batched(n, spec.input_shape()));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const LayerSpec& l = spec.layers()[i];
    const Shape& in_shape = spec.layer_input_shape(i);
    const Shape& out_shape = spec.layer_output_shape(i);
    Tensor y;
    switch (l.kind) {
      case LayerKind::dense:
        y = dense_forward(x, params.layers.at(i), n);
        break;
      case LayerKind::conv2d:
        y = conv_forward(x, params.layers.at(i), l, in_shape, out_shape, n);
        break;
      case LayerKind::maxpool2d:
        y = maxpool_forward(x, l.window, in_shape, out_shape, n);
        break;
      case LayerKind::relu:
        y = x;
        for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
        break;
      case LayerKind::flatten:
        y = x.reshaped(batched(n, out_shape));
        break;
      case LayerKind::dropout: {
        y = x;
        std::optional<Tensor> mask = mask_for(i, l, x.shape());
        if (mask) {
          if (mask->shape() != x.shape())
            throw ValidationError("layer " + std::to_string(i) + " (dropout): mask shape " +
                                  shape_string(mask->shape()) + " does not match activation " +
                                  shape_string(x.shape()));
          for (std::size_t j = 0; j < y.size(); ++j) y[j] *= (*mask)[j];
          trace.masks[i] = std::move(mask);
        }
        break;
      }
      case LayerKind::softmax:
        y = softmax_rows(x, n);
        break;
    }
    trace.inputs.push_back(std::move(x));
    x = std::move(y);
  }
  if (!x.all_finite()) throw NumericError("non-finite network output");
  trace.output = x;
  return {std::move(x), std::move(trace)};
}

void check_params_present(const NetworkSpec& spec, const ModelParams& params) {
  for (std::size_t i : spec.parametric_layers()) {
    auto it = params.layers.find(i);
    if (it == params.layers.end() || it->second.weight.shape() != spec.weight_shape(i))
      throw ValidationError("layer " + std::to_string(i) + " (" + to_string(spec.layers()[i].kind) +
                            "): parameters missing or mis-shaped");
  }
}

}  // namespace

ForwardResult forward(const NetworkSpec& spec, const ModelParams& params, const Tensor& input,
                      Mode mode, Rng& rng) {
  check_params_present(spec, params);
  return run_forward(spec, params, input, mode,
                     [&](std::size_t, const LayerSpec& l, const Shape& shape) -> std::optional<Tensor> {
                       if (mode == Mode::eval || l.rate == 0.0) return std::nullopt;
                       Tensor mask(shape);
                       const double keep_scale = 1.0 / (1.0 - l.rate);
                       for (double& m : mask.values()) m = uniform01(rng) < l.rate ? 0.0 : keep_scale;
                       return mask;
                     });
}

Tensor forward_eval(const NetworkSpec& spec, const ModelParams& params, const Tensor& input) {
  Rng unused(0);
  return forward(spec, params, input, Mode::eval, unused).output;
}

ForwardResult forward_with_masks(const NetworkSpec& spec, const ModelParams& params,
                                 const Tensor& input, const DropoutMasks& masks) {
  check_params_present(spec, params);
  if (masks.size() != spec.size())
    throw ValidationError("mask list has " + std::to_string(masks.size()) + " slots, network has " +
                          std::to_string(spec.size()) + " layers");
  return run_forward(spec, params, input, Mode::train,
                     [&](std::size_t i, const LayerSpec&, const Shape&) { return masks[i]; });
}

ModelParams backward(const NetworkSpec& spec, const ModelParams& params, const ForwardTrace& trace,
                     const Tensor& upstream, GradientSeed seed) {
  if (trace.inputs.size() != spec.size() || trace.masks.size() != spec.size())
    throw ValidationError("trace has " + std::to_string(trace.inputs.size()) +
                          " layers, network has " + std::to_string(spec.size()));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Tensor& in = trace.inputs[i];
    const Shape& want = spec.layer_input_shape(i);
    if (in.rank() != want.size() + 1 || !std::equal(want.begin(), want.end(), in.shape().begin() + 1))
      throw ValidationError("trace does not match network at layer " + std::to_string(i));
  }
  if (upstream.shape() != trace.output.shape())
    throw ValidationError("upstream gradient shape " + shape_string(upstream.shape()) +
                          " does not match output " + shape_string(trace.output.shape()));
  check_params_present(spec, params);

  const std::size_t n = trace.output.shape()[0];
  ModelParams grads = zeros_like(spec);
  Tensor g = upstream;

  for (std::size_t li = spec.size(); li-- > 0;) {
    const LayerSpec& l = spec.layers()[li];
    const Tensor& x = trace.inputs[li];
    const Shape& in_shape = spec.layer_input_shape(li);
    const Shape& out_shape = spec.layer_output_shape(li);
    Tensor gx(x.shape());
    switch (l.kind) {
      case LayerKind::softmax: {
        if (seed == GradientSeed::logits) {
          gx = g;
          break;
        }
        const Tensor& p = trace.output;
        const std::size_t k = p.shape()[1];
        for (std::size_t b = 0; b < n; ++b) {
          double dot = 0.0;
          for (std::size_t j = 0; j < k; ++j) dot += g[b * k + j] * p[b * k + j];
          for (std::size_t j = 0; j < k; ++j) gx[b * k + j] = p[b * k + j] * (g[b * k + j] - dot);
        }
        break;
      }
      case LayerKind::dense: {
        const LayerParams& p = params.layers.at(li);
        LayerParams& d = grads.layers.at(li);
        const std::size_t in = in_shape[0], out = out_shape[0];
        for (std::size_t b = 0; b < n; ++b) {
          const double* xr = x.data() + b * in;
          const double* gr = g.data() + b * out;
          double* gxr = gx.data() + b * in;
          for (std::size_t o = 0; o < out; ++o) d.bias[o] += gr[o];
          for (std::size_t i = 0; i < in; ++i) {
            const double* wr = p.weight.data() + i * out;
            double* dwr = d.weight.data() + i * out;
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) {
              dwr[o] += xr[i] * gr[o];
              acc += wr[o] * gr[o];
            }
            gxr[i] = acc;
          }
        }
        break;
      }
      case LayerKind::conv2d: {
        const LayerParams& p = params.layers.at(li);
        LayerParams& d = grads.layers.at(li);
        const std::size_t H = in_shape[0], W = in_shape[1], C = in_shape[2];
        const std::size_t OH = out_shape[0], OW = out_shape[1], F = out_shape[2];
        const std::size_t K = l.kernel_size, S = l.stride;
        for (std::size_t b = 0; b < n; ++b) {
          const double* xb = x.data() + b * H * W * C;
          double* gxb = gx.data() + b * H * W * C;
          const double* gb = g.data() + b * OH * OW * F;
          for (std::size_t oy = 0; oy < OH; ++oy)
            for (std::size_t ox = 0; ox < OW; ++ox)
              for (std::size_t f = 0; f < F; ++f) {
                const double go = gb[(oy * OW + ox) * F + f];
                if (go == 0.0) continue;
                d.bias[f] += go;
                const double* wf = p.weight.data() + f * K * K * C;
                double* dwf = d.weight.data() + f * K * K * C;
                for (std::size_t ky = 0; ky < K; ++ky) {
                  const std::size_t off = ((oy * S + ky) * W + ox * S) * C;
                  for (std::size_t j = 0; j < K * C; ++j) {
                    dwf[ky * K * C + j] += go * xb[off + j];
                    gxb[off + j] += go * wf[ky * K * C + j];
                  }
                }
              }
        }
        break;
      }
      case LayerKind::maxpool2d: {
        const std::size_t W = in_shape[1], C = in_shape[2];
        const std::size_t OH = out_shape[0], OW = out_shape[1], win = l.window;
        for (std::size_t b = 0; b < n; ++b) {
          const double* xb = x.data() + b * in_shape[0] * W * C;
          double* gxb = gx.data() + b * in_shape[0] * W * C;
          const double* gb = g.data() + b * OH * OW * C;
          for (std::size_t oy = 0; oy < OH; ++oy)
            for (std::size_t ox = 0; ox < OW; ++ox)
              for (std::size_t c = 0; c < C; ++c) {
                std::size_t best_at = 0;
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t ky = 0; ky < win; ++ky)
                  for (std::size_t kx = 0; kx < win; ++kx) {
                    std::size_t at = ((oy * win + ky) * W + ox * win + kx) * C + c;
                    if (xb[at] > best) {
                      best = xb[at];
                      best_at = at;
                    }
                  }
                gxb[best_at] += gb[(oy * OW + ox) * C + c];
              }
        }
        break;
      }
      case LayerKind::relu:
        for (std::size_t j = 0; j < gx.size(); ++j) gx[j] = x[j] > 0.0 ? g[j] : 0.0;
        break;
      case LayerKind::flatten:
        gx = g.reshaped(x.shape());
        break;
      case LayerKind::dropout:
        if (trace.masks[li]) {
          const Tensor& m = *trace.masks[li];
          for (std::size_t j = 0; j < gx.size(); ++j) gx[j] = g[j] * m[j];
        } else {
          gx = g;
        }
        break;
    }
    g = std::move(gx);
  }
  return grads;
}

}  // namespace hmc::nn
