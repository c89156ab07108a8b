#include "hmc/nn/adam.hpp"

#include <cmath>

#include "hmc/core/error.hpp"

namespace hmc::nn {

AdamState AdamState::for_params(const ModelParams& params, AdamHyper hyper) {
  AdamState s;
  s.hyper = hyper;
  s.first_moment = params;
  for (auto& [i, lp] : s.first_moment.layers) {
    lp.weight.fill(0.0);
    lp.bias.fill(0.0);
  }
  s.second_moment = s.first_moment;
  return s;
}

namespace {

void update(Tensor& w, const Tensor& g, Tensor& m, Tensor& v, const AdamHyper& h, double lr,
            double correction1, double correction2) {
  if (w.shape() != g.shape() || w.shape() != m.shape() || w.shape() != v.shape())
    throw ValidationError("adam: gradient or moment shape mismatch");
  for (std::size_t j = 0; j < w.size(); ++j) {
    m[j] = h.beta1 * m[j] + (1.0 - h.beta1) * g[j];
    v[j] = h.beta2 * v[j] + (1.0 - h.beta2) * g[j] * g[j];
    const double m_hat = m[j] / correction1;
    const double v_hat = v[j] / correction2;
    w[j] -= lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

}  // namespace

void adam_step(AdamState& state, ModelParams& params, const ModelParams& grads, double lr) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.hyper.beta1, t);
  const double c2 = 1.0 - std::pow(state.hyper.beta2, t);
  for (auto& [i, lp] : params.layers) {
    const LayerParams& g = grads.layers.at(i);
    LayerParams& m = state.first_moment.layers.at(i);
    LayerParams& v = state.second_moment.layers.at(i);
    update(lp.weight, g.weight, m.weight, v.weight, state.hyper, lr, c1, c2);
    update(lp.bias, g.bias, m.bias, v.bias, state.hyper, lr, c1, c2);
  }
}

}  // namespace hmc::nn
