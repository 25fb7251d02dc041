#include "gradleak/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gradleak {

AdamState::AdamState(std::size_t rows, std::size_t cols, double rate, double decay_factor,
                     std::size_t interval)
    : first_moment(rows, cols, 0.0),
      second_moment(rows, cols, 0.0),
      base_rate(rate),
      decay(decay_factor),
      decay_interval(interval) {
  if (rate <= 0.0) throw std::invalid_argument("AdamState: learning rate must be positive");
  if (decay_factor <= 0.0 || decay_factor > 1.0) {
    throw std::invalid_argument("AdamState: decay must lie in (0, 1]");
  }
  if (interval == 0) throw std::invalid_argument("AdamState: decay interval must be positive");
}

double AdamState::effective_rate() const {
  return base_rate * std::pow(decay, static_cast<double>(step / decay_interval));
}

Tensor adam_step(AdamState& state, const Tensor& variable, const Tensor& gradient) {
  if (!variable.same_shape(gradient) || !variable.same_shape(state.first_moment)) {
    throw std::invalid_argument("adam_step: shape mismatch variable " + variable.shape_str() +
                                " gradient " + gradient.shape_str() + " state " +
                                state.first_moment.shape_str());
  }
  if (!gradient.all_finite()) throw std::invalid_argument("adam_step: non-finite gradient");

  const double rate = state.effective_rate();
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  Tensor out = variable;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = gradient[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    out[i] -= rate * (m / correction1) / (std::sqrt(v / correction2) + state.epsilon);
  }
  return out;
}

}  // namespace gradleak
