#pragma once

#include <cstddef>

#include "gradleak/tensor.hpp"

namespace gradleak {

// Adam with a step-decayed learning rate: after k steps the rate is
// base_rate * decay^floor(k / decay_interval).
struct AdamState {
  Tensor first_moment;
  Tensor second_moment;
  std::size_t step = 0;
  double base_rate = 0.01;
  double decay = 1.0;
  std::size_t decay_interval = 50;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(std::size_t rows, std::size_t cols, double rate, double decay_factor = 1.0,
            std::size_t interval = 50);

  double effective_rate() const;
};

// Returns the updated variable and advances the state. Throws
// std::invalid_argument on a shape mismatch or a non-finite gradient.
Tensor adam_step(AdamState& state, const Tensor& variable, const Tensor& gradient);

}  // namespace gradleak
