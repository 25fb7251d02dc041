#pragma once

#include <span>
#include <string_view>

#include "gradleak/autodiff.hpp"
#include "gradleak/federated.hpp"

namespace gradleak {

enum class GradientLoss { Cos, Tag, L2 };

std::string_view to_string(GradientLoss loss);
GradientLoss parse_gradient_loss(std::string_view name);

// sum_i ||a_i - b_i||_2 + alpha_tag * ||a_i - b_i||_1 over layers. With
// alpha_tag = 0 this is the plain L2 gradient distance.
ad::Var loss_tag(std::span<const ad::Var> observed, std::span<const ad::Var> candidate, double alpha_tag);

// 1 - mean_i cos(a_i, b_i). A layer where either side has zero norm
// contributes a cosine of 0; the number of such layers is written to
// `degenerate_layers` when given. Norms below kZeroNormTolerance times the
// largest layer norm of the same set count as zero: some layers (key biases,
// for instance) have an exactly zero gradient that arrives as round-off.
inline constexpr double kZeroNormTolerance = 1e-10;

ad::Var loss_cos(std::span<const ad::Var> observed, std::span<const ad::Var> candidate,
                 std::size_t* degenerate_layers = nullptr);

// (mean_i ||x_i|| - mean_norm_vocab)^2 where i runs over the rows of every
// batch element.
ad::Var loss_reg(std::span<const ad::Var> rows_per_element, double mean_vocab_norm);

double mean_row_norm(const Tensor& table);

// Evaluations on plain gradient sets, over every layer of `observed`.
double loss_tag(const GradientSet& observed, const GradientSet& candidate, double alpha_tag);
double loss_cos(const GradientSet& observed, const GradientSet& candidate, std::size_t* degenerate_layers = nullptr);
double loss_reg(std::span<const Tensor> rows_per_element, const Tensor& token_table);

}  // namespace gradleak
