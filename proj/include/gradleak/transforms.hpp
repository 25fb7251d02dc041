#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "gradleak/tensor.hpp"

namespace gradleak {

// Discrete edits proposed during the search phase. Each is expressed as an
// index permutation: entry k of the result is the source position of the
// k-th output row. All positions are 0-based.
enum class Transform { Swap, MoveToken, MoveSubseq, MovePrefix };

inline constexpr std::array<Transform, 4> kAllTransforms = {Transform::Swap, Transform::MoveToken,
                                                            Transform::MoveSubseq, Transform::MovePrefix};

std::string_view to_string(Transform t);

using Permutation = std::vector<std::size_t>;

Permutation identity_permutation(std::size_t n);

// Exchange positions i and j.
Permutation swap_positions(std::size_t n, std::size_t i, std::size_t j);

// Remove token i and reinsert it directly after the token originally at j.
Permutation move_token(std::size_t n, std::size_t i, std::size_t j);

// Remove the block [i, j] (i < j) and reinsert it at `cut`, a cut point of the
// original sequence (0 = front, n = end) outside the block interior:
// cut <= i or cut >= j + 1.
Permutation move_subsequence(std::size_t n, std::size_t i, std::size_t j, std::size_t cut);

// Move the first `prefix_length` tokens (1..n) to the end.
Permutation move_prefix(std::size_t n, std::size_t prefix_length);

// Draws the positions of `kind` uniformly. Throws if n < 2.
Permutation random_transform(Transform kind, std::size_t n, std::mt19937_64& rng);

bool is_identity(std::span<const std::size_t> perm);

Tensor permute_rows(const Tensor& x, std::span<const std::size_t> perm);

template <class T>
std::vector<T> permute(std::span<const T> items, std::span<const std::size_t> perm) {
  std::vector<T> out;
  out.reserve(perm.size());
  for (std::size_t src : perm) out.push_back(items[src]);
  return out;
}

// New sequence with the rows of x rearranged by a random `kind` edit. x is
// not modified.
Tensor transform(const Tensor& x, Transform kind, std::mt19937_64& rng);

}  // namespace gradleak
