#include "gradleak/transforms.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gradleak {
namespace {

void check_pos(std::size_t pos, std::size_t n, const char* what) {
  if (pos >= n) {
    throw std::invalid_argument(std::string(what) + ": position " + std::to_string(pos) +
                                " out of range for length " + std::to_string(n));
  }
}

std::size_t uniform(std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::Swap: return "swap";
    case Transform::MoveToken: return "move-token";
    case Transform::MoveSubseq: return "move-subseq";
    case Transform::MovePrefix: return "move-prefix";
  }
  return "?";
}

Permutation identity_permutation(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return p;
}

Permutation swap_positions(std::size_t n, std::size_t i, std::size_t j) {
  check_pos(i, n, "swap");
  check_pos(j, n, "swap");
  Permutation p = identity_permutation(n);
  std::swap(p[i], p[j]);
  return p;
}

Permutation move_token(std::size_t n, std::size_t i, std::size_t j) {
  check_pos(i, n, "move-token");
  check_pos(j, n, "move-token");
  Permutation rest;
  rest.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    if (k != i) rest.push_back(k);
  if (i == j) return identity_permutation(n);
  // Index of the original token j inside `rest`, plus one to land after it.
  const std::size_t insert_at = j > i ? j : j + 1;
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(insert_at), i);
  return rest;
}

Permutation move_subsequence(std::size_t n, std::size_t i, std::size_t j, std::size_t cut) {
  check_pos(j, n, "move-subseq");
  if (i >= j) throw std::invalid_argument("move-subseq: need i < j");
  if (cut > n || (cut > i && cut <= j)) {
    throw std::invalid_argument("move-subseq: cut point " + std::to_string(cut) + " inside block");
  }
  Permutation out;
  out.reserve(n);
  auto push_block = [&] {
    for (std::size_t k = i; k <= j; ++k) out.push_back(k);
  };
  for (std::size_t k = 0; k <= n; ++k) {
    if (k == cut) push_block();
    if (k < n && (k < i || k > j)) out.push_back(k);
  }
  return out;
}

Permutation move_prefix(std::size_t n, std::size_t prefix_length) {
  if (prefix_length == 0 || prefix_length > n) {
    throw std::invalid_argument("move-prefix: prefix length must be in [1, n]");
  }
  Permutation p = identity_permutation(n);
  std::rotate(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(prefix_length), p.end());
  return p;
}

Permutation random_transform(Transform kind, std::size_t n, std::mt19937_64& rng) {
  if (n < 2) throw std::invalid_argument("transform: sequence needs at least two tokens");
  switch (kind) {
    case Transform::Swap: {
      const std::size_t i = uniform(0, n - 1, rng);
      const std::size_t j = uniform(0, n - 1, rng);
      return swap_positions(n, i, j);
    }
    case Transform::MoveToken: {
      const std::size_t i = uniform(0, n - 1, rng);
      const std::size_t j = uniform(0, n - 1, rng);
      return move_token(n, i, j);
    }
    case Transform::MoveSubseq: {
      // Uniform over pairs i < j, then uniform over the admissible cut points.
      const std::size_t pairs = n * (n - 1) / 2;
      std::size_t k = uniform(0, pairs - 1, rng);
      std::size_t i = 0;
      while (k >= n - 1 - i) {
        k -= n - 1 - i;
        ++i;
      }
      const std::size_t j = i + 1 + k;
      const std::size_t admissible = (i + 1) + (n - j);
      std::size_t c = uniform(0, admissible - 1, rng);
      const std::size_t cut = c <= i ? c : j + 1 + (c - i - 1);
      return move_subsequence(n, i, j, cut);
    }
    case Transform::MovePrefix: return move_prefix(n, uniform(1, n, rng));
  }
  throw std::logic_error("random_transform: unknown kind");
}

bool is_identity(std::span<const std::size_t> perm) {
  for (std::size_t k = 0; k < perm.size(); ++k)
    if (perm[k] != k) return false;
  return true;
}

Tensor permute_rows(const Tensor& x, std::span<const std::size_t> perm) {
  if (perm.size() != x.rows()) throw std::invalid_argument("permute_rows: permutation length mismatch");
  Tensor out(x.rows(), x.cols());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    auto src = x.row_span(perm[k]);
    std::copy(src.begin(), src.end(), out.row_span(k).begin());
  }
  return out;
}

Tensor transform(const Tensor& x, Transform kind, std::mt19937_64& rng) {
  return permute_rows(x, random_transform(kind, x.rows(), rng));
}

}  // namespace gradleak
