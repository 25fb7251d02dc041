#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gradleak/autodiff.hpp"
#include "gradleak/tensor.hpp"

namespace gradleak {

// Insertion-ordered map from layer name to tensor. Holds model parameters and
// the per-layer gradients exchanged in a federated round.
class TensorMap {
 public:
  using Entry = std::pair<std::string, Tensor>;

  void set(const std::string& name, Tensor value);
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);
  bool contains(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>::iterator begin() { return entries_.begin(); }
  std::vector<Entry>::iterator end() { return entries_.end(); }
  std::vector<Entry>::const_iterator begin() const { return entries_.begin(); }
  std::vector<Entry>::const_iterator end() const { return entries_.end(); }

  // Same names in the same order with the same shapes.
  bool same_layout(const TensorMap& other) const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const TensorMap& a, const TensorMap& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// A TensorMap placed on a tape, either as trainable variables or constants.
class BoundParams {
 public:
  BoundParams(ad::Tape& tape, const TensorMap& params, bool as_variables);

  ad::Var operator[](std::string_view name) const;
  ad::Tape& tape() const { return *tape_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ad::Var>& vars() const { return vars_; }

 private:
  ad::Tape* tape_;
  std::vector<std::string> names_;
  std::vector<ad::Var> vars_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace gradleak
