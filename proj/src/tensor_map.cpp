#include "gradleak/tensor_map.hpp"

#include <stdexcept>

namespace gradleak {

void TensorMap::set(const std::string& name, Tensor value) {
  auto it = index_.find(name);
  if (it != index_.end()) {
    entries_[it->second].second = std::move(value);
    return;
  }
  index_.emplace(name, entries_.size());
  entries_.emplace_back(name, std::move(value));
}

const Tensor& TensorMap::at(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("TensorMap: no entry '" + std::string(name) + "'");
  return entries_[it->second].second;
}

Tensor& TensorMap::at(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const TensorMap&>(*this).at(name));
}

bool TensorMap::contains(std::string_view name) const { return index_.contains(std::string(name)); }

bool TensorMap::same_layout(const TensorMap& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first) return false;
    if (!entries_[i].second.same_shape(other.entries_[i].second)) return false;
  }
  return true;
}

std::size_t TensorMap::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

bool TensorMap::all_finite() const {
  for (const auto& [name, t] : entries_)
    if (!t.all_finite()) return false;
  return true;
}

BoundParams::BoundParams(ad::Tape& tape, const TensorMap& params, bool as_variables) : tape_(&tape) {
  for (const auto& [name, t] : params) {
    index_.emplace(name, vars_.size());
    names_.push_back(name);
    vars_.push_back(as_variables ? tape.variable(t) : tape.constant(t));
  }
}

ad::Var BoundParams::operator[](std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("BoundParams: no parameter '" + std::string(name) + "'");
  return vars_[it->second];
}

}  // namespace gradleak
