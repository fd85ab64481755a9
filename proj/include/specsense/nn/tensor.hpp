#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specsense/common.hpp"

namespace specsense::nn {

inline std::size_t shape_size(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, T fill = T{}) : shape(std::move(s)), values(shape_size(shape), fill) {}

  std::size_t size() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }

  // Row-major strided access for the common ranks.
  T& at(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }
  const T& at(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }
  T& at(std::size_t i, std::size_t j, std::size_t k) { return values[(i * shape[1] + j) * shape[2] + k]; }
  const T& at(std::size_t i, std::size_t j, std::size_t k) const { return values[(i * shape[1] + j) * shape[2] + k]; }
};

enum class InitKind { Zero, XavierUniform, TruncatedNormal };

struct ParamSlot {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
  InitKind init = InitKind::Zero;
  std::size_t fan_in = 0;  // Xavier only
  std::size_t fan_out = 0;
};

/// Every trainable value of a network in one flat buffer, addressed by named slots.
/// Gradients and optimiser state reuse the same layout.
class ParamSet {
 public:
  std::size_t add(std::string name, std::vector<std::size_t> shape, InitKind init, std::size_t fan_in = 0,
                  std::size_t fan_out = 0) {
    ParamSlot s;
    s.name = std::move(name);
    s.shape = std::move(shape);
    s.offset = values_.size();
    s.size = shape_size(s.shape);
    s.init = init;
    s.fan_in = fan_in;
    s.fan_out = fan_out;
    values_.resize(values_.size() + s.size, 0.0);
    slots_.push_back(std::move(s));
    return slots_.size() - 1;
  }

  const std::vector<ParamSlot>& slots() const { return slots_; }
  const ParamSlot& slot(std::size_t i) const { return slots_[i]; }
  const ParamSlot& slot(const std::string& name) const {
    for (const auto& s : slots_)
      if (s.name == name) return s;
    throw Error(Errc::InvalidArgument, "no parameter slot named " + name);
  }

  std::span<double> view(std::size_t i) { return {values_.data() + slots_[i].offset, slots_[i].size}; }
  std::span<const double> view(std::size_t i) const { return {values_.data() + slots_[i].offset, slots_[i].size}; }
  std::span<double> view(const std::string& name) {
    const auto& s = slot(name);
    return {values_.data() + s.offset, s.size};
  }
  std::span<const double> view(const std::string& name) const {
    const auto& s = slot(name);
    return {values_.data() + s.offset, s.size};
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  bool operator==(const ParamSet& o) const {
    if (values_ != o.values_ || slots_.size() != o.slots_.size()) return false;
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i].name != o.slots_[i].name || slots_[i].shape != o.slots_[i].shape) return false;
    return true;
  }

 private:
  std::vector<ParamSlot> slots_;
  std::vector<double> values_;
};

/// Half-open index range into a ParamSet buffer.
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;
};

}  // namespace specsense::nn
