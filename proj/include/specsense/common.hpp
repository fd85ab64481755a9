#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace specsense {

enum class Errc {
  InputTooShort,
  InvalidConfig,
  AlreadyCalibrated,
  BandOutsideSpectrogram,
  TooFewTimeRows,
  InvalidSpec,
  IoFailure,
  FormatError,
  InsufficientStratum,
  UnitsNotCalibrated,
  InvalidPeriod,
  EmptyTrainingSet,
  DimensionMismatch,
  ShapeMismatch,
  NonFiniteLoss,
  DegenerateLabels,
  NoSignals,
  Unachievable,
  InvalidArgument,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::InputTooShort: return "InputTooShort";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::AlreadyCalibrated: return "AlreadyCalibrated";
    case Errc::BandOutsideSpectrogram: return "BandOutsideSpectrogram";
    case Errc::TooFewTimeRows: return "TooFewTimeRows";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::IoFailure: return "IoFailure";
    case Errc::FormatError: return "FormatError";
    case Errc::InsufficientStratum: return "InsufficientStratum";
    case Errc::UnitsNotCalibrated: return "UnitsNotCalibrated";
    case Errc::InvalidPeriod: return "InvalidPeriod";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::NoSignals: return "NoSignals";
    case Errc::Unachievable: return "Unachievable";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Domain error carrying a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Dense row-major matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// SplitMix64 step; used to derive independent seeds for sub-streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace specsense
