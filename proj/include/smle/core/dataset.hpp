#pragma once

#include <span>

#include "smle/core/linalg.hpp"

namespace smle {

/// Row-aligned features and targets.
struct Dataset {
  Matrix x;
  Matrix y;

  std::size_t size() const { return x.rows(); }
  std::size_t input_dim() const { return x.cols(); }
  std::size_t output_dim() const { return y.cols(); }

  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset slice(std::size_t begin, std::size_t end) const;
};

}  // namespace smle
