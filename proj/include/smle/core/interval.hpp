#pragma once

#include <span>
#include <vector>

#include "smle/core/linalg.hpp"

namespace smle {

/// Closed real interval. Construction enforces lo <= hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo, double hi);

  double width() const { return hi - lo; }
  double magnitude() const;  // max(|lo|, |hi|)
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  bool bounded() const;

  friend bool operator==(const Interval&, const Interval&) = default;
};

using Box = std::vector<Interval>;

Interval hull(const Interval& a, const Interval& b);

/// Tight enclosure of {w x + b : x in box}, row by row.
Box interval_affine(const Matrix& w, std::span<const double> b, const Box& box);

bool box_bounded(const Box& box);

}  // namespace smle
