#include "smle/core/interval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smle {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi");
}

double Interval::magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Box interval_affine(const Matrix& w, std::span<const double> b, const Box& box) {
  require_dims(w.cols() == box.size(), "interval_affine: w.cols != |box|");
  require_dims(w.rows() == b.size(), "interval_affine: w.rows != |b|");
  Box out;
  out.reserve(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double lo = b[i];
    double hi = b[i];
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const double c = w(i, j);
      if (c > 0.0) {
        lo += c * box[j].lo;
        hi += c * box[j].hi;
      } else if (c < 0.0) {
        lo += c * box[j].hi;
        hi += c * box[j].lo;
      }
    }
    out.emplace_back(lo, hi);
  }
  return out;
}

bool box_bounded(const Box& box) {
  return std::all_of(box.begin(), box.end(), [](const Interval& i) { return i.bounded(); });
}

}  // namespace smle
