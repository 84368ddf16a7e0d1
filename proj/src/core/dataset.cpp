#include "smle/core/dataset.hpp"

namespace smle {

void Dataset::validate() const {
  require_dims(x.rows() == y.rows(), "Dataset: x and y row counts differ");
  if (!all_finite(x.data()) || !all_finite(y.data())) throw std::invalid_argument("Dataset: non-finite entries");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out{Matrix(rows.size(), x.cols()), Matrix(rows.size(), y.cols())};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_dims(rows[i] < size(), "Dataset::subset: row out of range");
    std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), out.x.row(i).begin());
    std::copy(y.row(rows[i]).begin(), y.row(rows[i]).end(), out.y.row(i).begin());
  }
  return out;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  require_dims(begin <= end && end <= size(), "Dataset::slice: bad range");
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = begin; i < end; ++i) rows[i - begin] = i;
  return subset(rows);
}

}  // namespace smle
