#include "icapath/dataset.hpp"

#include <cmath>
#include <string>

#include "icapath/errors.hpp"

namespace icapath {

Dataset::Dataset(Matrix x_in, Vector y_in)
    : x(std::move(x_in)),
      y(std::move(y_in)),
      column_scales(Vector::Ones(x.cols())) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw DataError("dataset needs at least one row and one column");
  }
  if (x.rows() != y.size()) {
    throw DataError("design has " + std::to_string(x.rows()) +
                    " rows but response has " + std::to_string(y.size()));
  }
  if (!x.allFinite()) throw DataError("design matrix has non-finite entries");
}

Dataset Dataset::rows(const std::vector<Eigen::Index>& idx) const {
  Matrix sub_x(static_cast<Eigen::Index>(idx.size()), p());
  Vector sub_y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    sub_x.row(static_cast<Eigen::Index>(r)) = x.row(idx[r]);
    sub_y[static_cast<Eigen::Index>(r)] = y[idx[r]];
  }
  Dataset out(std::move(sub_x), std::move(sub_y));
  out.column_scales = column_scales;
  return out;
}

Dataset standardize(const Dataset& data) {
  Dataset out = data;
  const double root_n = std::sqrt(static_cast<double>(data.n()));
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    const double norm = data.x.col(j).norm();
    if (!(norm > 0.0)) {
      throw DataError("column " + std::to_string(j + 1) +
                      " is identically zero and cannot be standardized");
    }
    const double s = norm / root_n;
    out.x.col(j) /= s;
    out.column_scales[j] = data.column_scales[j] * s;
  }
  out.standardized = true;
  return out;
}

}  // namespace icapath
