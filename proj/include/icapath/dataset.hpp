#pragma once

#include <vector>

#include "icapath/family.hpp"

namespace icapath {

/// Design matrix and response. `column_scales` maps the stored columns back
/// to the columns the caller supplied: original_x_j = x_j * column_scales_j.
struct Dataset {
  Matrix x;
  Vector y;
  Vector column_scales;
  bool standardized = false;

  Dataset() = default;
  Dataset(Matrix x_in, Vector y_in);

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }

  /// Row subset (used for cross-validation folds); never marked standardized.
  Dataset rows(const std::vector<Eigen::Index>& idx) const;
};

/// Rescales every column to ‖x_j‖₂ = √n (no centering: the model has no
/// intercept). Throws DataError on an all-zero column.
Dataset standardize(const Dataset& data);

}  // namespace icapath
