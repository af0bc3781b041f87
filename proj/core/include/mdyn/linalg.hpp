#pragma once

#include "mdyn/data_model.hpp"

namespace mdyn {

/// Symmetrizes `m` and clips negative eigenvalues at zero.
Matrix psd_repair(const Matrix& m);

/// Symmetric square root of the PSD-repaired matrix.
Matrix psd_sqrt(const Matrix& m);

/// Sample covariance with 1/M normalisation (rows are observations).
Matrix covariance(const Eigen::Ref<const Matrix>& rows);

}  // namespace mdyn
