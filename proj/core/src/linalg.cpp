#include "mdyn/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace mdyn {

Matrix psd_repair(const Matrix& m) {
    const Matrix s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    const Vector lam = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix psd_sqrt(const Matrix& m) {
    const Matrix s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    const Vector lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix covariance(const Eigen::Ref<const Matrix>& rows) {
    const Eigen::RowVectorXd mu = rows.colwise().mean();
    const Matrix c = rows.rowwise() - mu;
    return (c.transpose() * c) / static_cast<double>(rows.rows());
}

}  // namespace mdyn
