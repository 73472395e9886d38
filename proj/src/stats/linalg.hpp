#pragma once

#include <Eigen/Dense>

namespace coevo::stats::detail {

struct LeastSquares {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    double ssr = 0.0;
    Eigen::VectorXd xtx_inv_diag;  ///< diagonal of (X'X)^-1
};

/// Full-rank least squares via Householder QR.
inline LeastSquares least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    LeastSquares out;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    out.beta = qr.solve(y);
    out.residuals = y - x * out.beta;
    out.ssr = out.residuals.squaredNorm();
    const auto k = x.cols();
    Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    out.xtx_inv_diag = r_inv.rowwise().squaredNorm();
    return out;
}

}  // namespace coevo::stats::detail
