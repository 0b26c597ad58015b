#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "assist/errors.h"
#include "assist/learners.h"

namespace assist {

FittedModel fit_least_squares(const Matrix& x, const Vector& y, double lambda) {
  if (x.rows() != y.size() || y.size() < 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "least squares needs rows(X) = len(y) >= 1, got " +
                    std::to_string(x.rows()) + " and " + std::to_string(y.size()));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be a finite value >= 0");
  }

  // Centering removes the intercept from the solve, which keeps it out of
  // both the ridge penalty and the minimum-norm criterion.
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Matrix xc = x.rowwise() - x_mean;
  const Vector yc = y.array() - y_mean;
  const Eigen::Index p = x.cols();

  Vector beta = Vector::Zero(p);
  if (p > 0) {
    if (lambda > 0.0) {
      Matrix a(x.rows() + p, p);
      a << xc, std::sqrt(lambda) * Matrix::Identity(p, p);
      Vector b(x.rows() + p);
      b << yc, Vector::Zero(p);
      beta = a.colPivHouseholderQr().solve(b);
    } else {
      Eigen::ColPivHouseholderQR<Matrix> qr(xc);
      if (qr.rank() == p) {
        beta = qr.solve(yc);
      } else {
        Eigen::BDCSVD<Matrix> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(qr.threshold());
        beta = svd.solve(yc);
      }
    }
  }

  LinearModel model;
  model.intercept = y_mean - x_mean.dot(beta);
  model.coefficients = std::move(beta);
  if (!model.coefficients.allFinite() || !std::isfinite(model.intercept)) {
    throw Error(ErrorCode::kNonFiniteLoss, "least squares produced non-finite coefficients");
  }

  FittedModel fitted;
  fitted.params = std::move(model);
  fitted.meta.n = x.rows();
  fitted.meta.p = p;
  return fitted;
}

}  // namespace assist
