#include "assist/metrics.h"

#include <cmath>

#include "assist/errors.h"

namespace assist {

namespace {

void check(const Vector& y, const Vector& y_hat) {
  if (y.size() != y_hat.size() || y.size() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "metric needs equal non-empty vectors, got " +
                                                   std::to_string(y.size()) + " and " +
                                                   std::to_string(y_hat.size()));
  }
}

}  // namespace

double rmse(const Vector& y, const Vector& y_hat) {
  check(y, y_hat);
  return std::sqrt((y - y_hat).squaredNorm() / static_cast<double>(y.size()));
}

double mad(const Vector& y, const Vector& y_hat) {
  check(y, y_hat);
  return (y - y_hat).cwiseAbs().sum() / static_cast<double>(y.size());
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    out.se = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace assist
