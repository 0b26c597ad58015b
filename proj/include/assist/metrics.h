#ifndef ASSIST_METRICS_H_
#define ASSIST_METRICS_H_

#include <span>

#include "assist/core.h"

namespace assist {

// Root mean squared error. Throws DimensionMismatch (also for empty input).
double rmse(const Vector& y, const Vector& y_hat);
// Mean absolute deviation.
double mad(const Vector& y, const Vector& y_hat);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample sd / sqrt(count); 0 for a single value
};
MeanSe mean_se(std::span<const double> values);

}  // namespace assist

#endif  // ASSIST_METRICS_H_
