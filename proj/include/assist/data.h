#ifndef ASSIST_DATA_H_
#define ASSIST_DATA_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "assist/core.h"

namespace assist {

enum class GeneratorKind { kFriedman1, kLinear };

struct SyntheticSpec {
  GeneratorKind kind = GeneratorKind::kFriedman1;
  Eigen::Index n = 1000;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
  // friedman1: appends this many Uniform(0,1) columns that do not enter y.
  int noise_features = 0;
  // linear only.
  Vector coefficients;
  double rho = 0.0;  // equicorrelation between feature columns
  // linear only: force the sample mean to exactly 0 and the sample covariance
  // to exactly the target equicorrelation matrix.
  bool empirical = false;
};

struct Dataset {
  FeaturePartition features;
  TaskLabels labels;
};

// y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 + noise.
double friedman1_mean(double x1, double x2, double x3, double x4, double x5);

Dataset gen_friedman1(const SyntheticSpec& spec);
// y = X b + noise with equicorrelated standard normal columns.
Dataset gen_linear(const SyntheticSpec& spec);
Dataset generate(const SyntheticSpec& spec);

// Zero-padded row names "000042"; width grows with n.
IdList row_ids(Eigen::Index n);

struct CsvTable {
  FeaturePartition features;
  std::optional<TaskLabels> labels;
};

// RFC-4180 style: header row, optional quoting. Throws MissingColumn,
// NonNumericCell or DuplicateId.
CsvTable load_csv(const std::string& path, const std::string& id_column,
                  const std::optional<std::string>& label_column = std::nullopt);
CsvTable parse_csv(std::string_view text, const std::string& id_column,
                   const std::optional<std::string>& label_column = std::nullopt);

void write_csv(const std::string& path, const FeaturePartition& features,
               const TaskLabels* labels = nullptr,
               const std::string& id_column = "id",
               const std::string& label_column = "y");

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  // Overrides floor(train_fraction * n) when set.
  std::optional<std::size_t> train_count;
};

struct TrainTestIds {
  IdList train;
  IdList test;
};

// Seeded shuffle, first floor(fraction * n) ids to train, rest to test. Both
// halves keep the input order. Throws InvalidArgument for fewer than 2 ids.
TrainTestIds split(std::span<const SampleId> ids, const SplitSpec& spec);

}  // namespace assist

#endif  // ASSIST_DATA_H_
