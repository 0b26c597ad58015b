#include "assist/data.h"

#include <Eigen/Cholesky>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "assist/errors.h"
#include "assist/random.h"

namespace assist {

double friedman1_mean(double x1, double x2, double x3, double x4, double x5) {
  return 10.0 * std::sin(std::numbers::pi * x1 * x2) + 20.0 * (x3 - 0.5) * (x3 - 0.5) +
         10.0 * x4 + 5.0 * x5;
}

IdList row_ids(Eigen::Index n) {
  int width = 6;
  for (Eigen::Index limit = 1000000; limit <= n - 1; limit *= 10) ++width;
  IdList ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::string digits = std::to_string(i);
    ids.emplace_back(std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits);
  }
  return ids;
}

namespace {

void check_common(const SyntheticSpec& spec) {
  if (spec.n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  if (!(spec.noise_sd >= 0.0) || !std::isfinite(spec.noise_sd)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_sd must be >= 0");
  }
}

std::vector<std::string> column_names(Eigen::Index p) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

Vector noise_vector(const SyntheticSpec& spec) {
  Engine engine = make_engine(derive_seed(spec.seed, "noise"));
  Vector eps(spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i) eps[i] = spec.noise_sd * standard_normal(engine);
  return eps;
}

}  // namespace

Dataset gen_friedman1(const SyntheticSpec& spec) {
  check_common(spec);
  if (spec.noise_features < 0) {
    throw Error(ErrorCode::kInvalidArgument, "noise_features must be >= 0");
  }
  const Eigen::Index p = 5 + spec.noise_features;
  Engine engine = make_engine(derive_seed(spec.seed, "features"));
  Matrix x(spec.n, p);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = uniform01(engine);
  }
  const Vector eps = noise_vector(spec);
  Vector y(spec.n);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    y[i] = friedman1_mean(x(i, 0), x(i, 1), x(i, 2), x(i, 3), x(i, 4)) + eps[i];
  }
  IdList ids = row_ids(spec.n);
  return {FeaturePartition(ids, std::move(x), column_names(p)),
          TaskLabels(std::move(ids), std::move(y))};
}

Dataset gen_linear(const SyntheticSpec& spec) {
  check_common(spec);
  const Eigen::Index p = spec.coefficients.size();
  if (p < 1) throw Error(ErrorCode::kInvalidArgument, "linear generator needs coefficients");
  if (!(spec.rho >= 0.0 && spec.rho < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rho must lie in [0, 1)");
  }

  Engine engine = make_engine(derive_seed(spec.seed, "features"));
  Matrix z(spec.n, p);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = standard_normal(engine);
  }

  // Target covariance (1 - rho) I + rho 11^T and its Cholesky factor.
  const Matrix target = (1.0 - spec.rho) * Matrix::Identity(p, p) +
                        spec.rho * Matrix::Ones(p, p);
  const Matrix c = target.llt().matrixL();

  Matrix x;
  if (spec.empirical) {
    if (spec.n <= p) {
      throw Error(ErrorCode::kInvalidArgument, "empirical covariance needs n > p");
    }
    const Matrix zc = z.rowwise() - z.colwise().mean();
    const Matrix sample = zc.transpose() * zc / static_cast<double>(spec.n - 1);
    const Eigen::LLT<Matrix> llt(sample);
    // zc L^{-T} has identity sample covariance; then colour with C^T.
    const Matrix white =
        llt.matrixL().solve(zc.transpose()).transpose();
    x = white * c.transpose();
  } else {
    x = z * c.transpose();
  }

  const Vector eps = noise_vector(spec);
  Vector y = x * spec.coefficients + eps;
  IdList ids = row_ids(spec.n);
  return {FeaturePartition(ids, std::move(x), column_names(p)),
          TaskLabels(std::move(ids), std::move(y))};
}

Dataset generate(const SyntheticSpec& spec) {
  return spec.kind == GeneratorKind::kFriedman1 ? gen_friedman1(spec) : gen_linear(spec);
}

namespace {

std::vector<std::vector<std::string>> parse_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
      if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
      record.clear();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw Error(ErrorCode::kInvalidArgument, "unterminated quoted CSV field");
  if (field_started || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view raw, std::size_t line, const std::string& column) {
  const std::string_view cell = trim(raw);
  double value = 0.0;
  const char* begin = cell.data();
  if (!cell.empty() && cell.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
      !std::isfinite(value)) {
    throw Error(ErrorCode::kNonNumericCell, "line " + std::to_string(line) + ", column '" +
                                                column + "': '" + std::string(raw) + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

CsvTable parse_csv(std::string_view text, const std::string& id_column,
                   const std::optional<std::string>& label_column) {
  const auto records = parse_records(text);
  if (records.empty()) throw Error(ErrorCode::kMissingColumn, "CSV has no header row");
  const auto& header = records[0];
  auto find = [&](const std::string& name) -> std::ptrdiff_t {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (trim(header[j]) == name) return static_cast<std::ptrdiff_t>(j);
    }
    return -1;
  };
  const std::ptrdiff_t id_col = find(id_column);
  if (id_col < 0) throw Error(ErrorCode::kMissingColumn, "id column '" + id_column + "'");
  std::ptrdiff_t label_col = -1;
  if (label_column) {
    label_col = find(*label_column);
    if (label_col < 0) throw Error(ErrorCode::kMissingColumn, "label column '" + *label_column + "'");
  }

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) == id_col || static_cast<std::ptrdiff_t>(j) == label_col) continue;
    feature_cols.push_back(j);
    names.emplace_back(trim(header[j]));
  }

  const std::size_t n = records.size() - 1;
  IdList ids;
  ids.reserve(n);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_cols.size()));
  Vector y(label_col >= 0 ? static_cast<Eigen::Index>(n) : 0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    if (rec.size() != header.size()) {
      throw Error(ErrorCode::kMissingColumn, "line " + std::to_string(r + 2) + " has " +
                                                 std::to_string(rec.size()) + " fields, header has " +
                                                 std::to_string(header.size()));
    }
    ids.emplace_back(std::string(trim(rec[static_cast<std::size_t>(id_col)])));
    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_cell(rec[feature_cols[c]], r + 2, names[c]);
    }
    if (label_col >= 0) {
      y[static_cast<Eigen::Index>(r)] =
          parse_cell(rec[static_cast<std::size_t>(label_col)], r + 2, *label_column);
    }
  }

  CsvTable table{FeaturePartition(ids, std::move(x), std::move(names)), std::nullopt};
  if (label_col >= 0) table.labels = TaskLabels(std::move(ids), std::move(y));
  return table;
}

CsvTable load_csv(const std::string& path, const std::string& id_column,
                  const std::optional<std::string>& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), id_column, label_column);
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void write_csv(const std::string& path, const FeaturePartition& features,
               const TaskLabels* labels, const std::string& id_column,
               const std::string& label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  Vector y;
  if (labels != nullptr) y = labels->values_for(features.ids());
  out << quote_if_needed(id_column);
  for (const auto& name : features.feature_names()) out << ',' << quote_if_needed(name);
  if (labels != nullptr) out << ',' << quote_if_needed(label_column);
  out << '\n';
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out << quote_if_needed(features.ids()[static_cast<std::size_t>(i)].value());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      out << ',' << format_double(features.features()(i, j));
    }
    if (labels != nullptr) out << ',' << format_double(y[i]);
    out << '\n';
  }
}

TrainTestIds split(std::span<const SampleId> ids, const SplitSpec& spec) {
  const std::size_t n = ids.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "split needs at least two ids");
  std::size_t train_count = 0;
  if (spec.train_count) {
    train_count = *spec.train_count;
    if (train_count > n) throw Error(ErrorCode::kInvalidArgument, "train_count exceeds id count");
  } else {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "train fraction must lie in (0, 1)");
    }
    // The relative nudge keeps products like 0.7 * 10 from landing at 6.999...
    train_count = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(n) * (1.0 + 1e-12)));
  }

  Engine engine = make_engine(derive_seed(spec.seed, "split"));
  const std::vector<std::size_t> order = permutation(n, engine);
  std::vector<bool> in_train(n, false);
  for (std::size_t k = 0; k < train_count; ++k) in_train[order[k]] = true;

  TrainTestIds out;
  out.train.reserve(train_count);
  out.test.reserve(n - train_count);
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? out.train : out.test).push_back(ids[i]);
  return out;
}

}  // namespace assist
