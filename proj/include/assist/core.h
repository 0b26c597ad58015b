#ifndef ASSIST_CORE_H_
#define ASSIST_CORE_H_

#include <Eigen/Dense>
#include <compare>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace assist {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Opaque row key shared across modules (patient id, timestamp, username).
class SampleId {
 public:
  SampleId() = default;
  explicit SampleId(std::string value);

  const std::string& value() const noexcept { return value_; }

  friend auto operator<=>(const SampleId&, const SampleId&) = default;
  friend bool operator==(const SampleId&, const SampleId&) = default;

 private:
  std::string value_;
};

using IdList = std::vector<SampleId>;

struct SampleIdHash {
  std::size_t operator()(const SampleId& id) const noexcept {
    return std::hash<std::string>{}(id.value());
  }
};

IdList make_ids(std::initializer_list<const char*> names);

// One module's private vertical slice: a feature table keyed by sample id.
class FeaturePartition {
 public:
  FeaturePartition() = default;
  // Throws DuplicateId, DimensionMismatch or InvalidArgument (non-finite).
  FeaturePartition(IdList ids, Matrix features,
                   std::vector<std::string> feature_names);

  const IdList& ids() const noexcept { return ids_; }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<std::string>& feature_names() const noexcept {
    return feature_names_;
  }
  Eigen::Index rows() const noexcept { return features_.rows(); }
  Eigen::Index cols() const noexcept { return features_.cols(); }

  // -1 when absent.
  Eigen::Index row_of(const SampleId& id) const;
  bool contains(const SampleId& id) const { return row_of(id) >= 0; }

  // Rows for `ids` in the given order. Throws MissingId.
  Matrix rows_for(std::span<const SampleId> ids) const;

 private:
  IdList ids_;
  Matrix features_;
  std::vector<std::string> feature_names_;
  std::unordered_map<SampleId, Eigen::Index, SampleIdHash> row_index_;
};

// Public label vector aligned to sample ids.
class TaskLabels {
 public:
  TaskLabels() = default;
  TaskLabels(IdList ids, Vector values);

  const IdList& ids() const noexcept { return ids_; }
  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }

  // Throws MissingId.
  Vector values_for(std::span<const SampleId> ids) const;

 private:
  IdList ids_;
  Vector values_;
  std::unordered_map<SampleId, Eigen::Index, SampleIdHash> row_index_;
};

// Inner join of several partitions' ids, sorted lexicographically, with the
// row position of each common id inside every partition.
struct CollationIndex {
  IdList ids;
  std::vector<std::vector<Eigen::Index>> row_maps;  // [partition][position]
};

// Throws InvalidArgument (< 2 partitions) or EmptyIntersection.
CollationIndex collate(std::span<const FeaturePartition* const> partitions);
CollationIndex collate(std::initializer_list<const FeaturePartition*> parts);

// Lexicographically sorted intersection of plain id lists.
IdList intersect_ids(std::span<const IdList* const> id_lists);

// Rows of `partition` in index order. Throws MissingId.
Matrix align(const FeaturePartition& partition, const CollationIndex& index);

// Splits columns into disjoint named groups; each output keeps the full id
// sequence. Throws UnknownColumn or OverlappingGroups.
std::vector<FeaturePartition> vertical_split(
    const FeaturePartition& full,
    const std::vector<std::vector<std::string>>& groups);

// Pools several partitions column-wise over the given ids (oracle setting).
Matrix pooled_features(std::span<const FeaturePartition* const> partitions,
                       std::span<const SampleId> ids);

// Restriction of a partition to a subset of its ids (keeps column names).
FeaturePartition subset(const FeaturePartition& partition,
                        std::span<const SampleId> ids);

}  // namespace assist

#endif  // ASSIST_CORE_H_
