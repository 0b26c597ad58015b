#include "assist/core.h"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "assist/errors.h"

namespace assist {

SampleId::SampleId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sample id must be non-empty");
  }
}

IdList make_ids(std::initializer_list<const char*> names) {
  IdList ids;
  ids.reserve(names.size());
  for (const char* name : names) ids.emplace_back(name);
  return ids;
}

FeaturePartition::FeaturePartition(IdList ids, Matrix features,
                                   std::vector<std::string> feature_names)
    : ids_(std::move(ids)),
      features_(std::move(features)),
      feature_names_(std::move(feature_names)) {
  if (static_cast<Eigen::Index>(ids_.size()) != features_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "id count " + std::to_string(ids_.size()) + " != row count " +
                    std::to_string(features_.rows()));
  }
  if (static_cast<Eigen::Index>(feature_names_.size()) != features_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature name count != column count");
  }
  if (!features_.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite feature value");
  }
  row_index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!row_index_.emplace(ids_[i], static_cast<Eigen::Index>(i)).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id '" + ids_[i].value() + "'");
    }
  }
}

Eigen::Index FeaturePartition::row_of(const SampleId& id) const {
  auto it = row_index_.find(id);
  return it == row_index_.end() ? -1 : it->second;
}

Matrix FeaturePartition::rows_for(std::span<const SampleId> ids) const {
  Matrix out(static_cast<Eigen::Index>(ids.size()), features_.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Eigen::Index row = row_of(ids[i]);
    if (row < 0) {
      throw Error(ErrorCode::kMissingId, "id '" + ids[i].value() + "' not in partition");
    }
    out.row(static_cast<Eigen::Index>(i)) = features_.row(row);
  }
  return out;
}

TaskLabels::TaskLabels(IdList ids, Vector values)
    : ids_(std::move(ids)), values_(std::move(values)) {
  if (static_cast<Eigen::Index>(ids_.size()) != values_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "label ids and values differ in length");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite label");
  }
  row_index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!row_index_.emplace(ids_[i], static_cast<Eigen::Index>(i)).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate label id '" + ids_[i].value() + "'");
    }
  }
}

Vector TaskLabels::values_for(std::span<const SampleId> ids) const {
  Vector out(static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = row_index_.find(ids[i]);
    if (it == row_index_.end()) {
      throw Error(ErrorCode::kMissingId, "no label for id '" + ids[i].value() + "'");
    }
    out[static_cast<Eigen::Index>(i)] = values_[it->second];
  }
  return out;
}

IdList intersect_ids(std::span<const IdList* const> id_lists) {
  if (id_lists.empty()) return {};
  IdList common(id_lists[0]->begin(), id_lists[0]->end());
  std::sort(common.begin(), common.end());
  common.erase(std::unique(common.begin(), common.end()), common.end());
  for (std::size_t k = 1; k < id_lists.size(); ++k) {
    IdList next(id_lists[k]->begin(), id_lists[k]->end());
    std::sort(next.begin(), next.end());
    IdList merged;
    std::set_intersection(common.begin(), common.end(), next.begin(), next.end(),
                          std::back_inserter(merged));
    common = std::move(merged);
  }
  return common;
}

CollationIndex collate(std::span<const FeaturePartition* const> partitions) {
  if (partitions.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "collate needs at least two partitions");
  }
  std::vector<const IdList*> lists;
  lists.reserve(partitions.size());
  for (const FeaturePartition* p : partitions) lists.push_back(&p->ids());

  CollationIndex index;
  index.ids = intersect_ids(lists);
  if (index.ids.empty()) {
    throw Error(ErrorCode::kEmptyIntersection, "partitions share no sample id");
  }
  index.row_maps.resize(partitions.size());
  for (std::size_t k = 0; k < partitions.size(); ++k) {
    auto& map = index.row_maps[k];
    map.reserve(index.ids.size());
    for (const SampleId& id : index.ids) map.push_back(partitions[k]->row_of(id));
  }
  return index;
}

CollationIndex collate(std::initializer_list<const FeaturePartition*> parts) {
  return collate(std::span<const FeaturePartition* const>(parts.begin(), parts.size()));
}

Matrix align(const FeaturePartition& partition, const CollationIndex& index) {
  return partition.rows_for(index.ids);
}

std::vector<FeaturePartition> vertical_split(
    const FeaturePartition& full,
    const std::vector<std::vector<std::string>>& groups) {
  const auto& names = full.feature_names();
  std::unordered_set<std::string> seen;
  std::vector<std::vector<Eigen::Index>> columns(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const std::string& name : groups[g]) {
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) {
        throw Error(ErrorCode::kUnknownColumn, "column '" + name + "'");
      }
      if (!seen.insert(name).second) {
        throw Error(ErrorCode::kOverlappingGroups, "column '" + name + "' in two groups");
      }
      columns[g].push_back(std::distance(names.begin(), it));
    }
  }

  std::vector<FeaturePartition> out;
  out.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Matrix block(full.rows(), static_cast<Eigen::Index>(columns[g].size()));
    for (std::size_t c = 0; c < columns[g].size(); ++c) {
      block.col(static_cast<Eigen::Index>(c)) = full.features().col(columns[g][c]);
    }
    out.emplace_back(full.ids(), std::move(block), groups[g]);
  }
  return out;
}

Matrix pooled_features(std::span<const FeaturePartition* const> partitions,
                       std::span<const SampleId> ids) {
  Eigen::Index total = 0;
  for (const FeaturePartition* p : partitions) total += p->cols();
  Matrix out(static_cast<Eigen::Index>(ids.size()), total);
  Eigen::Index offset = 0;
  for (const FeaturePartition* p : partitions) {
    out.middleCols(offset, p->cols()) = p->rows_for(ids);
    offset += p->cols();
  }
  return out;
}

FeaturePartition subset(const FeaturePartition& partition,
                        std::span<const SampleId> ids) {
  return FeaturePartition(IdList(ids.begin(), ids.end()), partition.rows_for(ids),
                          partition.feature_names());
}

}  // namespace assist
