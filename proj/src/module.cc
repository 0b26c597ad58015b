#include "assist/module.h"

#include <limits>

#include "assist/errors.h"

namespace assist {

LocalModule::LocalModule(std::string id, FeaturePartition partition, LearnerSpec learner)
    : id_(std::move(id)), partition_(std::move(partition)), learner_(std::move(learner)) {
  if (id_.empty()) throw Error(ErrorCode::kInvalidArgument, "module id must be non-empty");
}

void LocalModule::store(const std::string& task_id, int round, FittedModel model) {
  std::lock_guard lock(mu_);
  model.meta.round = round;
  model.meta.task_id = task_id;
  if (!models_.emplace(Key{task_id, round}, std::move(model)).second) {
    throw Error(ErrorCode::kStorageConflict, "module '" + id_ + "' already holds a model for task '" +
                                                 task_id + "' round " + std::to_string(round));
  }
}

const FittedModel* LocalModule::find(const std::string& task_id, int round) const {
  std::lock_guard lock(mu_);
  auto it = models_.find(Key{task_id, round});
  return it == models_.end() ? nullptr : &it->second;
}

std::vector<int> LocalModule::rounds(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  std::vector<int> out;
  for (auto it = models_.lower_bound(Key{task_id, std::numeric_limits<int>::min()});
       it != models_.end() && it->first.task == task_id; ++it) {
    out.push_back(it->first.round);
  }
  return out;
}

std::size_t LocalModule::model_count() const {
  std::lock_guard lock(mu_);
  return models_.size();
}

void LocalModule::set_refusal_policy(RefusalPolicy policy) {
  std::lock_guard lock(mu_);
  refusal_ = std::move(policy);
}

bool LocalModule::refuses(const std::string& task_id, int round) const {
  RefusalPolicy policy;
  {
    std::lock_guard lock(mu_);
    policy = refusal_;
  }
  return policy && policy(task_id, round);
}

}  // namespace assist
