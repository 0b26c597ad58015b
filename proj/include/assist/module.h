#ifndef ASSIST_MODULE_H_
#define ASSIST_MODULE_H_

#include <compare>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "assist/core.h"
#include "assist/learners.h"

namespace assist {

// A participant: private feature table, private learner, and the private
// store of models it fitted for other modules' tasks.
class LocalModule {
 public:
  using RefusalPolicy =
      std::function<bool(const std::string& task_id, int round)>;

  LocalModule(std::string id, FeaturePartition partition, LearnerSpec learner);

  const std::string& id() const noexcept { return id_; }
  const FeaturePartition& partition() const noexcept { return partition_; }
  const LearnerSpec& learner() const noexcept { return learner_; }

  // Each (task, round) key is written at most once; a second write throws
  // StorageConflict.
  void store(const std::string& task_id, int round, FittedModel model);

  // Null when nothing is stored under the key. Stored models are never
  // erased, so the pointer stays valid for the module's lifetime.
  const FittedModel* find(const std::string& task_id, int round) const;

  std::vector<int> rounds(const std::string& task_id) const;
  std::size_t model_count() const;

  void set_refusal_policy(RefusalPolicy policy);
  bool refuses(const std::string& task_id, int round) const;

 private:
  struct Key {
    std::string task;
    int round;
    friend auto operator<=>(const Key&, const Key&) = default;
  };

  std::string id_;
  FeaturePartition partition_;
  LearnerSpec learner_;

  mutable std::mutex mu_;
  std::map<Key, FittedModel> models_;
  RefusalPolicy refusal_;
};

}  // namespace assist

#endif  // ASSIST_MODULE_H_
