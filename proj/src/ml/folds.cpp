#include <algorithm>

#include "cogeffort/error.hpp"
#include "cogeffort/ml.hpp"
#include "cogeffort/rng.hpp"

namespace cogeffort::ml {

std::vector<std::string> FoldPlan::test_participants(int fold) const {
  std::vector<std::string> out;
  for (const auto& [p, f] : assignments) {
    if (f == fold) out.push_back(p);
  }
  return out;
}

std::vector<std::string> FoldPlan::train_participants(int fold) const {
  std::vector<std::string> out;
  for (const auto& [p, f] : assignments) {
    if (f != fold) out.push_back(p);
  }
  return out;
}

FoldPlan group_kfold(std::vector<std::string> participants, int n_splits, std::uint64_t seed) {
  std::sort(participants.begin(), participants.end());
  participants.erase(std::unique(participants.begin(), participants.end()), participants.end());
  if (n_splits < 2) throw DomainError("need at least 2 folds");
  if (static_cast<std::size_t>(n_splits) > participants.size()) {
    throw DomainError("cannot split " + std::to_string(participants.size()) + " participants into " +
                      std::to_string(n_splits) + " folds");
  }
  Rng rng(derive_seed(seed, 0x466f6c64));
  rng.shuffle(participants);
  FoldPlan plan;
  plan.n_splits = n_splits;
  for (std::size_t i = 0; i < participants.size(); ++i) {
    plan.assignments[participants[i]] = static_cast<int>(i % static_cast<std::size_t>(n_splits));
  }
  return plan;
}

}  // namespace cogeffort::ml
