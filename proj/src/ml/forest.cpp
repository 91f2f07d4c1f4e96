#include <cmath>

#include "cogeffort/error.hpp"
#include "cogeffort/ml.hpp"
#include "cogeffort/parallel.hpp"
#include "cogeffort/rng.hpp"

namespace cogeffort::ml {

// Bootstrap-bagged trees. Tree t draws its bootstrap sample and split
// features from derive_seed(seed, t), so any thread layout builds the same
// forest.
ForestModel fit_forest(const Matrix& x, std::span<const int> y, int n_trees, const TreeOptions& opts,
                       std::uint64_t seed, int jobs) {
  if (n_trees < 1) throw DomainError("random forest needs at least one tree");
  TreeOptions tree_opts = opts;
  if (tree_opts.max_features <= 0) {
    tree_opts.max_features = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
  }
  ForestModel forest;
  forest.trees.resize(static_cast<std::size_t>(n_trees));
  parallel_for(forest.trees.size(), jobs, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(seed, t);
    Rng rng(tree_seed);
    std::vector<std::size_t> rows(x.rows());
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(x.rows()));
    forest.trees[t] = fit_tree(x, y, rows, tree_opts, derive_seed(tree_seed, 1));
  });
  return forest;
}

int predict(const ForestModel& m, std::span<const double> x) {
  std::size_t ones = 0;
  for (const auto& t : m.trees) ones += static_cast<std::size_t>(predict(t, x));
  return 2 * ones >= m.trees.size() ? 1 : 0;
}

}  // namespace cogeffort::ml
