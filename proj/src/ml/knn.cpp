#include <algorithm>

#include "cogeffort/error.hpp"
#include "cogeffort/kernels.hpp"
#include "cogeffort/ml.hpp"

namespace cogeffort::ml {

KnnModel fit_knn(const Matrix& x, std::span<const int> y, int k) {
  if (k < 1) throw DomainError("k must be >= 1");
  return KnnModel{x, std::vector<int>(y.begin(), y.end()), k};
}

int predict(const KnnModel& m, std::span<const double> x) {
  const std::size_t n = m.train.rows();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = {kernels::squared_distance(m.train.row(i), x), i};
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(m.k), n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  int votes[2] = {0, 0};
  for (std::size_t i = 0; i < k; ++i) ++votes[m.labels[dist[i].second]];
  if (votes[0] == votes[1]) return m.labels[dist[0].second];
  return votes[1] > votes[0] ? 1 : 0;
}

}  // namespace cogeffort::ml
