#include <algorithm>
#include <numeric>

#include "cogeffort/error.hpp"
#include "cogeffort/ml.hpp"
#include "cogeffort/rng.hpp"

namespace cogeffort::ml {

namespace {

double gini(double n1, double n) {
  if (n <= 0.0) return 0.0;
  const double p = n1 / n;
  return 2.0 * p * (1.0 - p);
}

struct Split {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
};

class TreeBuilder {
public:
  TreeBuilder(const Matrix& x, std::span<const int> y, const TreeOptions& opts, std::uint64_t seed)
      : x_(x), y_(y), opts_(opts), rng_(seed), features_(x.cols()) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  TreeModel build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(tree_);
  }

private:
  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.depth = std::max(tree_.depth, depth);

    double n1 = 0.0;
    for (auto r : rows) n1 += y_[r];
    const double n = static_cast<double>(rows.size());
    tree_.nodes[static_cast<std::size_t>(id)].p1 = n > 0.0 ? n1 / n : 0.0;

    const bool pure = n1 == 0.0 || n1 == n;
    if (pure || depth >= opts_.max_depth || rows.size() < 2 * static_cast<std::size_t>(opts_.min_leaf)) {
      return id;
    }
    const Split best = find_split(rows);
    if (!best.found) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (x_.at(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Best Gini split over a feature sample. A split is taken even when it
  // does not lower impurity (XOR-style targets need that); ties keep the
  // first candidate in sampled-feature order, then lowest threshold.
  Split find_split(const std::vector<std::size_t>& rows) {
    std::size_t n_try = features_.size();
    if (opts_.max_features > 0 && static_cast<std::size_t>(opts_.max_features) < n_try) {
      n_try = static_cast<std::size_t>(opts_.max_features);
      // Partial Fisher-Yates: the first n_try entries become the sample.
      for (std::size_t i = 0; i < n_try; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng_.below(features_.size() - i));
        std::swap(features_[i], features_[j]);
      }
    }
    const double n = static_cast<double>(rows.size());
    const auto min_leaf = static_cast<std::size_t>(std::max(1, opts_.min_leaf));
    double total1 = 0.0;
    for (auto r : rows) total1 += y_[r];

    Split best;
    std::vector<std::pair<double, int>> col(rows.size());
    for (std::size_t fi = 0; fi < n_try; ++fi) {
      const std::size_t f = features_[fi];
      for (std::size_t i = 0; i < rows.size(); ++i) col[i] = {x_.at(rows[i], f), y_[rows[i]]};
      std::sort(col.begin(), col.end());
      double left1 = 0.0;
      for (std::size_t i = 0; i + 1 < col.size(); ++i) {
        left1 += col[i].second;
        if (col[i].first == col[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = col.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double dl = static_cast<double>(nl);
        const double dr = static_cast<double>(nr);
        const double imp = (dl * gini(left1, dl) + dr * gini(total1 - left1, dr)) / n;
        if (!best.found || imp < best.impurity) {
          double thr = col[i].first + 0.5 * (col[i + 1].first - col[i].first);
          if (!(thr < col[i + 1].first)) thr = col[i].first;
          best = {true, static_cast<int>(f), thr, imp};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const int> y_;
  TreeOptions opts_;
  Rng rng_;
  std::vector<std::size_t> features_;
  TreeModel tree_;
};

}  // namespace

TreeModel fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                   const TreeOptions& opts, std::uint64_t seed) {
  if (rows.empty()) throw DataError("decision tree needs at least one row");
  TreeBuilder b(x, y, opts, seed);
  return b.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

int predict(const TreeModel& m, std::span<const double> x) {
  std::size_t i = 0;
  while (m.nodes[i].feature >= 0) {
    const auto& node = m.nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                             : node.right);
  }
  return m.nodes[i].p1 >= 0.5 ? 1 : 0;
}

}  // namespace cogeffort::ml
