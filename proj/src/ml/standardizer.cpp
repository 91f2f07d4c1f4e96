#include <cmath>

#include "cogeffort/error.hpp"
#include "cogeffort/ml.hpp"

namespace cogeffort::ml {

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix to_matrix(const features::FeatureTable& t) {
  Matrix m(t.rows.size(), t.cols());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].values.size() != t.cols()) throw DataError("feature table is not rectangular");
    std::copy(t.rows[r].values.begin(), t.rows[r].values.end(), m.row(r).begin());
  }
  return m;
}

std::vector<int> labels_of(const features::FeatureTable& t) {
  std::vector<int> y;
  y.reserve(t.rows.size());
  for (const auto& r : t.rows) y.push_back(r.label);
  return y;
}

Standardizer Standardizer::fit(std::vector<std::string> names, const Matrix& train) {
  if (names.size() != train.cols()) throw DataError("feature names do not match matrix width");
  if (train.rows() == 0) throw DataError("cannot fit a standardizer on zero rows");
  Standardizer s;
  s.names_ = std::move(names);
  s.mean_.assign(train.cols(), 0.0);
  s.std_.assign(train.cols(), 0.0);
  const double n = static_cast<double>(train.rows());
  for (std::size_t r = 0; r < train.rows(); ++r) {
    for (std::size_t c = 0; c < train.cols(); ++c) s.mean_[c] += train.at(r, c);
  }
  for (auto& m : s.mean_) m /= n;
  for (std::size_t r = 0; r < train.rows(); ++r) {
    for (std::size_t c = 0; c < train.cols(); ++c) {
      const double d = train.at(r, c) - s.mean_[c];
      s.std_[c] += d * d;
    }
  }
  for (auto& v : s.std_) v = std::sqrt(v / n);
  return s;
}

Matrix Standardizer::apply(const std::vector<std::string>& names, const Matrix& x) const {
  if (names != names_) throw DataError("standardizer applied to a different feature list");
  if (x.cols() != mean_.size()) throw DataError("matrix width does not match the standardizer");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      // Near-constant columns (relative spread at rounding level) count as constant.
      const bool constant = !(std_[c] > 1e-12 * std::max(1.0, std::abs(mean_[c])));
      out.at(r, c) = constant ? 0.0 : (x.at(r, c) - mean_[c]) / std_[c];
    }
  }
  return out;
}

}  // namespace cogeffort::ml
