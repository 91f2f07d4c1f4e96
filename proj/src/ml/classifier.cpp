#include <cctype>
#include <cmath>
#include <numeric>

#include "cogeffort/error.hpp"
#include "cogeffort/ml.hpp"

namespace cogeffort::ml {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::LogisticRegression: return "lr";
    case Family::LDA: return "lda";
    case Family::KNN: return "knn";
    case Family::DecisionTree: return "dt";
    case Family::RandomForest: return "rf";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "lr" || s == "logistic") return Family::LogisticRegression;
  if (s == "lda") return Family::LDA;
  if (s == "knn") return Family::KNN;
  if (s == "dt" || s == "tree") return Family::DecisionTree;
  if (s == "rf" || s == "forest") return Family::RandomForest;
  throw DomainError("unknown model '" + std::string(name) + "' (expected lr|lda|knn|dt|rf)");
}

ClassifierSpec ClassifierSpec::defaults(Family f) {
  ClassifierSpec s;
  s.family = f;
  switch (f) {
    case Family::LogisticRegression:
      s.hyperparameters = {{"lambda", 1.0}, {"tol", 1e-6}, {"max_iter", 1000}};
      break;
    case Family::LDA: s.hyperparameters = {{"shrinkage", 1e-6}}; break;
    case Family::KNN: s.hyperparameters = {{"k", 5}}; break;
    case Family::DecisionTree: s.hyperparameters = {{"max_depth", 8}, {"min_leaf", 2}}; break;
    case Family::RandomForest:
      s.hyperparameters = {{"n_trees", 100}, {"max_features", 0}, {"max_depth", 16}, {"min_leaf", 1}};
      break;
  }
  return s;
}

double ClassifierSpec::param(const std::string& name) const {
  auto it = hyperparameters.find(name);
  if (it == hyperparameters.end()) {
    throw DomainError("model " + std::string(to_string(family)) + " has no hyperparameter '" + name + "'");
  }
  return it->second;
}

ClassifierSpec with_overrides(ClassifierSpec spec, const std::map<std::string, double>& overrides) {
  for (const auto& [k, v] : overrides) {
    auto it = spec.hyperparameters.find(k);
    if (it == spec.hyperparameters.end()) {
      throw DomainError("model " + std::string(to_string(spec.family)) + " has no hyperparameter '" + k + "'");
    }
    it->second = v;
  }
  if (spec.family == Family::KNN && spec.param("k") < 1) throw DomainError("knn needs k >= 1");
  if (spec.family == Family::RandomForest && spec.param("n_trees") < 1) {
    throw DomainError("random forest needs n_trees >= 1");
  }
  return spec;
}

int ClassifierModel::predict_one(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return ml::predict(m, x); }, impl_);
}

std::vector<int> ClassifierModel::predict(const Matrix& x) const {
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_one(x.row(r));
  return out;
}

ClassifierModel train(const ClassifierSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed,
                      int jobs) {
  if (x.rows() != y.size()) throw DataError("feature rows and labels differ in count");
  if (x.rows() == 0) throw DataError("no training rows");
  std::size_t ones = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
    ones += static_cast<std::size_t>(v);
  }
  if (ones == 0 || ones == y.size()) throw DataError("training labels contain a single class");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value in training data");
  }

  auto as_int = [&](const char* name) { return static_cast<int>(std::lround(spec.param(name))); };
  switch (spec.family) {
    case Family::LogisticRegression:
      return {spec, fit_logistic(x, y, spec.param("lambda"), spec.param("tol"), as_int("max_iter"))};
    case Family::LDA: return {spec, fit_lda(x, y, spec.param("shrinkage"))};
    case Family::KNN: return {spec, fit_knn(x, y, as_int("k"))};
    case Family::DecisionTree: {
      std::vector<std::size_t> rows(x.rows());
      std::iota(rows.begin(), rows.end(), 0);
      return {spec, fit_tree(x, y, rows, {as_int("max_depth"), as_int("min_leaf"), 0}, seed)};
    }
    case Family::RandomForest:
      return {spec, fit_forest(x, y, as_int("n_trees"),
                               {as_int("max_depth"), as_int("min_leaf"), as_int("max_features")}, seed, jobs)};
  }
  throw DomainError("unsupported model family");
}

}  // namespace cogeffort::ml
