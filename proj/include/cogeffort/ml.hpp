#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cogeffort/core.hpp"
#include "cogeffort/features.hpp"

namespace cogeffort::ml {

/// Dense row-major matrix of feature rows.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  /// Rows at the given indices, in order.
  Matrix select_rows(std::span<const std::size_t> idx) const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix to_matrix(const features::FeatureTable& t);
std::vector<int> labels_of(const features::FeatureTable& t);

// ---------------------------------------------------------------------------
// Standardization

/// Per-feature z-scoring learned from training rows only. Uses the
/// population standard deviation; features with zero training variance map
/// to 0.
class Standardizer {
public:
  static Standardizer fit(std::vector<std::string> names, const Matrix& train);

  /// Throws DataError if `names` differ from the fitted feature names.
  Matrix apply(const std::vector<std::string>& names, const Matrix& x) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return std_; }
  const std::vector<std::string>& names() const { return names_; }

private:
  std::vector<std::string> names_;
  std::vector<double> mean_;
  std::vector<double> std_;
};

// ---------------------------------------------------------------------------
// Participant-grouped folds

struct FoldPlan {
  int n_splits = 5;
  std::map<std::string, int> assignments;  // participant -> fold index

  std::vector<std::string> test_participants(int fold) const;
  std::vector<std::string> train_participants(int fold) const;
};

/// Shuffles participants under `seed` and deals them round-robin into
/// n_splits folds, so sizes differ by at most one. DomainError if n_splits
/// exceeds the participant count or is below 2.
FoldPlan group_kfold(std::vector<std::string> participants, int n_splits, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Classifiers

enum class Family { LogisticRegression, LDA, KNN, DecisionTree, RandomForest };

std::string_view to_string(Family f);
/// lr | lda | knn | dt | rf
Family parse_family(std::string_view name);

struct ClassifierSpec {
  Family family = Family::RandomForest;
  std::map<std::string, double> hyperparameters;

  /// Documented defaults for a family:
  ///   lr:  lambda=1 (ridge), tol=1e-6 (gradient norm), max_iter=1000
  ///   lda: shrinkage=1e-6
  ///   knn: k=5
  ///   dt:  max_depth=8, min_leaf=2
  ///   rf:  n_trees=100, max_features=0 (ceil(sqrt(d))), max_depth=16, min_leaf=1
  static ClassifierSpec defaults(Family f);

  double param(const std::string& name) const;
};

/// Merges key=value overrides; DomainError for keys the family does not use.
ClassifierSpec with_overrides(ClassifierSpec spec, const std::map<std::string, double>& overrides);

struct LogisticModel {
  std::vector<double> weights;
  double intercept = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

struct LdaModel {
  std::vector<double> weights;
  double bias = 0.0;
};

struct KnnModel {
  Matrix train;
  std::vector<int> labels;
  int k = 5;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  double p1 = 0.0;  // fraction of class 1 among the node's training rows
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int depth = 0;
};

struct ForestModel {
  std::vector<TreeModel> trees;
};

/// Trained classifier. Immutable; prediction is thread-safe.
class ClassifierModel {
public:
  using Impl = std::variant<LogisticModel, LdaModel, KnnModel, TreeModel, ForestModel>;

  ClassifierModel(ClassifierSpec spec, Impl impl) : spec_(std::move(spec)), impl_(std::move(impl)) {}

  int predict_one(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& x) const;

  const ClassifierSpec& spec() const { return spec_; }
  const Impl& impl() const { return impl_; }

private:
  ClassifierSpec spec_;
  Impl impl_;
};

/// Fits a model. Labels must be 0/1 with both classes present and features
/// finite (DataError otherwise). `seed` drives bootstrap and feature
/// sampling; forest trees use sub-seeds derived from it, so the result does
/// not depend on `jobs`.
ClassifierModel train(const ClassifierSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed = 0,
                      int jobs = 1);

// Family-level entry points (used by train; exposed for tests).
LogisticModel fit_logistic(const Matrix& x, std::span<const int> y, double lambda, double tol, int max_iter);
LdaModel fit_lda(const Matrix& x, std::span<const int> y, double shrinkage);
KnnModel fit_knn(const Matrix& x, std::span<const int> y, int k);

struct TreeOptions {
  int max_depth = 8;
  int min_leaf = 2;
  int max_features = 0;  // 0: all features
};
TreeModel fit_tree(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                   const TreeOptions& opts, std::uint64_t seed);
ForestModel fit_forest(const Matrix& x, std::span<const int> y, int n_trees, const TreeOptions& opts,
                       std::uint64_t seed, int jobs);

double predict_proba(const LogisticModel& m, std::span<const double> x);
int predict(const LogisticModel& m, std::span<const double> x);
int predict(const LdaModel& m, std::span<const double> x);
/// Euclidean majority vote among the k nearest rows (distance ties broken by
/// row index); a tied vote goes to the nearest neighbour's class.
int predict(const KnnModel& m, std::span<const double> x);
/// Leaf class-1 fraction >= 0.5 predicts 1.
int predict(const TreeModel& m, std::span<const double> x);
/// Majority vote of the trees; a tie predicts 1.
int predict(const ForestModel& m, std::span<const double> x);

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
  double accuracy = 0.0;
  double precision_weighted = 0.0;
  double recall_weighted = 0.0;
  double f1_weighted = 0.0;
  std::array<std::array<long long, 2>, 2> confusion{};  // [true][predicted]
};

/// Accuracy plus support-weighted precision, recall and F1 over the two
/// classes; 0/0 is taken as 0. DomainError on length mismatch or empty input.
Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred);
Metrics metrics_from_confusion(const std::array<std::array<long long, 2>, 2>& confusion);

// ---------------------------------------------------------------------------
// Cross-validation

struct Prediction {
  TrialKey key;
  int y_true = 0;
  int y_pred = 0;
  int fold = 0;

  bool operator==(const Prediction&) const = default;
};

struct FoldResult {
  int fold = 0;
  std::vector<std::string> test_participants;
  Metrics metrics;
  std::vector<double> standardizer_mean;  // fitted on this fold's training rows
};

struct CvResult {
  FoldPlan plan;
  std::vector<FoldResult> folds;
  Metrics pooled;
  std::vector<Prediction> predictions;  // sorted by key, one per row
};

struct CvOptions {
  int n_splits = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// For each fold: fit the standardizer and model on the training
/// participants' rows, predict the held-out participants.
CvResult cross_validate(const features::FeatureTable& table, const ClassifierSpec& spec, const CvOptions& opts);

CvResult cross_validate(const Dataset& dataset, features::FeatureSet id, const ClassifierSpec& spec,
                        const CvOptions& opts);

/// participant_id,question_order,y_true,y_pred,fold
std::string format_predictions(const std::vector<Prediction>& p);
std::vector<Prediction> parse_predictions(std::string_view text, const std::string& source);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

/// fold,accuracy,precision_weighted,recall_weighted,f1_weighted,tn,fp,fn,tp
/// with one row per fold and a final "pooled" row.
std::string format_metrics(const CvResult& r);

}  // namespace cogeffort::ml
