#include "cogeffort/error.hpp"
#include "cogeffort/ml.hpp"

namespace cogeffort::ml {

Metrics metrics_from_confusion(const std::array<std::array<long long, 2>, 2>& cm) {
  Metrics m;
  m.confusion = cm;
  const double total = static_cast<double>(cm[0][0] + cm[0][1] + cm[1][0] + cm[1][1]);
  if (total == 0.0) return m;
  m.accuracy = static_cast<double>(cm[0][0] + cm[1][1]) / total;

  auto safe_div = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  for (int c = 0; c < 2; ++c) {
    const double tp = static_cast<double>(cm[c][c]);
    const double support = static_cast<double>(cm[c][0] + cm[c][1]);
    const double predicted = static_cast<double>(cm[0][c] + cm[1][c]);
    const double precision = safe_div(tp, predicted);
    const double recall = safe_div(tp, support);
    const double f1 = safe_div(2.0 * precision * recall, precision + recall);
    const double w = support / total;
    m.precision_weighted += w * precision;
    m.recall_weighted += w * recall;
    m.f1_weighted += w * f1;
  }
  return m;
}

Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DomainError("label vectors differ in length: " + std::to_string(y_true.size()) + " vs " +
                      std::to_string(y_pred.size()));
  }
  if (y_true.empty()) throw DomainError("no labels to score");
  std::array<std::array<long long, 2>, 2> cm{};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1)) {
      throw DomainError("labels must be 0 or 1");
    }
    ++cm[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
  }
  return metrics_from_confusion(cm);
}

}  // namespace cogeffort::ml
