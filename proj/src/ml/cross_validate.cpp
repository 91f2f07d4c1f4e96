#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cogeffort/csv.hpp"
#include "cogeffort/error.hpp"
#include "cogeffort/ml.hpp"
#include "cogeffort/parallel.hpp"
#include "cogeffort/rng.hpp"

namespace cogeffort::ml {

CvResult cross_validate(const features::FeatureTable& table, const ClassifierSpec& spec, const CvOptions& opts) {
  std::vector<std::string> participants;
  for (const auto& r : table.rows) participants.push_back(r.key.participant_id);
  CvResult result;
  result.plan = group_kfold(participants, opts.n_splits, opts.seed);

  const Matrix x = to_matrix(table);
  const std::vector<int> y = labels_of(table);
  std::vector<int> fold_of(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    fold_of[i] = result.plan.assignments.at(table.rows[i].key.participant_id);
  }

  result.folds.resize(static_cast<std::size_t>(opts.n_splits));
  std::vector<std::vector<Prediction>> fold_predictions(result.folds.size());
  const int outer_jobs = std::min(opts.jobs, opts.n_splits);
  const int inner_jobs = outer_jobs > 1 ? 1 : opts.jobs;

  parallel_for(result.folds.size(), outer_jobs, [&](std::size_t k) {
    const int fold = static_cast<int>(k);
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < fold_of.size(); ++i) (fold_of[i] == fold ? test_idx : train_idx).push_back(i);

    const Matrix x_train_raw = x.select_rows(train_idx);
    const Standardizer scaler = Standardizer::fit(table.names, x_train_raw);
    const Matrix x_train = scaler.apply(table.names, x_train_raw);
    const Matrix x_test = scaler.apply(table.names, x.select_rows(test_idx));
    std::vector<int> y_train, y_test;
    for (auto i : train_idx) y_train.push_back(y[i]);
    for (auto i : test_idx) y_test.push_back(y[i]);

    const ClassifierModel model = train(spec, x_train, y_train, derive_seed(opts.seed, 0x1000 + k), inner_jobs);
    const std::vector<int> y_pred = model.predict(x_test);

    FoldResult& fr = result.folds[k];
    fr.fold = fold;
    fr.test_participants = result.plan.test_participants(fold);
    fr.metrics = compute_metrics(y_test, y_pred);
    fr.standardizer_mean = scaler.mean();
    for (std::size_t j = 0; j < test_idx.size(); ++j) {
      fold_predictions[k].push_back({table.rows[test_idx[j]].key, y_test[j], y_pred[j], fold});
    }
  });

  for (auto& fp : fold_predictions) {
    for (auto& p : fp) result.predictions.push_back(std::move(p));
  }
  std::sort(result.predictions.begin(), result.predictions.end(),
            [](const Prediction& a, const Prediction& b) { return a.key < b.key; });
  std::vector<int> yt, yp;
  for (const auto& p : result.predictions) {
    yt.push_back(p.y_true);
    yp.push_back(p.y_pred);
  }
  result.pooled = compute_metrics(yt, yp);
  return result;
}

CvResult cross_validate(const Dataset& dataset, features::FeatureSet id, const ClassifierSpec& spec,
                        const CvOptions& opts) {
  features::AssembleOptions ao;
  ao.jobs = opts.jobs;
  return cross_validate(features::assemble(id, dataset, ao), spec, opts);
}

std::string format_predictions(const std::vector<Prediction>& preds) {
  std::string out = "participant_id,question_order,y_true,y_pred,fold\n";
  for (const auto& p : preds) {
    out += csv::quote_if_needed(p.key.participant_id) + "," + std::to_string(p.key.question_order) + "," +
           std::to_string(p.y_true) + "," + std::to_string(p.y_pred) + "," + std::to_string(p.fold) + "\n";
  }
  return out;
}

std::vector<Prediction> parse_predictions(std::string_view text, const std::string& source) {
  const csv::Table t = csv::parse(text, source);
  const std::size_t c_pid = csv::column(t, "participant_id", source);
  const std::size_t c_order = csv::column(t, "question_order", source);
  const std::size_t c_true = csv::column(t, "y_true", source);
  const std::size_t c_pred = csv::column(t, "y_pred", source);
  const std::size_t c_fold = csv::column(t, "fold", source);
  std::vector<Prediction> out;
  std::set<TrialKey> seen;
  for (const auto& row : t.rows) {
    const auto order = csv::parse_int(row.fields[c_order]);
    const auto yt = csv::parse_int(row.fields[c_true]);
    const auto yp = csv::parse_int(row.fields[c_pred]);
    const auto fold = csv::parse_int(row.fields[c_fold]);
    if (!order || !yt || !yp || !fold || (*yt != 0 && *yt != 1) || (*yp != 0 && *yp != 1)) {
      throw DataError(source + ":" + std::to_string(row.line) + ": malformed prediction row");
    }
    Prediction p{{row.fields[c_pid], static_cast<int>(*order)}, static_cast<int>(*yt), static_cast<int>(*yp),
                 static_cast<int>(*fold)};
    if (!seen.insert(p.key).second) {
      throw DataError(source + ":" + std::to_string(row.line) + ": duplicate prediction for " + to_string(p.key));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_predictions(ss.str(), path.string());
}

std::string format_metrics(const CvResult& r) {
  std::string out = "fold,accuracy,precision_weighted,recall_weighted,f1_weighted,tn,fp,fn,tp\n";
  auto line = [&](const std::string& fold, const Metrics& m) {
    out += fold + "," + csv::format_double(m.accuracy) + "," + csv::format_double(m.precision_weighted) + "," +
           csv::format_double(m.recall_weighted) + "," + csv::format_double(m.f1_weighted) + "," +
           std::to_string(m.confusion[0][0]) + "," + std::to_string(m.confusion[0][1]) + "," +
           std::to_string(m.confusion[1][0]) + "," + std::to_string(m.confusion[1][1]) + "\n";
  };
  for (const auto& f : r.folds) line(std::to_string(f.fold), f.metrics);
  line("pooled", r.pooled);
  return out;
}

}  // namespace cogeffort::ml
