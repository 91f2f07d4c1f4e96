#include "cogeffort/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cogeffort/core.hpp"
#include "cogeffort/csv.hpp"
#include "cogeffort/effort.hpp"
#include "cogeffort/error.hpp"
#include "cogeffort/features.hpp"
#include "cogeffort/ingest.hpp"
#include "cogeffort/kernels.hpp"
#include "cogeffort/ml.hpp"
#include "cogeffort/parallel.hpp"
#include "cogeffort/preprocess.hpp"
#include "cogeffort/synth.hpp"

namespace cogeffort::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

class UsageError : public Error {
public:
  using Error::Error;
};

fs::path output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return env && *env ? fs::path(env) : fs::path("cogeffort_out");
}

fs::path resolve_out(const std::string& given, const fs::path& fallback) {
  return given.empty() ? output_root() / fallback : fs::path(given);
}

void write_json(const fs::path& path, const json& j) { csv::write_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    const auto value = eq == std::string::npos ? std::nullopt : csv::parse_double(item.substr(eq + 1));
    if (!value || eq == 0) throw UsageError("--param expects name=value, got '" + item + "'");
    out[item.substr(0, eq)] = *value;
  }
  return out;
}

json base_config(const std::string& command, int jobs) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["jobs"] = jobs;
  j["simd"] = kernels::backend_name(kernels::active_backend());
  return j;
}

std::vector<std::string> feature_set_names() { return {"basic", "st", "fc", "st_fc", "temporal"}; }
std::vector<std::string> model_names() { return {"lr", "lda", "knn", "dt", "rf"}; }

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out;
  std::string preset = "default";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> emit;
  std::optional<int> participants;
  std::optional<double> effect_size, noise_sd, label_rate, region_contrast, baseline_amplitude;
  std::optional<double> cardiac_amp, respiration_amp, drift_slope_range;
  int jobs = 1;
};

json synth_spec_json(const synth::SynthSpec& s) {
  json j;
  j["n_participants"] = s.n_participants;
  j["questions"] = s.questions;
  j["baseline_amplitude"] = s.baseline_amplitude;
  j["effect_size"] = s.effect_size;
  j["noise_sd"] = s.noise_sd;
  j["drift_slope_range"] = s.drift_slope_range;
  j["cardiac_hz"] = s.cardiac_hz;
  j["cardiac_amp"] = s.cardiac_amp;
  j["respiration_hz"] = s.respiration_hz;
  j["respiration_amp"] = s.respiration_amp;
  j["label_rate"] = s.label_rate;
  j["region_contrast"] = s.region_contrast;
  j["seed"] = s.seed;
  j["emit"] = synth::to_string(s.emit);
  j["intensity_730"] = s.intensity_730;
  j["intensity_850"] = s.intensity_850;
  return j;
}

void apply_synth_json(synth::SynthSpec& s, const json& j, const std::string& source) {
  if (!j.is_object()) throw DataError(source + ": expected a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_participants") s.n_participants = v.get<int>();
      else if (key == "questions") s.questions = v.get<int>();
      else if (key == "baseline_amplitude") s.baseline_amplitude = v.get<double>();
      else if (key == "effect_size") s.effect_size = v.get<double>();
      else if (key == "noise_sd") s.noise_sd = v.get<double>();
      else if (key == "drift_slope_range") s.drift_slope_range = v.get<double>();
      else if (key == "cardiac_hz") s.cardiac_hz = v.get<double>();
      else if (key == "cardiac_amp") s.cardiac_amp = v.get<double>();
      else if (key == "respiration_hz") s.respiration_hz = v.get<double>();
      else if (key == "respiration_amp") s.respiration_amp = v.get<double>();
      else if (key == "label_rate") s.label_rate = v.get<double>();
      else if (key == "region_contrast") s.region_contrast = v.get<double>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "emit") s.emit = synth::parse_emit(v.get<std::string>());
      else if (key == "intensity_730") s.intensity_730 = v.get<double>();
      else if (key == "intensity_850") s.intensity_850 = v.get<double>();
      else throw DataError(source + ": unknown synth key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  }
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  synth::SynthSpec spec = synth::SynthSpec::preset(a.preset);
  if (!a.config.empty()) apply_synth_json(spec, read_json(a.config), a.config);
  if (a.seed) spec.seed = *a.seed;
  if (a.emit) spec.emit = synth::parse_emit(*a.emit);
  if (a.participants) spec.n_participants = *a.participants;
  if (a.effect_size) spec.effect_size = *a.effect_size;
  if (a.noise_sd) spec.noise_sd = *a.noise_sd;
  if (a.label_rate) spec.label_rate = *a.label_rate;
  if (a.region_contrast) spec.region_contrast = *a.region_contrast;
  if (a.baseline_amplitude) spec.baseline_amplitude = *a.baseline_amplitude;
  if (a.cardiac_amp) spec.cardiac_amp = *a.cardiac_amp;
  if (a.respiration_amp) spec.respiration_amp = *a.respiration_amp;
  if (a.drift_slope_range) spec.drift_slope_range = *a.drift_slope_range;
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  const fs::path dir = resolve_out(a.out, "synth");
  const synth::SynthOutput result = synth::generate(spec, a.jobs);
  synth::write(dir, result, spec.emit);

  json truth = json::array();
  for (const auto& t : result.truth.trials) {
    truth.push_back({{"participant_id", t.key.participant_id},
                     {"question_order", t.key.question_order},
                     {"label", t.label},
                     {"amplitude", t.amplitude},
                     {"channel_amplitude", t.channel_amplitude}});
  }
  write_json(dir / "ground_truth.json", truth);

  json cfg = base_config("synth", a.jobs);
  cfg["preset"] = a.preset;
  cfg["spec"] = synth_spec_json(spec);
  write_json(dir / "run_config.json", cfg);

  out << "wrote " << result.dataset.size() << " trials (" << result.dataset.count_label(1) << " correct) to "
      << dir.string() << '\n';
  return kOk;
}

// ----------------------------------------------------------- preprocess

struct PreprocessArgs {
  std::string in, out, config;
  std::optional<int> filter_order;
  std::optional<double> cutoff_hz, variance_floor, saturation_ceiling;
  std::optional<std::size_t> baseline_samples;
  int jobs = 1;
};

json params_json(const preprocess::Params& p) {
  json j;
  j["filter"] = {{"order", p.filter_order}, {"cutoff_hz", p.cutoff_hz}, {"sampling_rate_hz", p.sampling_rate_hz}};
  j["mbll"] = {{"distance_cm", p.mbll.source_detector_distance_cm},
               {"dpf", p.mbll.differential_pathlength_factor},
               {"extinction",
                {{"730", {{"hbo", p.mbll.extinction[0][0]}, {"hbr", p.mbll.extinction[0][1]}}},
                 {"850", {{"hbo", p.mbll.extinction[1][0]}, {"hbr", p.mbll.extinction[1][1]}}}}}};
  j["rejection"] = {{"variance_floor", p.variance_floor}, {"saturation_ceiling", p.saturation_ceiling}};
  j["baseline_samples"] = p.baseline_samples;
  j["window"] = p.window;
  return j;
}

int cmd_preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err) {
  preprocess::Params params;
  if (!a.config.empty()) params = preprocess::load_params(a.config);
  if (a.filter_order) params.filter_order = *a.filter_order;
  if (a.cutoff_hz) params.cutoff_hz = *a.cutoff_hz;
  if (a.variance_floor) params.variance_floor = *a.variance_floor;
  if (a.saturation_ceiling) params.saturation_ceiling = *a.saturation_ceiling;
  if (a.baseline_samples) params.baseline_samples = *a.baseline_samples;
  try {
    preprocess::design_lowpass_fir(params.filter_order, params.cutoff_hz, params.sampling_rate_hz);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  ingest::LoadOptions lo;
  lo.jobs = a.jobs;
  const auto tables = ingest::load_raw_tables(a.in, lo);
  std::vector<TrialRecord> records(tables.size());
  std::vector<std::vector<std::string>> warnings(tables.size());
  std::vector<int> intensity(tables.size(), 0);
  parallel_for(tables.size(), a.jobs, [&](std::size_t i) {
    const ingest::RawTrialTable t = ingest::impute_missing(tables[i]);
    if (ingest::signal_columns(t).kind == ingest::SignalKind::Intensity) {
      intensity[i] = 1;
      if (t.row_count() < params.window) {
        warnings[i].push_back(to_string(t.meta.key()) + ": short trial padded by repeating the last row");
      }
      records[i] = preprocess::process_intensity_table(t, params);
    } else {
      records[i] = preprocess::process_hbo_trial(ingest::window_trial(t, params.window, &warnings[i]), params);
    }
  });
  std::size_t masked = 0;
  for (const auto& r : records) masked += static_cast<std::size_t>(std::count(r.channel_mask.begin(), r.channel_mask.end(), false));
  for (const auto& w : warnings) print_warnings(err, w);

  Dataset ds(std::move(records));
  const auto report = validate_dataset(ds);
  if (!report.empty()) throw DataError("processed dataset is invalid:\n" + format_report(report));

  const fs::path dir = resolve_out(a.out, "preprocessed");
  ingest::write_dataset(dir, ds);
  json cfg = base_config("preprocess", a.jobs);
  cfg["input"] = a.in;
  cfg["params"] = params_json(params);
  write_json(dir / "run_config.json", cfg);

  const auto n_int = std::count(intensity.begin(), intensity.end(), 1);
  out << "processed " << ds.size() << " trials (" << n_int << " from intensity, " << ds.size() - n_int
      << " delta-HbO), " << masked << " channel(s) rejected, written to " << dir.string() << '\n';
  return kOk;
}

// ------------------------------------------------------------- features

struct FeaturesArgs {
  std::string in, out;
  std::string feature_set = "st_fc";
  bool no_cross_session = false;
  int jobs = 1;
};

int cmd_features(const FeaturesArgs& a, std::ostream& out, std::ostream& err) {
  const auto id = features::parse_feature_set(a.feature_set);
  ingest::LoadOptions lo;
  lo.jobs = a.jobs;
  auto loaded = ingest::load_dataset(a.in, lo);
  print_warnings(err, loaded.warnings);

  features::AssembleOptions ao;
  ao.jobs = a.jobs;
  ao.delta.cross_session = !a.no_cross_session;
  std::vector<std::string> warnings;
  const auto table = features::assemble(id, loaded.dataset, ao, &warnings);
  print_warnings(err, warnings);

  const fs::path path =
      resolve_out(a.out, fs::path("features") / ("features_" + std::string(features::to_string(id)) + ".csv"));
  features::write_table(path, table);
  json cfg = base_config("features", a.jobs);
  cfg["input"] = a.in;
  cfg["feature_set"] = features::to_string(id);
  cfg["cross_session"] = !a.no_cross_session;
  cfg["rows"] = table.rows.size();
  cfg["columns"] = table.cols();
  fs::path cfg_path = path;
  cfg_path.replace_extension(".run_config.json");
  write_json(cfg_path, cfg);

  out << "wrote " << table.rows.size() << " x " << table.cols() << " " << features::to_string(id)
      << " features to " << path.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string in, features_file, out, config;
  std::optional<std::string> feature_set, model;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::vector<std::string> params;
  bool no_cross_session = false;
  int jobs = 1;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  std::string fs_name = "st_fc", model_name = "rf";
  std::uint64_t seed = 0;
  int folds = 5;
  std::map<std::string, double> overrides;
  if (!a.config.empty()) {
    const json j = read_json(a.config);
    try {
      for (const auto& [key, v] : j.items()) {
        if (key == "feature_set") fs_name = v.get<std::string>();
        else if (key == "model") model_name = v.get<std::string>();
        else if (key == "seed") seed = v.get<std::uint64_t>();
        else if (key == "folds") folds = v.get<int>();
        else if (key == "params") overrides = v.get<std::map<std::string, double>>();
        else throw DataError(a.config + ": unknown train key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw DataError(a.config + ": " + e.what());
    }
  }
  if (a.feature_set) fs_name = *a.feature_set;
  if (a.model) model_name = *a.model;
  if (a.seed) seed = *a.seed;
  if (a.folds) folds = *a.folds;
  for (const auto& [k, v] : parse_params(a.params)) overrides[k] = v;

  features::FeatureSet id;
  ml::ClassifierSpec spec;
  try {
    id = features::parse_feature_set(fs_name);
    spec = ml::with_overrides(ml::ClassifierSpec::defaults(ml::parse_family(model_name)), overrides);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (folds < 2) throw UsageError("--folds must be at least 2");
  if (a.in.empty() == a.features_file.empty()) throw UsageError("train needs exactly one of --in or --features");

  features::FeatureTable table;
  if (!a.features_file.empty()) {
    table = features::read_table(a.features_file, id);
  } else {
    ingest::LoadOptions lo;
    lo.jobs = a.jobs;
    auto loaded = ingest::load_dataset(a.in, lo);
    print_warnings(err, loaded.warnings);
    features::AssembleOptions ao;
    ao.jobs = a.jobs;
    ao.delta.cross_session = !a.no_cross_session;
    std::vector<std::string> warnings;
    table = features::assemble(id, loaded.dataset, ao, &warnings);
    print_warnings(err, warnings);
  }

  ml::CvOptions cv;
  cv.n_splits = folds;
  cv.seed = seed;
  cv.jobs = a.jobs;
  const ml::CvResult result = ml::cross_validate(table, spec, cv);

  const fs::path dir = resolve_out(
      a.out, fs::path("train") / (std::string(features::to_string(id)) + "_" + std::string(ml::to_string(spec.family))));
  csv::write_file(dir / "metrics.csv", ml::format_metrics(result));
  csv::write_file(dir / "predictions.csv", ml::format_predictions(result.predictions));

  json plan = json::array();
  for (int k = 0; k < result.plan.n_splits; ++k) {
    plan.push_back({{"fold", k}, {"test_participants", result.plan.test_participants(k)}});
  }
  json manifest;
  manifest["kind"] = "train";
  manifest["feature_set"] = features::to_string(id);
  manifest["model"] = ml::to_string(spec.family);
  manifest["hyperparameters"] = spec.hyperparameters;
  manifest["seed"] = seed;
  manifest["folds"] = folds;
  manifest["rows"] = table.rows.size();
  manifest["columns"] = table.cols();
  manifest["fold_plan"] = plan;
  manifest["pooled"] = {{"accuracy", result.pooled.accuracy},
                        {"precision_weighted", result.pooled.precision_weighted},
                        {"recall_weighted", result.pooled.recall_weighted},
                        {"f1_weighted", result.pooled.f1_weighted}};
  manifest["outputs"] = {{"metrics", "metrics.csv"}, {"predictions", "predictions.csv"}};
  write_json(dir / "manifest.json", manifest);

  json cfg = base_config("train", a.jobs);
  cfg["input"] = a.in.empty() ? a.features_file : a.in;
  cfg["feature_set"] = features::to_string(id);
  cfg["model"] = ml::to_string(spec.family);
  cfg["params"] = spec.hyperparameters;
  cfg["seed"] = seed;
  cfg["folds"] = folds;
  cfg["cross_session"] = !a.no_cross_session;
  write_json(dir / "run_config.json", cfg);

  out << std::fixed << std::setprecision(4) << features::to_string(id) << " / " << ml::to_string(spec.family)
      << ": accuracy " << result.pooled.accuracy << ", precision " << result.pooled.precision_weighted
      << ", recall " << result.pooled.recall_weighted << ", f1 " << result.pooled.f1_weighted << " -> "
      << dir.string() << '\n';
  return kOk;
}

// --------------------------------------------------------------- effort

struct EffortArgs {
  std::string in, predictions, out;
  bool actual = false;
  std::string mode = "reciprocal";
  std::string grouping = "all";
  std::optional<int> fold;
  int jobs = 1;
};

int cmd_effort(const EffortArgs& a, std::ostream& out, std::ostream& err) {
  if (a.actual == !a.predictions.empty()) throw UsageError("effort needs exactly one of --predictions or --actual");
  if (a.fold && a.predictions.empty()) throw UsageError("--fold needs --predictions");
  effort::EffortOptions opts;
  opts.mode = effort::parse_effort_mode(a.mode);
  opts.grouping = effort::parse_grouping(a.grouping);

  ingest::LoadOptions lo;
  lo.jobs = a.jobs;
  auto loaded = ingest::load_dataset(a.in, lo);
  print_warnings(err, loaded.warnings);
  Dataset ds = std::move(loaded.dataset);

  std::vector<ml::Prediction> preds;
  if (!a.predictions.empty()) preds = ml::read_predictions(a.predictions);
  if (a.fold) {
    std::set<std::string> keep;
    for (const auto& p : preds) {
      if (p.fold == *a.fold) keep.insert(p.key.participant_id);
    }
    if (keep.empty()) throw DataError(a.predictions + ": no predictions for fold " + std::to_string(*a.fold));
    std::vector<TrialRecord> trials;
    for (const auto& t : ds.trials()) {
      if (keep.count(t.participant_id)) trials.push_back(t);
    }
    ds = Dataset(std::move(trials));
  }

  const effort::LabelSource actual_labels = effort::actual_labels(ds);
  const auto actual = effort::compute_effort(effort::summarize_segments(ds, actual_labels), opts);
  const fs::path dir = resolve_out(a.out, "effort");
  csv::write_file(dir / "effort_actual.csv", effort::format_effort(actual));

  json manifest;
  manifest["kind"] = "effort";
  manifest["effort_mode"] = effort::to_string(opts.mode);
  manifest["grouping"] = effort::to_string(opts.grouping);
  manifest["epsilon"] = opts.eps;
  manifest["hbo_floor"] = opts.hbo_floor;
  manifest["fold"] = a.fold ? json(*a.fold) : json(nullptr);
  manifest["participants"] = ds.participants();
  manifest["outputs"] = {{"actual", "effort_actual.csv"}};

  if (!a.predictions.empty()) {
    effort::LabelSource predicted;
    for (const auto& p : preds) {
      auto it = actual_labels.find(p.key);
      if (it == actual_labels.end()) {
        if (a.fold) continue;
        throw DataError(a.predictions + ": prediction for unknown trial " + to_string(p.key));
      }
      if (it->second != p.y_true) {
        throw DataError(a.predictions + ": y_true of " + to_string(p.key) + " disagrees with the dataset label");
      }
      predicted[p.key] = p.y_pred;
    }
    const auto pred = effort::compute_effort(effort::summarize_segments(ds, predicted), opts);
    const auto agreement = effort::compare(actual, pred);
    csv::write_file(dir / "effort_predicted.csv", effort::format_effort(pred));
    csv::write_file(dir / "agreement.csv", effort::format_agreement_csv(agreement));
    csv::write_file(dir / "agreement.txt", effort::format_agreement_text(agreement));
    manifest["outputs"]["predicted"] = "effort_predicted.csv";
    manifest["outputs"]["agreement"] = "agreement.csv";
    out << effort::format_agreement_text(agreement);
  }
  write_json(dir / "manifest.json", manifest);

  json cfg = base_config("effort", a.jobs);
  cfg["input"] = a.in;
  cfg["predictions"] = a.predictions.empty() ? json(nullptr) : json(a.predictions);
  cfg["effort_mode"] = effort::to_string(opts.mode);
  cfg["grouping"] = effort::to_string(opts.grouping);
  cfg["fold"] = a.fold ? json(*a.fold) : json(nullptr);
  write_json(dir / "run_config.json", cfg);
  out << "wrote " << actual.size() << " effort points to " << dir.string() << '\n';
  return kOk;
}

// --------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string plot;
};

struct GridRow {
  features::FeatureSet fs;
  ml::Family model;
  std::array<double, 4> metrics;
};

struct Coordinate {
  std::string run;
  effort::EffortPoint point;
  std::string source;
};

GridRow read_train_run(const fs::path& dir, const json& manifest) {
  GridRow row{};
  try {
    row.fs = features::parse_feature_set(manifest.at("feature_set").get<std::string>());
    row.model = ml::parse_family(manifest.at("model").get<std::string>());
  } catch (const std::exception& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }
  const fs::path path = dir / "metrics.csv";
  const auto t = csv::read_file(path);
  const std::size_t c_fold = csv::column(t, "fold", path.string());
  const char* names[] = {"accuracy", "precision_weighted", "recall_weighted", "f1_weighted"};
  for (const auto& r : t.rows) {
    if (r.fields[c_fold] != "pooled") continue;
    for (int m = 0; m < 4; ++m) {
      const auto v = csv::parse_double(r.fields[csv::column(t, names[m], path.string())]);
      if (!v) throw DataError(path.string() + ":" + std::to_string(r.line) + ": bad " + names[m]);
      row.metrics[static_cast<std::size_t>(m)] = *v;
    }
    return row;
  }
  throw DataError(path.string() + ": no pooled row");
}

std::string format_grid_csv(const std::vector<GridRow>& rows) {
  std::string out = "feature_set,model,accuracy,precision_weighted,recall_weighted,f1_weighted\n";
  for (const auto& r : rows) {
    out += std::string(features::to_string(r.fs)) + "," + std::string(ml::to_string(r.model));
    for (double v : r.metrics) out += "," + csv::format_double(v);
    out += '\n';
  }
  return out;
}

std::string format_grid_text(const std::vector<GridRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "features" << std::setw(8) << "model" << std::right << std::setw(10)
     << "accuracy" << std::setw(11) << "precision" << std::setw(9) << "recall" << std::setw(9) << "f1" << '\n';
  os << std::string(59, '-') << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << features::to_string(r.fs) << std::setw(8) << ml::to_string(r.model)
       << std::right << std::setw(10) << r.metrics[0] << std::setw(11) << r.metrics[1] << std::setw(9)
       << r.metrics[2] << std::setw(9) << r.metrics[3] << '\n';
  }
  return os.str();
}

std::string format_coordinates(const std::vector<Coordinate>& coords) {
  std::string out = "run,participant_id,segment,source,ce_z,p_z,rne,rni,state\n";
  for (const auto& c : coords) {
    const auto& p = c.point;
    out += csv::quote_if_needed(c.run) + "," + csv::quote_if_needed(p.participant_id) + "," +
           std::to_string(p.segment) + "," + c.source + "," + csv::format_double(p.ce_z) + "," +
           csv::format_double(p.p_z) + "," + csv::format_double(p.rne) + "," + csv::format_double(p.rni) + "," +
           std::string(effort::to_string(p.state)) + "\n";
  }
  return out;
}

// Scatter of (CE_z, P_z). The diagonals P_z = CE_z (RNE = 0) and
// P_z = -CE_z (RNI = 0) separate the four states.
std::string format_scatter_svg(const std::vector<Coordinate>& coords) {
  constexpr double size = 560.0, margin = 50.0;
  double lim = 1.0;
  for (const auto& c : coords) lim = std::max({lim, std::abs(c.point.ce_z), std::abs(c.point.p_z)});
  lim *= 1.1;
  auto sx = [&](double v) { return margin + (v + lim) / (2.0 * lim) * size; };
  auto sy = [&](double v) { return margin + (lim - v) / (2.0 * lim) * size; };
  const double lo = margin, hi = margin + size, mid = margin + size / 2.0;

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * margin << "\" height=\""
     << size + 2 * margin << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << lo << "\" y=\"" << lo << "\" width=\"" << size << "\" height=\"" << size
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << lo << "\" y1=\"" << mid << "\" x2=\"" << hi << "\" y2=\"" << mid
     << "\" stroke=\"#bbbbbb\"/>\n";
  os << "<line x1=\"" << mid << "\" y1=\"" << lo << "\" x2=\"" << mid << "\" y2=\"" << hi
     << "\" stroke=\"#bbbbbb\"/>\n";
  os << "<line x1=\"" << lo << "\" y1=\"" << hi << "\" x2=\"" << hi << "\" y2=\"" << lo
     << "\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n";
  os << "<line x1=\"" << lo << "\" y1=\"" << lo << "\" x2=\"" << hi << "\" y2=\"" << hi
     << "\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n";
  os << "<text x=\"" << mid << "\" y=\"" << hi + 35 << "\" text-anchor=\"middle\">CE_z</text>\n";
  os << "<text x=\"15\" y=\"" << mid << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " << mid
     << ")\">P_z</text>\n";
  os << "<text x=\"" << mid << "\" y=\"" << lo + 16 << "\" text-anchor=\"middle\">HE_HI</text>\n";
  os << "<text x=\"" << mid << "\" y=\"" << hi - 8 << "\" text-anchor=\"middle\">LE_LI</text>\n";
  os << "<text x=\"" << lo + 8 << "\" y=\"" << mid - 6 << "\">HE_LI</text>\n";
  os << "<text x=\"" << hi - 8 << "\" y=\"" << mid - 6 << "\" text-anchor=\"end\">LE_HI</text>\n";
  for (const auto& c : coords) {
    const bool actual = c.source == "actual";
    os << "<circle cx=\"" << sx(c.point.ce_z) << "\" cy=\"" << sy(c.point.p_z) << "\" r=\"4\" "
       << (actual ? "fill=\"#1f77b4\" fill-opacity=\"0.7\"" : "fill=\"none\" stroke=\"#d62728\"") << "/>\n";
  }
  os << "<circle cx=\"" << hi - 110 << "\" cy=\"" << lo + 40 << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  os << "<text x=\"" << hi - 100 << "\" y=\"" << lo + 44 << "\">actual</text>\n";
  os << "<circle cx=\"" << hi - 110 << "\" cy=\"" << lo + 58 << "\" r=\"4\" fill=\"none\" stroke=\"#d62728\"/>\n";
  os << "<text x=\"" << hi - 100 << "\" y=\"" << lo + 62 << "\">predicted</text>\n";
  os << "</svg>\n";
  return os.str();
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<GridRow> grid;
  std::vector<Coordinate> coords;
  for (const auto& in : a.inputs) {
    const fs::path dir(in);
    const fs::path mpath = dir / "manifest.json";
    if (!fs::exists(mpath)) throw DataError(dir.string() + ": not a run directory (no manifest.json)");
    const json manifest = read_json(mpath);
    const std::string kind = manifest.value("kind", "");
    if (kind == "train") {
      grid.push_back(read_train_run(dir, manifest));
    } else if (kind == "effort") {
      const std::string run = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
      std::vector<Coordinate> actual, predicted;
      for (auto& p : effort::read_effort(dir / "effort_actual.csv")) actual.push_back({run, std::move(p), "actual"});
      if (fs::exists(dir / "effort_predicted.csv")) {
        for (auto& p : effort::read_effort(dir / "effort_predicted.csv")) {
          predicted.push_back({run, std::move(p), "predicted"});
        }
      }
      for (auto& c : actual) coords.push_back(std::move(c));
      for (auto& c : predicted) coords.push_back(std::move(c));
    } else {
      throw DataError(mpath.string() + ": unknown run kind '" + kind + "'");
    }
  }

  std::sort(grid.begin(), grid.end(),
            [](const GridRow& x, const GridRow& y) { return std::pair(x.fs, x.model) < std::pair(y.fs, y.model); });
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i].fs == grid[i - 1].fs && grid[i].model == grid[i - 1].model) {
      throw DataError("two runs for " + std::string(features::to_string(grid[i].fs)) + " / " +
                      std::string(ml::to_string(grid[i].model)));
    }
  }
  std::stable_sort(coords.begin(), coords.end(), [](const Coordinate& x, const Coordinate& y) {
    return std::tie(x.run, x.point.participant_id, x.point.segment, x.source) <
           std::tie(y.run, y.point.participant_id, y.point.segment, y.source);
  });
  if (!a.plot.empty() && coords.empty()) throw UsageError("--plot needs at least one effort run directory");

  const fs::path dir = resolve_out(a.out, "report");
  fs::create_directories(dir);
  if (!grid.empty()) {
    csv::write_file(dir / "grid.csv", format_grid_csv(grid));
    csv::write_file(dir / "grid.txt", format_grid_text(grid));
    out << format_grid_text(grid);
  }
  if (!coords.empty()) csv::write_file(dir / "coordinates.csv", format_coordinates(coords));
  if (a.plot == "svg") csv::write_file(dir / "scatter.svg", format_scatter_svg(coords));

  json cfg = base_config("report", 1);
  cfg["inputs"] = a.inputs;
  cfg["plot"] = a.plot.empty() ? json(nullptr) : json(a.plot);
  write_json(dir / "run_config.json", cfg);
  out << "report: " << grid.size() << " grid row(s), " << coords.size() << " coordinate row(s) -> "
      << dir.string() << '\n';
  return kOk;
}

constexpr const char* kFooter = R"(Examples:
  cogeffort synth --out runs/data --preset high-snr --seed 4
  cogeffort preprocess --in runs/data --out runs/clean
  cogeffort features --in runs/clean --feature-set st_fc --out runs/st_fc.csv
  cogeffort train --in runs/clean --feature-set st_fc --model rf --seed 1 --out runs/rf
  cogeffort effort --in runs/data --predictions runs/rf/predictions.csv --out runs/effort
  cogeffort report runs/rf runs/effort --out runs/report --plot svg

Output paths default to $COGEFFORT_OUT (or ./cogeffort_out) when --out is omitted.
Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.)";

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cognitive-effort estimation from prefrontal fNIRS recordings", "cogeffort"};
  app.footer(kFooter);
  app.set_version_flag("--version", std::string("cogeffort ") + kVersion);
  app.require_subcommand(1);

  auto jobs_opt = [](CLI::App* sub, int& jobs) {
    sub->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };
  const auto fs_check = CLI::IsMember(feature_set_names(), CLI::ignore_case);
  const auto model_check = CLI::IsMember(model_names(), CLI::ignore_case);

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset with known ground truth");
  synth_cmd->add_option("--out,-o", sa.out, "Output dataset directory");
  synth_cmd->add_option("--preset", sa.preset, "Parameter preset")
      ->check(CLI::IsMember({"default", "high-snr", "null"}))
      ->capture_default_str();
  synth_cmd->add_option("--config", sa.config, "JSON file of generator parameters")->check(CLI::ExistingFile);
  synth_cmd->add_option("--seed", sa.seed, "Master seed");
  synth_cmd->add_option("--emit", sa.emit, "Signal form written to disk")
      ->check(CLI::IsMember({"hbo", "raw_intensity"}));
  synth_cmd->add_option("--participants", sa.participants, "Number of participants");
  synth_cmd->add_option("--effect-size", sa.effect_size, "Extra activation of correct trials (uM)");
  synth_cmd->add_option("--noise-sd", sa.noise_sd, "White noise standard deviation (uM)");
  synth_cmd->add_option("--label-rate", sa.label_rate, "Probability of a correct answer");
  synth_cmd->add_option("--region-contrast", sa.region_contrast, "LPFC / VMPFC amplitude ratio");
  synth_cmd->add_option("--baseline-amplitude", sa.baseline_amplitude, "Activation of incorrect trials (uM)");
  synth_cmd->add_option("--cardiac-amp", sa.cardiac_amp, "Cardiac sinusoid amplitude (uM)");
  synth_cmd->add_option("--respiration-amp", sa.respiration_amp, "Respiration sinusoid amplitude (uM)");
  synth_cmd->add_option("--drift", sa.drift_slope_range, "Maximum drift slope (uM/s)");
  jobs_opt(synth_cmd, sa.jobs);

  PreprocessArgs pa;
  auto* pre_cmd = app.add_subcommand("preprocess", "Filter, convert and detrend a dataset directory");
  pre_cmd->add_option("--in,-i", pa.in, "Input dataset directory")->required()->check(CLI::ExistingDirectory);
  pre_cmd->add_option("--out,-o", pa.out, "Output dataset directory");
  pre_cmd->add_option("--config", pa.config, "JSON constants table (filter, MBLL, rejection)")
      ->check(CLI::ExistingFile);
  pre_cmd->add_option("--filter-order", pa.filter_order, "FIR order (even)");
  pre_cmd->add_option("--cutoff-hz", pa.cutoff_hz, "Low-pass cutoff (Hz)");
  pre_cmd->add_option("--baseline-samples", pa.baseline_samples, "Samples averaged for the optical baseline");
  pre_cmd->add_option("--variance-floor", pa.variance_floor, "Reject channels with lower variance");
  pre_cmd->add_option("--saturation-ceiling", pa.saturation_ceiling, "Saturation threshold (absolute value)");
  jobs_opt(pre_cmd, pa.jobs);

  FeaturesArgs fa;
  auto* feat_cmd = app.add_subcommand("features", "Compute a feature table");
  feat_cmd->add_option("--in,-i", fa.in, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  feat_cmd->add_option("--out,-o", fa.out, "Output CSV file");
  feat_cmd->add_option("--feature-set,-f", fa.feature_set, "Feature set")->check(fs_check)->capture_default_str();
  feat_cmd->add_flag("--no-cross-session", fa.no_cross_session, "Temporal: drop the delta across sessions");
  jobs_opt(feat_cmd, fa.jobs);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Participant-grouped cross-validation of one classifier");
  train_cmd->add_option("--in,-i", ta.in, "Dataset directory")->check(CLI::ExistingDirectory);
  train_cmd->add_option("--features", ta.features_file, "Precomputed feature table CSV")->check(CLI::ExistingFile);
  train_cmd->add_option("--out,-o", ta.out, "Run directory");
  train_cmd->add_option("--config", ta.config, "JSON with feature_set, model, seed, folds, params")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--feature-set,-f", ta.feature_set, "Feature set (default st_fc)")->check(fs_check);
  train_cmd->add_option("--model,-m", ta.model, "Classifier (default rf)")->check(model_check);
  train_cmd->add_option("--seed", ta.seed, "Seed for fold assignment and models (default 0)");
  train_cmd->add_option("--folds", ta.folds, "Number of folds (default 5)");
  train_cmd->add_option("--param", ta.params, "Hyperparameter override name=value (repeatable)");
  train_cmd->add_flag("--no-cross-session", ta.no_cross_session, "Temporal: drop the delta across sessions");
  jobs_opt(train_cmd, ta.jobs);

  EffortArgs ea;
  auto* effort_cmd = app.add_subcommand("effort", "Relative neural efficiency and involvement per segment");
  effort_cmd->add_option("--in,-i", ea.in, "Delta-HbO dataset directory")->required()->check(CLI::ExistingDirectory);
  effort_cmd->add_option("--predictions,-p", ea.predictions, "predictions.csv from a train run")
      ->check(CLI::ExistingFile);
  effort_cmd->add_flag("--actual", ea.actual, "Use the dataset labels only");
  effort_cmd->add_option("--out,-o", ea.out, "Output directory");
  effort_cmd->add_option("--effort-mode", ea.mode, "Neural effort standardization")
      ->check(CLI::IsMember({"reciprocal", "negation"}, CLI::ignore_case))
      ->capture_default_str();
  effort_cmd->add_option("--grouping", ea.grouping, "Comparison group for z-scores")
      ->check(CLI::IsMember({"all", "segment"}, CLI::ignore_case))
      ->capture_default_str();
  effort_cmd->add_option("--fold", ea.fold, "Restrict to the test participants of one fold");
  jobs_opt(effort_cmd, ea.jobs);

  ReportArgs ra;
  auto* report_cmd = app.add_subcommand("report", "Consolidate train and effort runs");
  report_cmd->add_option("runs", ra.inputs, "Run directories")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_option("--out,-o", ra.out, "Output directory");
  report_cmd->add_option("--plot", ra.plot, "Also render the effort plane")->check(CLI::IsMember({"svg"}));

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  if (argv.empty()) argv.push_back("cogeffort");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(sa, out);
    if (*pre_cmd) return cmd_preprocess(pa, out, err);
    if (*feat_cmd) return cmd_features(fa, out, err);
    if (*train_cmd) return cmd_train(ta, out, err);
    if (*effort_cmd) return cmd_effort(ea, out, err);
    if (*report_cmd) return cmd_report(ra, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  err << "internal error: no command ran\n";
  return kInternal;
}

}  // namespace cogeffort::cli
