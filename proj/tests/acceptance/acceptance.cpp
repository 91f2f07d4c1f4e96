// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"

#include "cogeffort/cli.hpp"
#include "cogeffort/csv.hpp"
#include "cogeffort/effort.hpp"
#include "cogeffort/features.hpp"
#include "cogeffort/ingest.hpp"
#include "cogeffort/ml.hpp"
#include "cogeffort/preprocess.hpp"
#include "cogeffort/synth.hpp"

using namespace cogeffort;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (s > budget_s) o.require(false, "over time budget");
  if (!o.pass) ++failures;
  char head[160];
  std::snprintf(head, sizeof head, "[%s] %2d %-28s %7.2f s / %5.0f s", o.pass ? "PASS" : "FAIL", id, name.c_str(), s,
                budget_s);
  std::cout << head << (o.detail.empty() ? "" : "  " + o.detail) << std::endl;
}

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

bool close_rel(double got, double ref, double tol) {
  return std::abs(got - ref) <= tol * std::max(1.0, std::abs(ref));
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cogeffort");
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double pooled_accuracy(const features::FeatureTable& t, ml::Family f, std::uint64_t seed) {
  ml::CvOptions opts;
  opts.seed = seed;
  opts.jobs = 4;
  return ml::cross_validate(t, ml::ClassifierSpec::defaults(f), opts).pooled.accuracy;
}

Outcome shape_conformance() {
  Outcome o;
  const auto d = synth::generate(synth::SynthSpec::preset("default")).dataset;
  o.require(d.size() == 256, "trial count " + std::to_string(d.size()));
  for (const auto& t : d.trials()) {
    if (t.hbo.samples() != 200 || t.hbo.channels() != 16) {
      o.require(false, "window shape of " + to_string(t.key()));
      break;
    }
  }
  using features::FeatureSet;
  const std::pair<FeatureSet, std::size_t> widths[] = {
      {FeatureSet::Basic, 16}, {FeatureSet::ST, 128}, {FeatureSet::FC, 120}, {FeatureSet::ST_FC, 248},
      {FeatureSet::Temporal, 248}};
  std::string seen;
  for (const auto& [id, w] : widths) {
    features::AssembleOptions ao;
    ao.jobs = 4;
    const auto t = features::assemble(id, d, ao);
    seen += std::string(seen.empty() ? "" : "/") + std::to_string(t.cols());
    o.require(t.cols() == w, std::string(features::to_string(id)) + " width " + std::to_string(t.cols()));
    for (const auto& r : t.rows) {
      if (r.values.size() != w) o.require(false, "ragged row in " + std::string(features::to_string(id)));
    }
    const std::size_t rows = id == FeatureSet::Temporal ? 240 : 256;
    o.require(t.rows.size() == rows, std::string(features::to_string(id)) + " rows " + std::to_string(t.rows.size()));
  }
  o.detail = o.pass ? "256 trials, widths " + seen + ", temporal rows 240" : o.detail;
  return o;
}

Outcome filter_correctness() {
  Outcome o;
  const auto taps = preprocess::design_lowpass_fir();
  const auto& h = taps.coefficients;
  const double dc = oracle::dtft_magnitude(h, 0.0, 10.0);
  o.require(std::abs(dc - 1.0) <= 1e-9, "DC gain " + fmt("%.3g", dc));
  const double h005 = oracle::dtft_magnitude(h, 0.05, 10.0);
  const double h03 = oracle::dtft_magnitude(h, 0.3, 10.0);
  const double h11 = oracle::dtft_magnitude(h, 1.1, 10.0);
  o.require(h11 < h03 && h03 < h005, "attenuation ordering");

  const std::size_t n = 3000;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * 1.1 * static_cast<double>(i) / 10.0);
  const auto y = preprocess::apply_filter(x, taps);
  double px = 0, py = 0;
  for (std::size_t i = h.size(); i < n; ++i) {
    px += x[i] * x[i];
    py += y[i] * y[i];
  }
  const double db = 10.0 * std::log10(px / py);
  o.require(db >= 20.0, "cardiac reduction " + fmt("%.1f dB", db));
  if (o.pass) {
    o.detail = "|H(0)|-1 = " + fmt("%.1e", dc - 1.0) + ", |H| 0.05/0.3/1.1 Hz = " + fmt("%.4f", h005) + "/" +
               fmt("%.4f", h03) + "/" + fmt("%.2e", h11) + ", cardiac -" + fmt("%.1f dB", db);
  }
  return o;
}

Outcome mbll_round_trip() {
  Outcome o;
  const preprocess::MbllParams p;
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (std::size_t c = 0; c < kChannels; ++c) {
    auto hbo = oracle::random_series(rng, 300, 2.0);
    auto hbr = oracle::random_series(rng, 300, 0.8);
    for (std::size_t i = 0; i < 20; ++i) hbo[i] = hbr[i] = 0.0;
    const double i730 = 800.0 + 50.0 * static_cast<double>(c), i850 = 1100.0 + 30.0 * static_cast<double>(c);
    const auto fwd = preprocess::mbll_forward(hbo, hbr, i730, i850, p);
    const auto back = preprocess::mbll_convert(fwd.wl730, fwd.wl850, {0, 20}, p);
    for (std::size_t i = 20; i < 300; ++i) {
      worst = std::max(worst, std::abs(back.hbo[i] - hbo[i]) / std::abs(hbo[i]));
      worst = std::max(worst, std::abs(back.hbr[i] - hbr[i]) / std::abs(hbr[i]));
    }
    for (std::size_t i = 0; i < 20; ++i) {
      o.require(std::abs(back.hbo[i]) < 1e-9 && std::abs(back.hbr[i]) < 1e-9, "baseline not zero");
    }
  }
  o.require(worst <= 1e-9, "max relative error " + fmt("%.2e", worst));
  if (o.pass) o.detail = "16 channels, max relative error " + fmt("%.2e", worst);
  return o;
}

Outcome feature_oracles() {
  Outcome o;
  std::mt19937_64 rng(404);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = oracle::random_series(rng, 200, 0.5 + i * 0.05);
    const auto got = features::stat_features(x);
    const auto m = oracle::moments(x);
    const double ref[] = {m.mean, m.std, m.max, m.min, m.grad_mean, m.sq_grad_mean, m.skew, m.kurt};
    for (std::size_t k = 0; k < features::kStatCount; ++k) {
      worst = std::max(worst, std::abs(got[k] - ref[k]) / std::max(1.0, std::abs(ref[k])));
    }
  }
  o.require(worst <= 1e-12, "stat_features deviation " + fmt("%.2e", worst));

  const auto d = synth::generate(synth::SynthSpec::preset("default")).dataset;
  double fc_worst = 0;
  int checked = 0;
  for (const auto& t : d.trials()) {
    const auto fc = features::fc_matrix(t);
    for (std::size_t i = 0; i < kChannels; ++i) {
      if (fc[i][i] != 1.0) o.require(false, "diagonal in " + to_string(t.key()));
      for (std::size_t j = 0; j < kChannels; ++j) {
        if (fc[i][j] != fc[j][i] || fc[i][j] < -1.0 || fc[i][j] > 1.0) {
          o.require(false, "symmetry/range in " + to_string(t.key()));
        }
      }
    }
    if (checked++ < 32) {
      for (std::size_t i = 0; i < kChannels; ++i) {
        for (std::size_t j = i + 1; j < kChannels; ++j) {
          const double ref = oracle::pearson(to_vec(t.hbo.channel(i)), to_vec(t.hbo.channel(j)));
          fc_worst = std::max(fc_worst, std::abs(fc[i][j] - ref));
        }
      }
    }
  }
  o.require(fc_worst <= 1e-12, "fc deviation " + fmt("%.2e", fc_worst));
  if (o.pass) {
    o.detail = "stat max dev " + fmt("%.1e", worst) + ", fc max dev " + fmt("%.1e", fc_worst) +
               ", 256 FC matrices symmetric with unit diagonal";
  }
  return o;
}

Outcome leak_free_cv() {
  Outcome o;
  const auto d = synth::generate(synth::SynthSpec::preset("default")).dataset;
  const auto plan = ml::group_kfold(d.participants(), 5, 0);
  std::multiset<std::size_t> sizes;
  for (int k = 0; k < 5; ++k) {
    const auto test = plan.test_participants(k);
    const auto train = plan.train_participants(k);
    sizes.insert(test.size());
    for (const auto& p : test) {
      o.require(std::find(train.begin(), train.end(), p) == train.end(), p + " in train and test of fold " +
                                                                             std::to_string(k));
    }
  }
  o.require(sizes == std::multiset<std::size_t>{3, 3, 3, 3, 4}, "fold sizes");

  const auto table = features::assemble(features::FeatureSet::ST_FC, d);
  ml::CvOptions opts;
  opts.jobs = 4;
  const auto r = ml::cross_validate(table, ml::ClassifierSpec::defaults(ml::Family::LogisticRegression), opts);
  std::map<TrialKey, int> seen;
  for (const auto& p : r.predictions) {
    ++seen[p.key];
    if (r.plan.assignments.at(p.key.participant_id) != p.fold) o.require(false, "prediction from a training fold");
  }
  o.require(seen.size() == d.size(), "coverage " + std::to_string(seen.size()));
  for (const auto& [k, n] : seen) {
    if (n != 1) o.require(false, to_string(k) + " predicted " + std::to_string(n) + " times");
  }
  if (o.pass) o.detail = "fold sizes {4,3,3,3,3}, disjoint, 256 trials predicted once";
  return o;
}

Outcome learnability() {
  Outcome o;
  using features::FeatureSet;
  const auto high = features::assemble(FeatureSet::ST_FC, synth::generate(synth::SynthSpec::preset("high-snr")).dataset);
  const double a_high = pooled_accuracy(high, ml::Family::RandomForest, 0);
  o.require(a_high >= 0.80, "high-snr accuracy " + fmt("%.4f", a_high));

  const auto null_t = features::assemble(FeatureSet::ST_FC, synth::generate(synth::SynthSpec::preset("null")).dataset);
  const double a_null = pooled_accuracy(null_t, ml::Family::RandomForest, 0);
  o.require(a_null >= 0.40 && a_null <= 0.60, "effect 0 accuracy " + fmt("%.4f", a_null));

  auto balanced = synth::SynthSpec::preset("high-snr");
  balanced.label_rate = 0.5;
  auto shuffled = features::assemble(FeatureSet::ST_FC, synth::generate(balanced).dataset);
  std::vector<int> labels;
  for (const auto& r : shuffled.rows) labels.push_back(r.label);
  std::mt19937_64 rng(6);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < labels.size(); ++i) shuffled.rows[i].label = labels[i];
  const double a_shuf = pooled_accuracy(shuffled, ml::Family::RandomForest, 0);
  o.require(a_shuf >= 0.40 && a_shuf <= 0.60, "shuffled-label accuracy " + fmt("%.4f", a_shuf));

  auto skewed = synth::SynthSpec::preset("default");
  skewed.effect_size = 0.0;
  const auto skew_t = features::assemble(FeatureSet::ST_FC, synth::generate(skewed).dataset);
  const double a_skew = pooled_accuracy(skew_t, ml::Family::RandomForest, 0);

  o.detail = (o.pass ? "" : o.detail + "; ") + "RF st_fc: high-snr " + fmt("%.4f", a_high) + ", effect 0 " +
             fmt("%.4f", a_null) + ", shuffled " + fmt("%.4f", a_shuf) +
             " (info: effect 0 at 168/256 label rate " + fmt("%.4f", a_skew) + ")";
  return o;
}

Outcome majority_class() {
  Outcome o;
  std::vector<int> y(256, 0), ones(256, 1);
  std::fill(y.begin(), y.begin() + 168, 1);
  const auto m = ml::compute_metrics(y, ones);
  o.require(m.accuracy == 0.65625, "accuracy " + fmt("%.17g", m.accuracy));
  if (o.pass) o.detail = "accuracy " + fmt("%.5f", m.accuracy) + " exactly";
  return o;
}

Outcome effort_math() {
  Outcome o;
  std::mt19937_64 rng(10000);
  std::normal_distribution<double> n(0.0, 3.0);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double p = n(rng), c = n(rng);
    const auto r = effort::rne_rni(p, c);
    worst = std::max(worst, std::abs(r.rne * r.rne + r.rni * r.rni - (p * p + c * c)));
  }
  o.require(worst <= 1e-9, "rotation identity deviation " + fmt("%.2e", worst));

  const std::vector<double> equal(64, 3.0);
  for (double v : effort::performance_z(equal)) {
    if (v != 0.0) o.require(false, "p_z of equal scores not 0");
  }

  const std::vector<double> x{0.5, 1.0};
  const auto ce = effort::effort_z(x, effort::EffortMode::Reciprocal);
  o.require(std::abs(ce[0] - 0.1666) <= 1e-3 && std::abs(ce[1] + 0.0833) <= 1e-3,
            "ce_z " + fmt("%.4f", ce[0]) + "," + fmt("%.4f", ce[1]));
  if (o.pass) {
    o.detail = "rotation dev " + fmt("%.1e", worst) + ", equal scores p_z 0, ce_z {" + fmt("%.4f", ce[0]) + ", " +
               fmt("%.4f", ce[1]) + "}";
  }
  return o;
}

effort::AgreementReport read_agreement(const fs::path& p) {
  const auto t = csv::read_file(p);
  if (t.rows.size() != 1) throw std::runtime_error("agreement.csv: expected one row");
  const auto& f = t.rows[0].fields;
  auto num = [&](const char* name) { return *csv::parse_double(f[csv::column(t, name, p.string())]); };
  effort::AgreementReport r;
  r.mae_rne = num("mae_rne");
  r.mae_rni = num("mae_rni");
  r.pearson_rne = num("pearson_rne");
  r.pearson_rni = num("pearson_rni");
  r.quadrant_matches = static_cast<int>(num("quadrant_matches"));
  r.quadrant_total = static_cast<int>(num("quadrant_total"));
  return r;
}

Outcome agreement_pipeline() {
  Outcome o;
  oracle::TempDir dir("acceptance_agreement");
  const auto data = dir / "data";
  if (cli({"synth", "--out", data.string()}) != 0) throw std::runtime_error("synth failed");
  const auto d = ingest::load_dataset(data).dataset;

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(9);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<int> matches;
  std::string seq;
  for (int k : {0, 8, 32}) {
    std::vector<ml::Prediction> preds;
    for (const auto& t : d.trials()) preds.push_back({t.key(), t.label, t.label, 0});
    for (int i = 0; i < k; ++i) preds[order[static_cast<std::size_t>(i)]].y_pred ^= 1;
    const auto pfile = dir / ("pred_" + std::to_string(k) + ".csv");
    csv::write_file(pfile, ml::format_predictions(preds));
    const auto out = dir / ("effort_" + std::to_string(k));
    if (cli({"effort", "--in", data.string(), "-p", pfile.string(), "--out", out.string()}) != 0) {
      throw std::runtime_error("effort failed for k=" + std::to_string(k));
    }
    const auto r = read_agreement(out / "agreement.csv");
    if (k == 0) {
      o.require(r.mae_rne == 0.0 && r.mae_rni == 0.0, "MAE not 0");
      o.require(r.pearson_rne == 1.0 && r.pearson_rni == 1.0, "Pearson not 1");
      o.require(r.quadrant_matches == 64 && r.quadrant_total == 64,
                "quadrants " + std::to_string(r.quadrant_matches) + "/" + std::to_string(r.quadrant_total));
    }
    matches.push_back(r.quadrant_matches);
    seq += std::string(seq.empty() ? "" : ", ") + "k=" + std::to_string(k) + ": " +
           std::to_string(r.quadrant_matches) + "/64";
  }
  o.require(matches[1] <= matches[0] && matches[2] <= matches[1], "matches not non-increasing");
  o.detail = (o.pass ? "identical: MAE 0, Pearson 1; " : o.detail + "; ") + seq;
  return o;
}

Outcome determinism() {
  Outcome o;
  oracle::TempDir dir("acceptance_determinism");
  std::vector<std::string> compared;
  for (const char* jobs : {"1", "4"}) {
    const auto root = dir / (std::string("jobs") + jobs);
    const auto data = (root / "data").string();
    const auto run = (root / "train").string();
    const auto eff = (root / "effort").string();
    const bool ok = cli({"synth", "--out", data, "--jobs", jobs}) == 0 &&
                    cli({"train", "--in", data, "-f", "st_fc", "-m", "rf", "--seed", "0", "--out", run, "--jobs",
                         jobs}) == 0 &&
                    cli({"effort", "--in", data, "-p", run + "/predictions.csv", "--out", eff}) == 0 &&
                    cli({"report", run, eff, "--out", (root / "report").string()}) == 0;
    if (!ok) throw std::runtime_error(std::string("pipeline failed with --jobs ") + jobs);
  }
  const char* files[] = {"train/predictions.csv", "train/metrics.csv", "effort/effort_actual.csv",
                         "effort/effort_predicted.csv", "effort/agreement.csv", "report/grid.csv",
                         "report/coordinates.csv"};
  for (const char* f : files) {
    const bool same = slurp(dir / "jobs1" / f) == slurp(dir / "jobs4" / f);
    o.require(same, std::string(f) + " differs");
  }
  if (o.pass) o.detail = std::to_string(std::size(files)) + " output files byte-identical across --jobs 1 and 4";
  return o;
}

}  // namespace

int main() {
  criterion(1, "shape conformance", 10, shape_conformance);
  criterion(2, "filter correctness", 5, filter_correctness);
  criterion(3, "MBLL round trip", 5, mbll_round_trip);
  criterion(4, "feature oracles", 30, feature_oracles);
  criterion(5, "leak-free CV", 5, leak_free_cv);
  criterion(6, "learnability", 180, learnability);
  criterion(7, "majority-class sanity", 1, majority_class);
  criterion(8, "effort math", 5, effort_math);
  criterion(9, "end-to-end agreement", 60, agreement_pipeline);
  criterion(10, "determinism", 300, determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
