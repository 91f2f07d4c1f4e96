#include "cogeffort/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cogeffort/csv.hpp"
#include "cogeffort/error.hpp"
#include "cogeffort/kernels.hpp"
#include "cogeffort/parallel.hpp"

namespace cogeffort::features {

std::string_view to_string(FeatureSet id) {
  switch (id) {
    case FeatureSet::Basic: return "basic";
    case FeatureSet::ST: return "st";
    case FeatureSet::FC: return "fc";
    case FeatureSet::ST_FC: return "st_fc";
    case FeatureSet::Temporal: return "temporal";
  }
  return "?";
}

FeatureSet parse_feature_set(std::string_view name) {
  std::string s;
  for (char c : name) s.push_back(c == '+' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "basic") return FeatureSet::Basic;
  if (s == "st") return FeatureSet::ST;
  if (s == "fc") return FeatureSet::FC;
  if (s == "st_fc") return FeatureSet::ST_FC;
  if (s == "temporal") return FeatureSet::Temporal;
  throw DomainError("unknown feature set '" + std::string(name) + "'");
}

std::array<double, kStatCount> stat_features(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw DomainError("stat_features needs at least 2 samples");
  const double dn = static_cast<double>(n);
  const double mean = kernels::sum(x) / dn;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());

  double grad = 0.0, grad_sq = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = x[i] - x[i - 1];
    grad += d;
    grad_sq += d * d;
  }
  grad /= dn - 1.0;
  grad_sq /= dn - 1.0;

  double m2 = 0.0, skew = 0.0, kurt = 0.0;
  if (*mx != *mn) {
    double s3 = 0.0, s4 = 0.0;
    m2 = kernels::sum_squared_deviation(x, mean) / dn;
    for (double v : x) {
      const double d = v - mean;
      const double d2 = d * d;
      s3 += d2 * d;
      s4 += d2 * d2;
    }
    const double m3 = s3 / dn;
    const double m4 = s4 / dn;
    skew = m3 / std::pow(m2, 1.5);
    kurt = m4 / (m2 * m2);
  }
  return {mean, std::sqrt(m2), *mx, *mn, grad, grad_sq, skew, kurt};
}

namespace {

const std::vector<std::string>& st_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (std::size_t c = 1; c <= kChannels; ++c) {
      for (auto s : kStatNames) v.push_back("opt" + std::to_string(c) + "_" + std::string(s));
    }
    return v;
  }();
  return names;
}

const std::vector<std::string>& fc_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (std::size_t i = 1; i <= kChannels; ++i) {
      for (std::size_t j = i + 1; j <= kChannels; ++j) {
        v.push_back("fc_" + std::to_string(i) + "_" + std::to_string(j));
      }
    }
    return v;
  }();
  return names;
}

const std::vector<std::string>& basic_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (std::size_t c = 1; c <= kChannels; ++c) v.push_back("opt" + std::to_string(c) + "_mean");
    return v;
  }();
  return names;
}

std::vector<double> st_values(const TrialRecord& t) {
  std::vector<double> v(kChannels * kStatCount, 0.0);
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!t.channel_mask[c]) continue;
    const auto s = stat_features(t.hbo.channel(c));
    std::copy(s.begin(), s.end(), v.begin() + static_cast<std::ptrdiff_t>(c * kStatCount));
  }
  return v;
}

std::vector<double> fc_values(const TrialRecord& t) {
  const FcMatrix m = fc_matrix(t);
  std::vector<double> v;
  v.reserve(kChannels * (kChannels - 1) / 2);
  for (std::size_t i = 0; i < kChannels; ++i) {
    for (std::size_t j = i + 1; j < kChannels; ++j) v.push_back(m[i][j]);
  }
  return v;
}

std::vector<double> basic_values(const TrialRecord& t) {
  std::vector<double> v(kChannels, 0.0);
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!t.channel_mask[c]) continue;
    const auto x = t.hbo.channel(c);
    v[c] = kernels::sum(x) / static_cast<double>(x.size());
  }
  return v;
}

}  // namespace

FeatureVector st_features(const TrialRecord& trial) { return {trial.key(), st_names(), st_values(trial)}; }

FcMatrix fc_matrix(const TrialRecord& trial) {
  const std::size_t n = trial.hbo.samples();
  std::array<std::vector<double>, kChannels> centered;
  std::array<double, kChannels> norm{};
  std::array<bool, kChannels> usable{};
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!trial.channel_mask[c] || n < 2) continue;
    const auto x = trial.hbo.channel(c);
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    if (*mn == *mx) continue;
    const double mean = kernels::sum(x) / static_cast<double>(n);
    centered[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) centered[c][i] = x[i] - mean;
    norm[c] = std::sqrt(kernels::dot(centered[c], centered[c]));
    usable[c] = norm[c] > 0.0;
  }
  FcMatrix m{};
  for (std::size_t i = 0; i < kChannels; ++i) {
    if (!usable[i]) continue;
    m[i][i] = 1.0;
    for (std::size_t j = i + 1; j < kChannels; ++j) {
      if (!usable[j]) continue;
      const double r = kernels::dot(centered[i], centered[j]) / (norm[i] * norm[j]);
      m[i][j] = m[j][i] = std::clamp(r, -1.0, 1.0);
    }
  }
  return m;
}

FeatureVector fc_features(const TrialRecord& trial) { return {trial.key(), fc_names(), fc_values(trial)}; }

FeatureVector basic_features(const TrialRecord& trial) {
  return {trial.key(), basic_names(), basic_values(trial)};
}

FeatureTable delta_features(const FeatureTable& table, const Dataset& dataset, const DeltaOptions& opts,
                            std::vector<std::string>* warnings) {
  if (table.id != FeatureSet::ST && table.id != FeatureSet::FC && table.id != FeatureSet::ST_FC) {
    throw DomainError("delta features need an ST, FC or ST_FC table, got " + std::string(to_string(table.id)));
  }
  std::vector<const FeatureRow*> sorted;
  sorted.reserve(table.rows.size());
  for (const auto& r : table.rows) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FeatureRow* a, const FeatureRow* b) { return a->key < b->key; });

  auto session_of = [&](const TrialKey& k) {
    const std::size_t i = dataset.find(k);
    if (i == Dataset::npos) throw DataError("feature row " + to_string(k) + " not in dataset");
    return dataset.trials()[i].session;
  };

  FeatureTable out{FeatureSet::Temporal, {}, {}};
  out.names.reserve(table.names.size());
  for (const auto& n : table.names) out.names.push_back("d_" + n);

  std::size_t begin = 0;
  while (begin < sorted.size()) {
    std::size_t end = begin;
    while (end < sorted.size() && sorted[end]->key.participant_id == sorted[begin]->key.participant_id) ++end;
    if (end - begin < 2) {
      if (warnings) {
        warnings->push_back("participant " + sorted[begin]->key.participant_id +
                            " has a single trial; no temporal features");
      }
    }
    for (std::size_t i = begin + 1; i < end; ++i) {
      const FeatureRow& prev = *sorted[i - 1];
      const FeatureRow& cur = *sorted[i];
      if (!opts.cross_session && session_of(prev.key) != session_of(cur.key)) continue;
      FeatureRow d{cur.key, cur.label, std::vector<double>(cur.values.size())};
      for (std::size_t c = 0; c < cur.values.size(); ++c) d.values[c] = cur.values[c] - prev.values[c];
      out.rows.push_back(std::move(d));
    }
    begin = end;
  }
  return out;
}

FeatureTable assemble(FeatureSet id, const Dataset& dataset, const AssembleOptions& opts,
                      std::vector<std::string>* warnings) {
  if (id == FeatureSet::Temporal) {
    const FeatureTable base = assemble(FeatureSet::ST_FC, dataset, opts, warnings);
    return delta_features(base, dataset, opts.delta, warnings);
  }
  FeatureTable t{id, {}, std::vector<FeatureRow>(dataset.size())};
  switch (id) {
    case FeatureSet::Basic: t.names = basic_names(); break;
    case FeatureSet::ST: t.names = st_names(); break;
    case FeatureSet::FC: t.names = fc_names(); break;
    case FeatureSet::ST_FC:
      t.names = st_names();
      t.names.insert(t.names.end(), fc_names().begin(), fc_names().end());
      break;
    case FeatureSet::Temporal: break;
  }
  parallel_for(dataset.size(), opts.jobs, [&](std::size_t i) {
    const TrialRecord& trial = dataset.trials()[i];
    FeatureRow row{trial.key(), trial.label, {}};
    switch (id) {
      case FeatureSet::Basic: row.values = basic_values(trial); break;
      case FeatureSet::ST: row.values = st_values(trial); break;
      case FeatureSet::FC: row.values = fc_values(trial); break;
      case FeatureSet::ST_FC: {
        row.values = st_values(trial);
        const auto fc = fc_values(trial);
        row.values.insert(row.values.end(), fc.begin(), fc.end());
        break;
      }
      case FeatureSet::Temporal: break;
    }
    t.rows[i] = std::move(row);
  });
  return t;
}

std::string format_table(const FeatureTable& t) {
  std::string out = "participant_id,question_order,label";
  for (const auto& n : t.names) out += "," + n;
  out += '\n';
  for (const auto& r : t.rows) {
    out += csv::quote_if_needed(r.key.participant_id);
    out += "," + std::to_string(r.key.question_order) + "," + std::to_string(r.label);
    for (double v : r.values) out += "," + csv::format_double(v);
    out += '\n';
  }
  return out;
}

FeatureTable parse_table(std::string_view text, const std::string& source, FeatureSet id) {
  const csv::Table raw = csv::parse(text, source);
  if (raw.header.size() < 3 || raw.header[0] != "participant_id" || raw.header[1] != "question_order" ||
      raw.header[2] != "label") {
    throw DataError(source + ": expected header participant_id,question_order,label,...");
  }
  FeatureTable t{id, {raw.header.begin() + 3, raw.header.end()}, {}};
  for (const auto& row : raw.rows) {
    FeatureRow r;
    r.key.participant_id = row.fields[0];
    const auto order = csv::parse_int(row.fields[1]);
    const auto label = csv::parse_int(row.fields[2]);
    if (!order || !label) throw DataError(source + ":" + std::to_string(row.line) + ": bad key or label");
    r.key.question_order = static_cast<int>(*order);
    r.label = static_cast<int>(*label);
    for (std::size_t i = 3; i < row.fields.size(); ++i) {
      const auto v = csv::parse_double(row.fields[i]);
      if (!v) throw DataError(source + ":" + std::to_string(row.line) + ": bad value '" + row.fields[i] + "'");
      r.values.push_back(*v);
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

void write_table(const std::filesystem::path& path, const FeatureTable& t) {
  csv::write_file(path, format_table(t));
}

FeatureTable read_table(const std::filesystem::path& path, FeatureSet id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_table(ss.str(), path.string(), id);
}

}  // namespace cogeffort::features
