#include "cogeffort/effort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "cogeffort/csv.hpp"
#include "cogeffort/error.hpp"

namespace cogeffort::effort {

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  bool constant = true;
};

Moments moments(std::span<const double> x) {
  Moments m;
  if (x.empty()) return m;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  m.constant = *lo == *hi;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(x.size()));
  return m;
}

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace

LabelSource actual_labels(const Dataset& d) {
  LabelSource out;
  for (const auto& t : d.trials()) out[t.key()] = t.label;
  return out;
}

std::vector<SegmentSummary> summarize_segments(const Dataset& d, const LabelSource& labels) {
  struct Acc {
    int score = 0;
    double sum = 0.0;
    double count = 0.0;
    std::set<int> orders;
  };
  std::map<std::pair<std::string, int>, Acc> acc;
  for (const auto& t : d.trials()) {
    auto it = labels.find(t.key());
    if (it == labels.end()) throw DataError("no label for trial " + to_string(t.key()));
    Acc& a = acc[{t.participant_id, t.segment}];
    a.score += it->second;
    a.orders.insert(t.question_order);
    for (std::size_t c = 0; c < kChannels; ++c) {
      if (!t.channel_mask[c]) continue;
      for (double v : t.hbo.channel(c)) a.sum += v;
      a.count += static_cast<double>(t.hbo.samples());
    }
  }
  // Every participant is expected in every segment.
  for (const auto& pid : d.participants()) {
    for (int seg = 1; seg <= SessionStructure::segments; ++seg) acc.try_emplace({pid, seg});
  }

  std::vector<SegmentSummary> out;
  for (const auto& [key, a] : acc) {
    const int seg = key.second;
    std::string missing;
    for (int q = (seg - 1) * SessionStructure::questions_per_segment + 1;
         q <= seg * SessionStructure::questions_per_segment; ++q) {
      if (!a.orders.count(q)) missing += (missing.empty() ? "" : ",") + std::to_string(q);
    }
    if (!missing.empty()) {
      throw DataError("participant " + key.first + " segment " + std::to_string(seg) +
                      " is missing question_order " + missing);
    }
    out.push_back({key.first, seg, a.score, a.count > 0.0 ? a.sum / a.count : 0.0});
  }
  return out;
}

std::string_view to_string(EffortMode m) { return m == EffortMode::Reciprocal ? "reciprocal" : "negation"; }

EffortMode parse_effort_mode(std::string_view s) {
  const std::string v = lower(s);
  if (v == "reciprocal") return EffortMode::Reciprocal;
  if (v == "negation") return EffortMode::Negation;
  throw DomainError("unknown effort mode '" + std::string(s) + "' (expected reciprocal|negation)");
}

std::string_view to_string(Grouping g) { return g == Grouping::All ? "all" : "segment"; }

Grouping parse_grouping(std::string_view s) {
  const std::string v = lower(s);
  if (v == "all") return Grouping::All;
  if (v == "segment" || v == "per-segment") return Grouping::PerSegment;
  throw DomainError("unknown grouping '" + std::string(s) + "' (expected all|segment)");
}

std::vector<double> performance_z(std::span<const double> scores, double eps) {
  if (scores.empty()) throw DomainError("performance z-score of an empty group");
  const Moments m = moments(scores);
  std::vector<double> out(scores.size(), 0.0);
  if (m.constant) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - m.mean) / (m.sd + eps);
  return out;
}

std::vector<double> effort_z(std::span<const double> mean_hbos, EffortMode mode, double eps, double hbo_floor) {
  if (mean_hbos.empty()) throw DomainError("effort z-score of an empty group");
  std::vector<double> x(mean_hbos.begin(), mean_hbos.end());
  std::vector<double> out(x.size(), 0.0);

  if (mode == EffortMode::Negation) {
    const Moments m = moments(x);
    if (m.constant) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -(x[i] - m.mean) / (m.sd + eps);
    return out;
  }

  for (auto& v : x) {
    if (std::abs(v) < hbo_floor) v = std::signbit(v) ? -hbo_floor : hbo_floor;
  }
  const Moments m = moments(x);
  if (m.constant) return out;
  if (std::abs(m.mean) < hbo_floor) {
    throw DomainError("group mean delta-HbO is ~0; reciprocal effort is undefined (use --effort-mode negation)");
  }
  const double inv_gm = 1.0 / m.mean;
  const double denom = 1.0 / m.sd + eps;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (1.0 / x[i] - inv_gm) / denom;
  return out;
}

Coordinates rne_rni(double p_z, double ce_z) {
  return {(p_z - ce_z) / std::numbers::sqrt2, (p_z + ce_z) / std::numbers::sqrt2};
}

std::string_view to_string(State s) {
  switch (s) {
    case State::HE_HI: return "HE_HI";
    case State::HE_LI: return "HE_LI";
    case State::LE_HI: return "LE_HI";
    case State::LE_LI: return "LE_LI";
  }
  return "?";
}

State parse_state(std::string_view s) {
  std::string v;
  for (char c : s) v.push_back(c == '+' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (v == "HE_HI") return State::HE_HI;
  if (v == "HE_LI") return State::HE_LI;
  if (v == "LE_HI") return State::LE_HI;
  if (v == "LE_LI") return State::LE_LI;
  throw DataError("unknown state '" + std::string(s) + "'");
}

State classify_state(double rne, double rni) {
  const bool he = rne > 0.0;
  const bool hi = rni > 0.0;
  if (he) return hi ? State::HE_HI : State::HE_LI;
  return hi ? State::LE_HI : State::LE_LI;
}

std::vector<EffortPoint> compute_effort(const std::vector<SegmentSummary>& summaries, const EffortOptions& opts) {
  std::vector<EffortPoint> out(summaries.size());
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    groups[opts.grouping == Grouping::All ? 0 : summaries[i].segment].push_back(i);
  }
  for (const auto& [g, idx] : groups) {
    std::vector<double> scores, hbos;
    for (auto i : idx) {
      scores.push_back(summaries[i].score);
      hbos.push_back(summaries[i].mean_hbo);
    }
    const auto pz = performance_z(scores, opts.eps);
    const auto cz = effort_z(hbos, opts.mode, opts.eps, opts.hbo_floor);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto& s = summaries[idx[j]];
      const Coordinates c = rne_rni(pz[j], cz[j]);
      out[idx[j]] = {s.participant_id, s.segment, s.score, s.mean_hbo, pz[j], cz[j], c.rne, c.rni,
                     classify_state(c.rne, c.rni)};
    }
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw DomainError("pearson needs two equal-length non-empty series");
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  if (ma.constant || mb.constant) return std::equal(a.begin(), a.end(), b.begin()) ? 1.0 : 0.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma.mean;
    const double db = b[i] - mb.mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

AgreementReport compare(const std::vector<EffortPoint>& actual, const std::vector<EffortPoint>& predicted) {
  using Key = std::pair<std::string, int>;
  std::map<Key, const EffortPoint*> a, p;
  for (const auto& e : actual) a[{e.participant_id, e.segment}] = &e;
  for (const auto& e : predicted) p[{e.participant_id, e.segment}] = &e;
  std::string diff;
  for (const auto& [k, v] : a) {
    if (!p.count(k)) diff += "\n  only in actual: " + k.first + " segment " + std::to_string(k.second);
  }
  for (const auto& [k, v] : p) {
    if (!a.count(k)) diff += "\n  only in predicted: " + k.first + " segment " + std::to_string(k.second);
  }
  if (!diff.empty()) throw DataError("effort point keys differ:" + diff);
  if (a.empty()) throw DataError("no effort points to compare");

  std::vector<double> ar, pr, ai, pi;
  AgreementReport r;
  for (const auto& [k, ea] : a) {
    const EffortPoint* ep = p.at(k);
    ar.push_back(ea->rne);
    pr.push_back(ep->rne);
    ai.push_back(ea->rni);
    pi.push_back(ep->rni);
    r.mae_rne += std::abs(ea->rne - ep->rne);
    r.mae_rni += std::abs(ea->rni - ep->rni);
    if (ea->state == ep->state) ++r.quadrant_matches;
    ++r.quadrant_total;
  }
  r.mae_rne /= static_cast<double>(r.quadrant_total);
  r.mae_rni /= static_cast<double>(r.quadrant_total);
  r.pearson_rne = pearson(ar, pr);
  r.pearson_rni = pearson(ai, pi);
  return r;
}

std::string format_effort(const std::vector<EffortPoint>& points) {
  std::string out = "participant_id,segment,score,mean_hbo,p_z,ce_z,rne,rni,state\n";
  for (const auto& e : points) {
    out += csv::quote_if_needed(e.participant_id) + "," + std::to_string(e.segment) + "," +
           std::to_string(e.score) + "," + csv::format_double(e.mean_hbo) + "," + csv::format_double(e.p_z) +
           "," + csv::format_double(e.ce_z) + "," + csv::format_double(e.rne) + "," +
           csv::format_double(e.rni) + "," + std::string(to_string(e.state)) + "\n";
  }
  return out;
}

std::vector<EffortPoint> parse_effort(std::string_view text, const std::string& source) {
  const csv::Table t = csv::parse(text, source);
  const char* cols[] = {"participant_id", "segment", "score", "mean_hbo", "p_z", "ce_z", "rne", "rni", "state"};
  std::size_t idx[9];
  for (int i = 0; i < 9; ++i) idx[i] = csv::column(t, cols[i], source);
  std::vector<EffortPoint> out;
  for (const auto& row : t.rows) {
    auto num = [&](int i) {
      const auto v = csv::parse_double(row.fields[idx[i]]);
      if (!v) throw DataError(source + ":" + std::to_string(row.line) + ": bad " + cols[i]);
      return *v;
    };
    EffortPoint e;
    e.participant_id = row.fields[idx[0]];
    e.segment = static_cast<int>(num(1));
    e.score = static_cast<int>(num(2));
    e.mean_hbo = num(3);
    e.p_z = num(4);
    e.ce_z = num(5);
    e.rne = num(6);
    e.rni = num(7);
    e.state = parse_state(row.fields[idx[8]]);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<EffortPoint> read_effort(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_effort(ss.str(), path.string());
}

std::string format_agreement_csv(const AgreementReport& r) {
  return "mae_rne,mae_rni,pearson_rne,pearson_rni,quadrant_matches,quadrant_total\n" +
         csv::format_double(r.mae_rne) + "," + csv::format_double(r.mae_rni) + "," +
         csv::format_double(r.pearson_rne) + "," + csv::format_double(r.pearson_rni) + "," +
         std::to_string(r.quadrant_matches) + "," + std::to_string(r.quadrant_total) + "\n";
}

std::string format_agreement_text(const AgreementReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "RNE  MAE %.4f  Pearson %.4f\n"
                "RNI  MAE %.4f  Pearson %.4f\n"
                "Quadrant agreement %d / %d\n",
                r.mae_rne, r.pearson_rne, r.mae_rni, r.pearson_rni, r.quadrant_matches, r.quadrant_total);
  return buf;
}

}  // namespace cogeffort::effort
