#include "cogeffort/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "cogeffort/csv.hpp"
#include "cogeffort/error.hpp"
#include "cogeffort/parallel.hpp"

namespace cogeffort::ingest {

namespace fs = std::filesystem;

namespace {

std::string normalize_spaces_lower(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string snake_case(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (pending && !out.empty()) out.push_back('_');
      pending = false;
      out.push_back(c);
    } else {
      pending = true;
    }
  }
  return out;
}

// Returns the canonical signal name, or nullopt for non-signal columns.
std::optional<std::string> canonical_signal(const std::string& normalized) {
  static const std::regex re(R"(^optode[ _-]?0*(\d+)(?:[ _-]*(730|850)[ _-]?(?:nm)?)?$)");
  std::smatch m;
  if (!std::regex_match(normalized, m, re)) return std::nullopt;
  std::string name = "optode_" + m[1].str();
  if (m[2].matched) name += "_" + m[2].str();
  return name;
}

std::optional<std::size_t> optode_index(const std::string& canonical, std::string* suffix) {
  static const std::regex re(R"(^optode_(\d+)(?:_(730|850))?$)");
  std::smatch m;
  if (!std::regex_match(canonical, m, re)) return std::nullopt;
  if (suffix) *suffix = m[2].matched ? m[2].str() : "";
  return static_cast<std::size_t>(std::stoul(m[1].str()));
}

bool is_signal_name(const std::string& canonical) { return optode_index(canonical, nullptr).has_value(); }

std::string describe(const TrialMeta& m) { return to_string(m.key()); }

}  // namespace

std::vector<std::string> clean_column_names(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  out.reserve(names.size());
  std::map<std::string, std::string> seen_signal;
  for (const auto& raw : names) {
    const std::string norm = normalize_spaces_lower(raw);
    if (auto sig = canonical_signal(norm)) {
      auto [it, inserted] = seen_signal.emplace(*sig, raw);
      if (!inserted) {
        throw DataError("ambiguous columns: '" + it->second + "' and '" + raw + "' both map to " + *sig);
      }
      out.push_back(*sig);
    } else {
      out.push_back(snake_case(norm));
    }
  }
  return out;
}

SignalColumns signal_columns(const RawTrialTable& t) {
  SignalColumns cols;
  std::array<bool, kChannels> have_hbo{}, have_730{}, have_850{};
  std::size_t n_hbo = 0, n_int = 0;
  for (std::size_t i = 0; i < t.column_names.size(); ++i) {
    std::string suffix;
    auto idx = optode_index(t.column_names[i], &suffix);
    if (!idx) continue;
    if (*idx < 1 || *idx > kChannels) {
      throw DataError(describe(t.meta) + ": unexpected signal column " + t.column_names[i]);
    }
    const std::size_t c = *idx - 1;
    if (suffix.empty()) {
      cols.hbo[c] = i;
      have_hbo[c] = true;
      ++n_hbo;
    } else if (suffix == "730") {
      cols.wl730[c] = i;
      have_730[c] = true;
      ++n_int;
    } else {
      cols.wl850[c] = i;
      have_850[c] = true;
      ++n_int;
    }
  }
  auto all = [](const std::array<bool, kChannels>& a) {
    return std::all_of(a.begin(), a.end(), [](bool b) { return b; });
  };
  if (n_hbo == kChannels && n_int == 0 && all(have_hbo)) {
    cols.kind = SignalKind::Hbo;
    return cols;
  }
  if (n_hbo == 0 && n_int == 2 * kChannels && all(have_730) && all(have_850)) {
    cols.kind = SignalKind::Intensity;
    return cols;
  }
  throw DataError(describe(t.meta) + ": expected signal columns optode_1..optode_16 (or "
                  "optode_N_730/optode_N_850 pairs), found " + std::to_string(n_hbo) + " + " +
                  std::to_string(n_int));
}

std::vector<double> column_values(const RawTrialTable& t, std::size_t column) {
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& cell = t.rows[r][column];
    if (!cell) {
      throw DataError(describe(t.meta) + ": missing value in column " + t.column_names[column] +
                      " row " + std::to_string(r + 1) + " (impute first)");
    }
    out.push_back(*cell);
  }
  return out;
}

RawTrialTable impute_missing(RawTrialTable t) {
  const SignalColumns cols = signal_columns(t);
  auto fill = [&t](std::size_t column) -> bool {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : t.rows) {
      if (row[column]) {
        sum += *row[column];
        ++n;
      }
    }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    for (auto& row : t.rows) {
      if (!row[column]) row[column] = mean;
    }
    return n > 0;
  };
  for (std::size_t c = 0; c < kChannels; ++c) {
    bool usable = true;
    if (cols.kind == SignalKind::Hbo) {
      usable = fill(cols.hbo[c]);
    } else {
      const bool a = fill(cols.wl730[c]);
      const bool b = fill(cols.wl850[c]);
      usable = a && b;
    }
    if (!usable) t.channel_mask[c] = false;
  }
  return t;
}

RawTrialTable window_table(const RawTrialTable& t, std::size_t n, std::vector<std::string>* warnings) {
  if (t.rows.empty()) throw DataError(describe(t.meta) + ": trial has no rows");
  RawTrialTable out = t;
  if (out.rows.size() >= n) {
    out.rows.resize(n);
    return out;
  }
  if (warnings) {
    warnings->push_back("short trial " + describe(t.meta) + ": " + std::to_string(t.rows.size()) +
                        " rows padded to " + std::to_string(n));
  }
  const auto last = out.rows.back();
  out.rows.resize(n, last);
  return out;
}

TrialRecord window_trial(const RawTrialTable& t, std::size_t n, std::vector<std::string>* warnings) {
  const SignalColumns cols = signal_columns(t);
  if (cols.kind != SignalKind::Hbo) {
    throw DataError(describe(t.meta) + ": raw-intensity trial; convert with the preprocess chain first");
  }
  const RawTrialTable w = window_table(t, n, warnings);
  TrialRecord rec;
  rec.participant_id = t.meta.participant_id;
  rec.question_id = t.meta.question_id;
  rec.question_order = t.meta.question_order;
  rec.session = t.meta.session;
  rec.label = t.meta.label;
  rec.segment = segment_of(t.meta.question_order);
  rec.channel_mask = t.channel_mask;
  rec.hbo = SignalMatrix(n, kChannels);
  for (std::size_t c = 0; c < kChannels; ++c) {
    const auto values = column_values(w, cols.hbo[c]);
    std::copy(values.begin(), values.end(), rec.hbo.channel(c).begin());
  }
  return rec;
}

RawTrialTable parse_trial_csv(std::string_view text, const std::string& source, const TrialMeta& meta) {
  const csv::Table raw = csv::parse(text, source);
  RawTrialTable t;
  t.meta = meta;
  t.column_names = clean_column_names(raw.header);
  std::vector<bool> signal(t.column_names.size());
  for (std::size_t i = 0; i < signal.size(); ++i) signal[i] = is_signal_name(t.column_names[i]);
  t.rows.reserve(raw.rows.size());
  for (const auto& row : raw.rows) {
    std::vector<std::optional<double>> values(row.fields.size());
    for (std::size_t i = 0; i < row.fields.size(); ++i) {
      const auto& f = row.fields[i];
      auto v = csv::parse_double(f);
      if (v && !std::isfinite(*v)) v.reset();
      if (!v && signal[i]) {
        const bool blank = std::all_of(f.begin(), f.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        const std::string lower = normalize_spaces_lower(f);
        if (!blank && lower != "nan" && lower != "na") {
          throw DataError(source + ":" + std::to_string(row.line) + ": cannot parse '" + f +
                          "' in column " + t.column_names[i]);
        }
      }
      values[i] = v;
    }
    t.rows.push_back(std::move(values));
  }
  return t;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  const std::string source = path.string();
  csv::Table t = csv::read_file(path);
  t.header = clean_column_names(t.header);
  const std::size_t c_file = csv::column(t, "file", source);
  const std::size_t c_pid = csv::column(t, "participant_id", source);
  const std::size_t c_qid = csv::column(t, "question_id", source);
  const std::size_t c_order = csv::column(t, "question_order", source);
  const std::size_t c_session = csv::column(t, "session", source);
  const std::size_t c_label = csv::column(t, "label", source);

  std::vector<ManifestEntry> out;
  for (const auto& row : t.rows) {
    auto int_field = [&](std::size_t c, const char* name) {
      auto v = csv::parse_int(row.fields[c]);
      if (!v) {
        throw DataError(source + ":" + std::to_string(row.line) + ": bad " + name + " '" +
                        row.fields[c] + "'");
      }
      return static_cast<int>(*v);
    };
    ManifestEntry e;
    e.file = row.fields[c_file];
    e.meta.participant_id = row.fields[c_pid];
    e.meta.question_id = row.fields[c_qid];
    e.meta.question_order = int_field(c_order, "question_order");
    e.meta.session = int_field(c_session, "session");
    e.meta.label = int_field(c_label, "label");
    if (e.file.empty() || e.meta.participant_id.empty()) {
      throw DataError(source + ":" + std::to_string(row.line) + ": empty file or participant_id");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::ostringstream os;
  os << "file,participant_id,question_id,question_order,session,label\n";
  for (const auto& e : entries) {
    os << csv::quote_if_needed(e.file) << ',' << csv::quote_if_needed(e.meta.participant_id) << ','
       << csv::quote_if_needed(e.meta.question_id) << ',' << e.meta.question_order << ','
       << e.meta.session << ',' << e.meta.label << '\n';
  }
  return os.str();
}

std::vector<RawTrialTable> load_raw_tables(const fs::path& dir, const LoadOptions& opts) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + ": not a directory");

  std::set<std::string> on_disk;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        entry.path().filename() != kManifestName) {
      on_disk.insert(entry.path().filename().string());
    }
  }
  const fs::path manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) {
    if (on_disk.empty()) throw DataError(dir.string() + ": no trials found");
    throw DataError(dir.string() + ": missing " + kManifestName);
  }
  const auto entries = read_manifest(manifest_path);
  if (entries.empty()) throw DataError(dir.string() + ": no trials found");

  std::vector<std::string> missing;
  std::set<std::string> listed;
  for (const auto& e : entries) {
    listed.insert(e.file);
    if (!fs::exists(dir / e.file)) missing.push_back(e.file);
  }
  std::vector<std::string> unlisted;
  for (const auto& f : on_disk) {
    if (!listed.count(f)) unlisted.push_back(f);
  }
  if (!missing.empty() || !unlisted.empty()) {
    std::string msg = dir.string() + ": manifest mismatch";
    for (const auto& f : missing) msg += "\n  listed but not found: " + f;
    for (const auto& f : unlisted) msg += "\n  not in manifest: " + f;
    throw DataError(msg);
  }

  std::vector<RawTrialTable> tables(entries.size());
  parallel_for(entries.size(), opts.jobs, [&](std::size_t i) {
    const fs::path p = dir / entries[i].file;
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError(p.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    tables[i] = parse_trial_csv(ss.str(), p.string(), entries[i].meta);
    if (tables[i].rows.empty()) throw DataError(p.string() + ": no data rows");
    signal_columns(tables[i]);
  });
  return tables;
}

LoadedDataset load_dataset(const fs::path& dir, const LoadOptions& opts) {
  const auto tables = load_raw_tables(dir, opts);
  std::vector<TrialRecord> trials(tables.size());
  std::vector<std::vector<std::string>> warnings(tables.size());
  parallel_for(tables.size(), opts.jobs, [&](std::size_t i) {
    trials[i] = window_trial(impute_missing(tables[i]), opts.window, &warnings[i]);
  });

  LoadedDataset out{Dataset(std::move(trials)), {}};
  for (auto& w : warnings) {
    for (auto& s : w) out.warnings.push_back(std::move(s));
  }
  const auto report = validate_dataset(out.dataset);
  if (!report.empty()) {
    throw DataError(dir.string() + ": dataset failed validation\n" + format_report(report));
  }
  return out;
}

std::string trial_file_name(const TrialKey& key) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_q%02d.csv", key.question_order);
  return key.participant_id + buf;
}

namespace {

std::string time_label(std::size_t sample) {
  return csv::format_double(static_cast<double>(sample) / SessionStructure::sampling_rate_hz);
}

}  // namespace

std::string format_trial_csv(const TrialRecord& t) {
  std::string out = "time_s";
  for (std::size_t c = 1; c <= kChannels; ++c) out += ",optode_" + std::to_string(c);
  out += '\n';
  for (std::size_t s = 0; s < t.hbo.samples(); ++s) {
    out += time_label(s);
    for (std::size_t c = 0; c < kChannels; ++c) {
      out += ',';
      if (t.channel_mask[c]) out += csv::format_double(t.hbo.at(s, c));
    }
    out += '\n';
  }
  return out;
}

std::string format_table_csv(const RawTrialTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.column_names.size(); ++i) {
    if (i) out += ',';
    out += csv::quote_if_needed(t.column_names[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (row[i]) out += csv::format_double(*row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_dataset(const fs::path& dir, const Dataset& d) {
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (const auto& t : d.trials()) {
    const std::string name = trial_file_name(t.key());
    csv::write_file(dir / name, format_trial_csv(t));
    entries.push_back({name, t.meta()});
  }
  csv::write_file(dir / kManifestName, format_manifest(entries));
}

void write_tables(const fs::path& dir, const std::vector<RawTrialTable>& tables) {
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (const auto& t : tables) {
    const std::string name = trial_file_name(t.meta.key());
    csv::write_file(dir / name, format_table_csv(t));
    entries.push_back({name, t.meta});
  }
  csv::write_file(dir / kManifestName, format_manifest(entries));
}

}  // namespace cogeffort::ingest
