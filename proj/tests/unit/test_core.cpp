#include "doctest.h"
#include "fixtures.hpp"

#include <algorithm>

#include "cogeffort/core.hpp"
#include "cogeffort/error.hpp"

using namespace cogeffort;

TEST_CASE("region layout partitions the 16 channels") {
  int lateral = 0, medial = 0;
  for (int c = 1; c <= 16; ++c) {
    const bool expect_lateral = c <= 4 || c >= 13;
    CHECK((ChannelLayout::region_of(c) == Region::LPFC) == expect_lateral);
    (ChannelLayout::region_of(c) == Region::LPFC ? lateral : medial)++;
  }
  CHECK(lateral == 8);
  CHECK(medial == 8);
  CHECK_THROWS_AS(ChannelLayout::region_of(0), DomainError);
  CHECK_THROWS_AS(ChannelLayout::region_of(17), DomainError);
}

TEST_CASE("session structure constants") {
  CHECK(SessionStructure::segment_duration_s == 140);
  CHECK(SessionStructure::question_samples == 300);
  CHECK(SessionStructure::questions == 16);
  CHECK(kWindow == 200);
}

TEST_CASE("segment_of") {
  CHECK(segment_of(1) == 1);
  CHECK(segment_of(4) == 1);
  CHECK(segment_of(5) == 2);
  CHECK(segment_of(16) == 4);
  int prev = 1;
  for (int q = 1; q <= 16; ++q) {
    const int s = segment_of(q);
    CHECK(s >= prev);
    CHECK(s == (q + 3) / 4);
    prev = s;
  }
  CHECK_THROWS_AS(segment_of(0), DomainError);
  CHECK_THROWS_AS(segment_of(17), DomainError);
  CHECK(session_of_segment(2) == 1);
  CHECK(session_of_segment(3) == 2);
}

TEST_CASE("dataset sorts trials and lists participants") {
  std::vector<TrialRecord> trials{fixture::trial("P2", 3, 1), fixture::trial("P1", 2, 0), fixture::trial("P1", 1, 1)};
  Dataset d(trials);
  REQUIRE(d.size() == 3);
  CHECK(d.trials()[0].key() == TrialKey{"P1", 1});
  CHECK(d.trials()[2].key() == TrialKey{"P2", 3});
  CHECK(d.participants() == std::vector<std::string>{"P1", "P2"});
  CHECK(d.count_label(1) == 2);
  CHECK(d.find({"P1", 2}) == 1);
  CHECK(d.find({"P3", 1}) == Dataset::npos);
}

TEST_CASE("well-formed grid validates clean") {
  const Dataset d = fixture::grid();
  CHECK(d.size() == 256);
  CHECK(validate_dataset(d).empty());
  CHECK(validate_dataset(d).empty());  // idempotent
}

TEST_CASE("short window is one violation") {
  auto trials = fixture::grid(2).trials();
  trials[5].hbo = SignalMatrix(150, kChannels);
  const auto report = validate_dataset(Dataset(trials));
  REQUIRE(report.size() == 1);
  CHECK(report[0].rule == "window_length");
  CHECK(report[0].message.find("150") != std::string::npos);
}

TEST_CASE("duplicate key is one violation") {
  auto trials = fixture::grid(1).trials();
  trials.push_back(fixture::trial("P01", 3, 1));
  const auto report = validate_dataset(Dataset(trials));
  REQUIRE(report.size() == 1);
  CHECK(report[0].rule == "duplicate");
  CHECK(report[0].message == "duplicate trial key");
  CHECK(report[0].trial == to_string(TrialKey{"P01", 3}));
}

TEST_CASE("other rules are reported") {
  auto t = fixture::trial("P1", 6, 1);
  t.segment = 1;
  t.label = 2;
  t.hbo.at(0, 0) = std::nan("");
  const auto report = validate_dataset(Dataset({t}));
  std::vector<std::string> rules;
  for (const auto& v : report) rules.push_back(v.rule);
  CHECK(std::count(rules.begin(), rules.end(), "segment") == 1);
  CHECK(std::count(rules.begin(), rules.end(), "label") == 1);
  CHECK(std::count(rules.begin(), rules.end(), "finite") == 1);
  CHECK(format_report(report).find("[label]") != std::string::npos);
}
