#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "cogeffort/effort.hpp"
#include "cogeffort/error.hpp"

using namespace cogeffort;
using namespace cogeffort::effort;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

EffortPoint point(const std::string& pid, int segment, double rne, double rni) {
  EffortPoint p;
  p.participant_id = pid;
  p.segment = segment;
  p.rne = rne;
  p.rni = rni;
  p.state = classify_state(rne, rni);
  return p;
}

// 3 participants x 4 segments, one point per quadrant pattern.
std::vector<EffortPoint> twelve() {
  std::vector<EffortPoint> pts;
  const double rne[4] = {0.8, -0.4, 0.3, -1.2};
  const double rni[4] = {0.5, 0.7, -0.9, -0.2};
  for (int p = 1; p <= 3; ++p) {
    for (int s = 1; s <= 4; ++s) {
      pts.push_back(point("P0" + std::to_string(p), s, rne[s - 1] * p, rni[s - 1] + 0.1 * p));
    }
  }
  return pts;
}

}  // namespace

TEST_CASE("performance_z") {
  const std::vector<double> two{2, 4};
  const auto z = performance_z(two);
  CHECK(z[0] == doctest::Approx(-1.0 / 1.001).epsilon(1e-14));
  CHECK(z[1] == doctest::Approx(1.0 / 1.001).epsilon(1e-14));

  const std::vector<double> same{3, 3, 3, 3};
  for (double v : performance_z(same)) CHECK(v == 0.0);

  const std::vector<double> shifted{12, 14};
  CHECK(performance_z(shifted) == z);
  CHECK_THROWS_AS(performance_z(std::vector<double>{}), DomainError);
}

TEST_CASE("performance_z scaling") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> score(0, 4);
  std::vector<double> s(64), scaled(64);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = score(rng);
    scaled[i] = 3.0 * s[i];
  }
  const auto a0 = performance_z(s, 0.0), b0 = performance_z(scaled, 0.0);
  const auto a = performance_z(s), b = performance_z(scaled);
  const auto m = oracle::moments(s);
  REQUIRE(m.std >= 0.5);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(a0[i] == doctest::Approx(b0[i]).epsilon(1e-12));
    if (a[i] != 0.0) CHECK(std::abs(b[i] / a[i] - 1.0) < 0.002);
  }
}

TEST_CASE("effort_z reciprocal worked example") {
  const std::vector<double> x{0.5, 1.0};
  const auto z = effort_z(x, EffortMode::Reciprocal);
  CHECK(std::abs(z[0] - 0.1666) < 1e-3);
  CHECK(std::abs(z[1] + 0.0833) < 1e-3);
  CHECK(z[0] == doctest::Approx((2.0 - 4.0 / 3.0) / 4.001).epsilon(1e-14));
  CHECK(z[1] == doctest::Approx((1.0 - 4.0 / 3.0) / 4.001).epsilon(1e-14));
}

TEST_CASE("effort_z degenerate groups") {
  const std::vector<double> same{0.2, 0.2, 0.2};
  for (auto mode : {EffortMode::Reciprocal, EffortMode::Negation}) {
    for (double v : effort_z(same, mode)) CHECK(v == 0.0);
  }
  const std::vector<double> centred{-0.5, 0.5};
  CHECK(error_of([&] { effort_z(centred, EffortMode::Reciprocal); }).find("negation") != std::string::npos);
  const auto neg = effort_z(centred, EffortMode::Negation);
  CHECK(neg[0] > neg[1]);

  // Values under the floor are clamped with their sign kept.
  const std::vector<double> tiny{0.0, 1e-9, 1.0};
  const std::vector<double> floored{1e-6, 1e-6, 1.0};
  CHECK(effort_z(tiny, EffortMode::Reciprocal) == effort_z(floored, EffortMode::Reciprocal));
}

TEST_CASE("negation mode is strictly decreasing") {
  std::mt19937_64 rng(12);
  auto x = oracle::random_series(rng, 40, 1.0);
  std::sort(x.begin(), x.end());
  const auto z = effort_z(x, EffortMode::Negation);
  for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] < z[i - 1]);
}

TEST_CASE("rne_rni rotation") {
  const auto d = rne_rni(0.7, 0.7);
  CHECK(d.rne == 0.0);
  CHECK(d.rni == doctest::Approx(0.7 * std::numbers::sqrt2).epsilon(1e-15));
  const auto a = rne_rni(1.0, -1.0);
  CHECK(a.rne == doctest::Approx(std::numbers::sqrt2).epsilon(1e-15));
  CHECK(a.rni == 0.0);

  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const double p = n(rng), c = n(rng);
    const auto r = rne_rni(p, c);
    CHECK(std::abs(r.rne * r.rne + r.rni * r.rni - (p * p + c * c)) < 1e-9);
    CHECK(std::abs((r.rni + r.rne) / std::numbers::sqrt2 - p) < 1e-12);
    CHECK(std::abs((r.rni - r.rne) / std::numbers::sqrt2 - c) < 1e-12);
    const State expect = (p - c > 0) ? ((p + c > 0) ? State::HE_HI : State::HE_LI)
                                     : ((p + c > 0) ? State::LE_HI : State::LE_LI);
    CHECK(classify_state(r.rne, r.rni) == expect);
  }
}

TEST_CASE("classify_state") {
  CHECK(classify_state(0.5, 0.5) == State::HE_HI);
  CHECK(classify_state(-0.1, 0.9) == State::LE_HI);
  CHECK(classify_state(0.3, -0.2) == State::HE_LI);
  CHECK(classify_state(0.0, 0.0) == State::LE_LI);
  for (auto s : {State::HE_HI, State::HE_LI, State::LE_HI, State::LE_LI}) CHECK(parse_state(to_string(s)) == s);
  CHECK_THROWS_AS(parse_state("XX"), DataError);
}

TEST_CASE("compare") {
  const auto a = twelve();
  const auto same = compare(a, a);
  CHECK(same.mae_rne == 0.0);
  CHECK(same.mae_rni == 0.0);
  CHECK(same.pearson_rne == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(same.quadrant_matches == 12);
  CHECK(same.quadrant_total == 12);

  auto shifted = a;
  for (auto& p : shifted) p.rne += 0.1;
  const auto sh = compare(a, shifted);
  CHECK(sh.mae_rne == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(sh.mae_rni == 0.0);
  CHECK(sh.pearson_rne == doctest::Approx(1.0).epsilon(1e-12));

  auto three_off = a;
  for (int i : {1, 6, 11}) {
    auto& p = three_off[i];
    p.rni = -p.rni;
    p.state = classify_state(p.rne, p.rni);
  }
  const auto r = compare(a, three_off);
  CHECK(r.quadrant_matches == 9);
  CHECK(r.quadrant_total == 12);
  CHECK(format_agreement_text(r).find("Quadrant agreement 9 / 12") != std::string::npos);

  const auto back = compare(three_off, a);
  CHECK(back.mae_rne == r.mae_rne);
  CHECK(back.mae_rni == r.mae_rni);

  auto missing = a;
  missing.pop_back();
  CHECK(error_of([&] { compare(a, missing); }).find("P03") != std::string::npos);
}

TEST_CASE("pearson") {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 9}, c{5, 5, 5, 5};
  CHECK(pearson(x, y) == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
  CHECK(pearson(c, c) == 1.0);
  CHECK(pearson(x, c) == 0.0);
}

TEST_CASE("summarize_segments") {
  const Dataset d = fixture::grid(16);
  const auto labels = actual_labels(d);
  const auto s = summarize_segments(d, labels);
  REQUIRE(s.size() == 64);
  CHECK(s[0].participant_id == "P01");
  CHECK(s[0].segment == 1);
  // Labels (p+q)%2 alternate, so every segment scores 2.
  for (const auto& x : s) CHECK(x.score == 2);

  auto custom = labels;
  custom[{"P01", 1}] = 1;
  custom[{"P01", 2}] = 1;
  custom[{"P01", 3}] = 0;
  custom[{"P01", 4}] = 1;
  CHECK(summarize_segments(d, custom)[0].score == 3);

  std::vector<TrialRecord> zeros;
  for (int q = 1; q <= 16; ++q) zeros.push_back(fixture::trial("P01", q, 1));
  for (auto& t : zeros) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      for (auto& v : t.hbo.channel(c)) v = 0.0;
    }
  }
  const Dataset zd(zeros);
  const auto zs = summarize_segments(zd, actual_labels(zd));
  REQUIRE(zs.size() == 4);
  for (const auto& x : zs) CHECK(x.mean_hbo == 0.0);

  auto gap = zeros;
  gap.erase(gap.begin() + 2);
  const Dataset gd(gap);
  CHECK(error_of([&] { summarize_segments(gd, actual_labels(gd)); }).find("missing question_order 3") !=
        std::string::npos);

  auto unlabeled = actual_labels(zd);
  unlabeled.erase({"P01", 4});
  CHECK_THROWS_AS(summarize_segments(zd, unlabeled), DataError);
}

TEST_CASE("mean_hbo skips masked channels") {
  std::vector<TrialRecord> trials;
  for (int q = 1; q <= 16; ++q) {
    auto t = fixture::trial("P01", q, 1);
    for (std::size_t c = 0; c < kChannels; ++c) {
      for (auto& v : t.hbo.channel(c)) v = c == 0 ? 1000.0 : 2.0;
    }
    t.channel_mask[0] = false;
    trials.push_back(t);
  }
  const Dataset d(trials);
  CHECK(summarize_segments(d, actual_labels(d))[0].mean_hbo == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("compute_effort") {
  std::vector<SegmentSummary> s;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (int p = 1; p <= 4; ++p) {
    for (int seg = 1; seg <= 4; ++seg) s.push_back({"P0" + std::to_string(p), seg, (p + seg) % 5, u(rng)});
  }
  const auto pts = compute_effort(s);
  REQUIRE(pts.size() == s.size());
  std::vector<double> scores, hbo;
  for (const auto& x : s) {
    scores.push_back(x.score);
    hbo.push_back(x.mean_hbo);
  }
  const auto pz = performance_z(scores);
  const auto cz = effort_z(hbo, EffortMode::Reciprocal);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].p_z == pz[i]);
    CHECK(pts[i].ce_z == cz[i]);
    CHECK(std::abs(pts[i].rne - (pz[i] - cz[i]) / std::numbers::sqrt2) < 1e-12);
    CHECK(std::abs(pts[i].rni - (pz[i] + cz[i]) / std::numbers::sqrt2) < 1e-12);
    CHECK(pts[i].state == classify_state(pts[i].rne, pts[i].rni));
  }

  EffortOptions per;
  per.grouping = Grouping::PerSegment;
  const auto seg = compute_effort(s, per);
  std::vector<double> seg1_scores, seg1_hbo;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].segment != 1) continue;
    idx.push_back(i);
    seg1_scores.push_back(s[i].score);
    seg1_hbo.push_back(s[i].mean_hbo);
  }
  const auto pz1 = performance_z(seg1_scores);
  const auto cz1 = effort_z(seg1_hbo, EffortMode::Reciprocal);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    CHECK(seg[idx[j]].p_z == pz1[j]);
    CHECK(seg[idx[j]].ce_z == cz1[j]);
  }
}

TEST_CASE("effort CSV round trip") {
  auto pts = twelve();
  pts[2].p_z = 0.1234567890123;
  pts[2].mean_hbo = -3.5e-7;
  const auto text = format_effort(pts);
  CHECK(text.rfind("participant_id,segment,score,mean_hbo,p_z,ce_z,rne,rni,state\n", 0) == 0);
  const auto back = parse_effort(text, "mem");
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(back[i].participant_id == pts[i].participant_id);
    CHECK(back[i].p_z == pts[i].p_z);
    CHECK(back[i].mean_hbo == pts[i].mean_hbo);
    CHECK(back[i].rne == pts[i].rne);
    CHECK(back[i].state == pts[i].state);
  }
  CHECK(parse_effort_mode("negation") == EffortMode::Negation);
  CHECK(parse_grouping("segment") == Grouping::PerSegment);
  CHECK_THROWS_AS(parse_effort_mode("other"), DomainError);
}
