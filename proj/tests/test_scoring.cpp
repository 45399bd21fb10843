#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "avdiar/rng.hpp"
#include "avdiar/scoring.hpp"
#include "avdiar/types.hpp"
#include "doctest.h"

using namespace avdiar;
namespace fs = std::filesystem;

namespace {

Diarization dia(const std::string& file_id,
                const std::vector<std::pair<TimeInterval, std::string>>& segs) {
  Diarization d;
  d.file_id = file_id;
  d.segments = segs;
  return d;
}

TimeInterval iv(double onset, double offset) { return TimeInterval{onset, offset}; }

double quantize_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

// Random ms-grid diarization with `n_speakers` tracks of short turns.
Diarization random_dia(Rng& rng, const std::string& file_id, int n_speakers,
                       double horizon) {
  Diarization d;
  d.file_id = file_id;
  for (int s = 0; s < n_speakers; ++s) {
    const int turns = rng.uniform_int(1, 3);
    double t = quantize_ms(rng.uniform(0.0, horizon * 0.3));
    for (int k = 0; k < turns; ++k) {
      const double dur = quantize_ms(rng.uniform(0.4, 2.5));
      const double onset = std::min(t, horizon - dur - 0.001);
      d.segments.emplace_back(iv(quantize_ms(onset), quantize_ms(onset + dur)),
                              "spk" + std::to_string(s));
      t = quantize_ms(onset + dur + rng.uniform(0.1, 2.0));
    }
  }
  return d;
}

void check_close(const DerBreakdown& a, const DerBreakdown& b) {
  CHECK(std::abs(a.scored_speech - b.scored_speech) < 1e-9);
  CHECK(std::abs(a.missed - b.missed) < 1e-9);
  CHECK(std::abs(a.false_alarm - b.false_alarm) < 1e-9);
  CHECK(std::abs(a.confusion - b.confusion) < 1e-9);
  CHECK(std::abs(a.missed_pct - b.missed_pct) < 1e-9);
  CHECK(std::abs(a.false_alarm_pct - b.false_alarm_pct) < 1e-9);
  CHECK(std::abs(a.confusion_pct - b.confusion_pct) < 1e-9);
  CHECK(std::abs(a.der_pct - b.der_pct) < 1e-9);
}

}  // namespace

TEST_CASE("perfect hypothesis scores zero error") {
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}, {iv(3.0, 5.0), "B"}});
  auto hyp = dia("v0", {{iv(0.0, 2.0), "x"}, {iv(3.0, 5.0), "y"}});
  auto der = compute_der(ref, hyp, 0.25);
  CHECK(der.missed == 0.0);
  CHECK(der.false_alarm == 0.0);
  CHECK(der.confusion == 0.0);
  CHECK(der.der_pct == 0.0);
  CHECK(der.scored_speech == 3.0);  // 0.5 s collar around each boundary
  REQUIRE(der.mapping.size() == 2);
  CHECK(der.mapping[0] == std::pair<std::string, std::string>("x", "A"));
  CHECK(der.mapping[1] == std::pair<std::string, std::string>("y", "B"));
}

TEST_CASE("one hypothesis speaker across two reference speakers") {
  // X overlaps A and B equally (2 s each); the tie maps X to A, so B's
  // scored time is confusion. Scored regions: [0.25,1.75] and [2.25,3.75].
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}, {iv(2.0, 4.0), "B"}});
  auto hyp = dia("v0", {{iv(0.0, 4.0), "X"}});
  auto der = compute_der(ref, hyp, 0.25);
  CHECK(der.scored_speech == 3.0);
  CHECK(der.missed == 0.0);
  CHECK(der.false_alarm == 0.0);
  CHECK(der.confusion == 1.5);
  CHECK(der.der_pct == 50.0);
  REQUIRE(der.mapping.size() == 1);
  CHECK(der.mapping[0] == std::pair<std::string, std::string>("X", "A"));
}

TEST_CASE("trailing hypothesis speech is false alarm") {
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}});
  auto hyp = dia("v0", {{iv(0.0, 3.0), "A"}});
  auto der = compute_der(ref, hyp, 0.25);
  CHECK(der.scored_speech == 1.5);
  CHECK(der.false_alarm == 0.75);  // [2.25, 3.0]
  CHECK(der.missed == 0.0);
  CHECK(der.confusion == 0.0);
  CHECK(der.false_alarm_pct == 50.0);
  CHECK(der.der_pct == 50.0);
}

TEST_CASE("collar zero accounts every millisecond") {
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}});
  SUBCASE("exact match") {
    auto der = compute_der(ref, ref, 0.0);
    CHECK(der.scored_speech == 2.0);
    CHECK(der.der_pct == 0.0);
  }
  SUBCASE("late onset is missed speech") {
    auto hyp = dia("v0", {{iv(0.5, 2.0), "A"}});
    auto der = compute_der(ref, hyp, 0.0);
    CHECK(der.scored_speech == 2.0);
    CHECK(der.missed == 0.5);
    CHECK(der.missed_pct == 25.0);
    CHECK(der.der_pct == 25.0);
  }
}

TEST_CASE("speaker mapping maximizes total overlap") {
  // Overlaps: 1-A = 3, 2-A = 1, 2-B = 2. Best total 5 via {1->A, 2->B};
  // mapping 2->A instead would reach only 1 + 3 = 4.
  auto ref = dia("v0", {{iv(0.0, 4.0), "A"}, {iv(5.0, 7.0), "B"}});
  auto hyp = dia("v0", {{iv(0.0, 3.0), "1"},
                        {iv(3.0, 4.0), "2"},
                        {iv(5.0, 7.0), "2"}});
  auto mapping = map_speakers(ref, hyp);
  REQUIRE(mapping.size() == 2);
  CHECK(mapping[0] == std::pair<std::string, std::string>("1", "A"));
  CHECK(mapping[1] == std::pair<std::string, std::string>("2", "B"));
}

TEST_CASE("mapping skips locally bigger edge that ruins the total") {
  // 1 overlaps A = 2 and B = 3, 2 overlaps only B = 3. Taking 1->B (the
  // bigger edge) would strand 2; the optimum is 1->A, 2->B.
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}, {iv(2.0, 8.0), "B"}});
  auto hyp = dia("v0", {{iv(0.0, 5.0), "1"}, {iv(5.0, 8.0), "2"}});
  auto mapping = map_speakers(ref, hyp);
  REQUIRE(mapping.size() == 2);
  CHECK(mapping[0] == std::pair<std::string, std::string>("1", "A"));
  CHECK(mapping[1] == std::pair<std::string, std::string>("2", "B"));
}

TEST_CASE("hypothesis speaker without any overlap stays unmapped") {
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}});
  auto hyp = dia("v0", {{iv(0.0, 2.0), "good"}, {iv(10.0, 11.0), "ghost"}});
  auto mapping = map_speakers(ref, hyp);
  REQUIRE(mapping.size() == 1);
  CHECK(mapping[0] == std::pair<std::string, std::string>("good", "A"));

  auto der = compute_der(ref, hyp, 0.0);
  CHECK(der.scored_speech == 2.0);
  CHECK(der.false_alarm == 1.0);
  CHECK(der.false_alarm_pct == 50.0);
}

TEST_CASE("overlap regions can be excluded from scoring") {
  auto ref = dia("v0", {{iv(0.0, 4.0), "A"}, {iv(2.0, 6.0), "B"}});
  auto hyp = dia("v0", {{iv(0.0, 2.0), "X"}});
  SUBCASE("overlap scored") {
    auto der = compute_der(ref, hyp, 0.0, true);
    CHECK(der.scored_speech == 8.0);  // 2 + 2*2 + 2
    CHECK(der.missed == 6.0);         // both in [2,4], B in [4,6]
    CHECK(der.der_pct == 75.0);
  }
  SUBCASE("overlap excluded") {
    auto der = compute_der(ref, hyp, 0.0, false);
    CHECK(der.scored_speech == 4.0);  // [0,2] and [4,6]
    CHECK(der.missed == 2.0);         // B alone in [4,6]
    CHECK(der.der_pct == 50.0);
  }
}

TEST_CASE("renaming hypothesis speakers does not change the score") {
  Rng rng(mix_seed(2026, hash_string("scoring.rename")));
  auto ref = random_dia(rng, "v0", 3, 15.0);
  auto hyp = random_dia(rng, "v0", 3, 15.0);
  auto der = compute_der(ref, hyp, 0.25);

  Diarization renamed = hyp;
  for (auto& [interval, speaker] : renamed.segments) speaker = "zz_" + speaker;
  auto der2 = compute_der(ref, renamed, 0.25);
  check_close(der, der2);
}

TEST_CASE("unnormalized input scores the same as its normalized form") {
  // Duplicate and overlapping same-speaker turns must not change anything.
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}, {iv(4.0, 6.0), "B"}});
  auto hyp = dia("v0", {{iv(0.0, 1.5), "A"},
                        {iv(1.0, 2.0), "A"},
                        {iv(0.5, 1.0), "A"},
                        {iv(4.0, 6.0), "B"}});
  auto merged = dia("v0", {{iv(0.0, 2.0), "A"}, {iv(4.0, 6.0), "B"}});
  check_close(compute_der(ref, hyp, 0.1), compute_der(ref, merged, 0.1));
}

TEST_CASE("scoring rejects bad inputs") {
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}});
  auto hyp = dia("v0", {{iv(0.0, 2.0), "A"}});
  SUBCASE("mismatched files") {
    auto other = dia("v1", {{iv(0.0, 2.0), "A"}});
    CHECK_THROWS_AS(compute_der(ref, other, 0.25), Error);
  }
  SUBCASE("empty reference") {
    CHECK_THROWS_AS(compute_der(Diarization{}, hyp, 0.25), Error);
  }
  SUBCASE("reference fully swallowed by the collar") {
    auto tiny = dia("v0", {{iv(0.0, 0.3), "A"}});
    CHECK_THROWS_AS(compute_der(tiny, hyp, 0.25), Error);
  }
  SUBCASE("negative collar") {
    CHECK_THROWS_AS(compute_der(ref, hyp, -0.1), Error);
  }
  SUBCASE("brute force speaker limit") {
    Diarization many;
    many.file_id = "v0";
    for (int s = 0; s < 9; ++s) {
      many.segments.emplace_back(iv(s, s + 0.5), "s" + std::to_string(s));
    }
    CHECK_THROWS_AS(brute_force_der(many, many, 0.0), Error);
  }
  SUBCASE("brute force duration limit") {
    auto longref = dia("v0", {{iv(0.0, 601.0), "A"}});
    CHECK_THROWS_AS(brute_force_der(longref, longref, 0.0), Error);
  }
}

TEST_CASE("region scoring agrees with millisecond enumeration") {
  // Differential check of the production scorer against the exhaustive
  // tick-walking one on random millisecond-grid diarizations.
  for (int trial = 0; trial < 40; ++trial) {
    CAPTURE(trial);
    Rng rng(mix_seed(mix_seed(77, trial), hash_string("scoring.diff")));
    const int ref_speakers = rng.uniform_int(1, 4);
    const int hyp_speakers = rng.uniform_int(1, 4);
    auto ref = random_dia(rng, "v0", ref_speakers, 20.0);
    auto hyp = random_dia(rng, "v0", hyp_speakers, 20.0);
    const double collar = (trial % 3 == 0) ? 0.0 : 0.25;
    const bool score_overlap = trial % 4 != 1;

    DerBreakdown fast;
    DerBreakdown slow;
    bool fast_threw = false;
    bool slow_threw = false;
    try {
      fast = compute_der(ref, hyp, collar, score_overlap);
    } catch (const Error&) {
      fast_threw = true;
    }
    try {
      slow = brute_force_der(ref, hyp, collar, score_overlap);
    } catch (const Error&) {
      slow_threw = true;
    }
    REQUIRE(fast_threw == slow_threw);
    if (fast_threw) continue;
    check_close(fast, slow);
    CHECK(fast.mapping == slow.mapping);
  }
}

TEST_CASE("aggregate pools files weighted by scored speech") {
  DerBreakdown a;
  a.file_id = "v0";
  a.scored_speech = 10.0;
  a.missed = 1.0;
  a.false_alarm = 0.5;
  a.confusion = 0.5;
  DerBreakdown b;
  b.file_id = "v1";
  b.scored_speech = 30.0;
  b.missed = 0.0;
  b.false_alarm = 1.5;
  b.confusion = 3.0;
  auto total = aggregate_der({a, b});
  CHECK(total.file_id == "TOTAL");
  CHECK(total.scored_speech == 40.0);
  CHECK(total.missed == 1.0);
  CHECK(total.false_alarm == 2.0);
  CHECK(total.confusion == 3.5);
  CHECK(total.missed_pct == 2.5);
  CHECK(total.false_alarm_pct == 5.0);
  CHECK(total.confusion_pct == 8.75);
  CHECK(total.der_pct == 16.25);

  CHECK_THROWS_AS(aggregate_der({}), Error);
}

TEST_CASE("report and CSV list every file plus the total") {
  auto ref = dia("v0", {{iv(0.0, 2.0), "A"}});
  auto hyp = dia("v0", {{iv(0.0, 3.0), "A"}});
  auto der = compute_der(ref, hyp, 0.25);
  auto total = aggregate_der({der});

  auto report = format_der_report({der}, total);
  CHECK(report.find("file") != std::string::npos);
  CHECK(report.find("v0") != std::string::npos);
  CHECK(report.find("TOTAL") != std::string::npos);
  CHECK(report.find("50.00") != std::string::npos);

  auto path = (fs::temp_directory_path() / "avdiar_score_test.csv").string();
  write_der_csv(path, {der}, total);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "file,scored_speech_s,missed_pct,false_alarm_pct,confusion_pct,der_pct");
  REQUIRE(std::getline(in, line));
  CHECK(line == "v0,1.500,0.000000,50.000000,0.000000,50.000000");
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("TOTAL,", 0) == 0);
  CHECK_FALSE(std::getline(in, line));
  fs::remove(path);
}
