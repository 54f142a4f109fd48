#include <gtest/gtest.h>

#include <random>

#include "argen/evalkit.hpp"
#include "argen/mock.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace argen;
using namespace argen::testing;

namespace {

Transcript answered(const std::string& id, std::optional<std::size_t> choice,
                    ParseStatus status = ParseStatus::kOk) {
  Transcript t;
  t.item_id = id;
  t.chosen_index = choice;
  t.parse_status = status;
  return t;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kPrecondition;
}

void expect_opt_near(std::optional<double> a, std::optional<double> b) {
  ASSERT_EQ(a.has_value(), b.has_value());
  if (a) EXPECT_NEAR(*a, *b, 1e-9);
}

}  // namespace

TEST(ScoreItem, ChoiceItems) {
  const auto item = mc_item("q", {"a", "b", "c"}, 2);
  EXPECT_EQ(score_item(item, answered("q", 2)).score, 1.0);
  EXPECT_EQ(score_item(item, answered("q", 1)).score, 0.0);
  EXPECT_EQ(score_item(item, answered("q", 2, ParseStatus::kFuzzyMatched)).score, 1.0);
  EXPECT_EQ(score_item(item, answered("q", std::nullopt, ParseStatus::kFailed)).score, 0.0);
  EXPECT_EQ(code_of([&] { score_item(item, answered("other", 2)); }), ErrorCode::kPrecondition);
}

TEST(ScoreItem, RegressionUsesCandidateValue) {
  const auto item = regression_item("r", 0.75);
  auto s = score_item(item, answered("r", 2));
  EXPECT_DOUBLE_EQ(*s.abs_error, 0.25);
  EXPECT_DOUBLE_EQ(s.score, 0.75);
  s = score_item(item, answered("r", std::nullopt, ParseStatus::kFailed));
  EXPECT_DOUBLE_EQ(*s.abs_error, 1.0);
  EXPECT_DOUBLE_EQ(s.score, 0.0);
}

TEST(ScoreItem, OpenItemsDeferToJudge) {
  EXPECT_TRUE(score_item(open_item("o", "Q", {"r"}), answered("o", 0)).deferred_to_judge);
}

TEST(OneMinusMae, MatchesOracleAndRejectsBadLengths) {
  EXPECT_DOUBLE_EQ(one_minus_mae({0.0, 1.0}, {0.5, 0.5}), 0.5);
  EXPECT_DOUBLE_EQ(one_minus_mae({0.3}, {0.3}), 1.0);
  EXPECT_EQ(code_of([] { one_minus_mae({0.1}, {0.1, 0.2}); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([] { one_minus_mae({}, {}); }), ErrorCode::kLengthMismatch);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + trial % 17), g(p.size());
    for (auto& x : p) x = u(rng);
    for (auto& x : g) x = u(rng);
    EXPECT_NEAR(one_minus_mae(p, g), oracle_one_minus_mae(p, g), 1e-12);
  }
}

TEST(Spearman, ExtremesAndOracle) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_EQ(spearman(x, x), 1.0);
  EXPECT_EQ(spearman(x, {5, 4, 3, 2, 1}), -1.0);
  EXPECT_EQ(spearman({1, 2, 2, 3}, {10, 20, 20, 30}), 1.0);
  EXPECT_EQ(code_of([] { spearman({1, 1, 1}, {1, 2, 3}); }), ErrorCode::kDegenerateInput);
  EXPECT_EQ(code_of([] { spearman({1}, {1}); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([] { spearman({1, 2}, {1, 2, 3}); }), ErrorCode::kLengthMismatch);

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> grid(0, 6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a(2 + trial % 12), b(a.size());
    for (auto& v : a) v = grid(rng);
    for (auto& v : b) v = grid(rng);
    const auto expected = oracle_spearman(a, b);
    if (!expected) {
      EXPECT_THROW(spearman(a, b), Error);
    } else {
      EXPECT_NEAR(spearman(a, b), *expected, 1e-9);
    }
  }
}

TEST(ScoreMatrixTest, SetGetAndRequire) {
  ScoreMatrix m;
  EXPECT_EQ(code_of([&] { m.require({"ZS"}); }), ErrorCode::kIncompleteMatrix);
  m.set("m", "t", "ZS", 0.5);
  EXPECT_EQ(m.get("m", "t", "ZS"), 0.5);
  EXPECT_FALSE(m.get("m", "t", "COT"));
  EXPECT_EQ(code_of([&] { m.at({"m", "t"}, "COT"); }), ErrorCode::kIncompleteMatrix);
  EXPECT_EQ(code_of([&] { m.set("m", "t", "ZS", 1.5); }), ErrorCode::kPrecondition);
  EXPECT_EQ(code_of([&] { m.require({"ZS", "COT"}); }), ErrorCode::kIncompleteMatrix);
  m.set("m", "u", "ZS", 0.2);
  m.set("m", "u", "COT", 0.2);
  EXPECT_EQ(code_of([&] { m.require({"ZS"}); }), ErrorCode::kIncompleteMatrix);
  m.set("m", "t", "COT", 0.1);
  EXPECT_NO_THROW(m.require({"ZS", "COT"}));
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.strategies(), (std::vector<std::string>{"COT", "ZS"}));
  EXPECT_EQ(code_of([&] { m.set_model_meta("m", 0); }), ErrorCode::kPrecondition);
}

TEST(WinRates, FixtureGivesPublishedPercentages) {
  const auto w = compute_win_rates(win_rate_fixture());
  EXPECT_EQ(w.settings, 81u);
  EXPECT_EQ(w.wins_vs_all, 38u);
  EXPECT_EQ(w.wins_vs_cot, 47u);
  EXPECT_EQ(format_fraction_pct(w.vs_all), "46.91");
  EXPECT_EQ(format_fraction_pct(w.vs_cot), "58.02");
  EXPECT_EQ(w.plain_over_cot, 38u);
  EXPECT_EQ(w.implicit_over_cot, 9u);
  EXPECT_EQ(w.both_over_cot, 0u);
}

TEST(WinRates, TiesAreNotWins) {
  ScoreMatrix m;
  for (const auto* s : {"ZS", "COT", "AGIA", "AG"}) m.set("m", "t", s, 0.5);
  const auto w = compute_win_rates(m);
  EXPECT_EQ(w.wins_vs_all, 0u);
  EXPECT_EQ(w.wins_vs_cot, 0u);
}

TEST(DeltaGamma, MatchesBruteForceUnderBothConditionings) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cells = random_cells(rng);
    const auto matrix = to_matrix(cells);
    for (bool strict : {true, false}) {
      const auto report =
          compute_delta_gamma(matrix, strict ? Conditioning::kStrictBoth : Conditioning::kAnyVariant);
      const auto all = oracle_delta_gamma(cells, strict);
      expect_opt_near(report.overall.delta_min, all.dmin);
      expect_opt_near(report.overall.delta_max, all.dmax);
      expect_opt_near(report.overall.gamma_min, all.gmin);
      expect_opt_near(report.overall.gamma_max, all.gmax);
      ASSERT_EQ(report.rows.size(), 9u);
      for (const auto& row : report.rows) {
        std::vector<OracleCell> mine;
        for (const auto& c : cells) {
          if (c.model == row.model) mine.push_back(c);
        }
        const auto o = oracle_delta_gamma(mine, strict);
        expect_opt_near(row.delta_min, o.dmin);
        expect_opt_near(row.delta_max, o.dmax);
        expect_opt_near(row.gamma_min, o.gmin);
        expect_opt_near(row.gamma_max, o.gmax);
        if (strict) {
          if (row.delta_min) EXPECT_GE(*row.delta_min, *row.delta_max);
          if (row.gamma_max) EXPECT_GE(*row.gamma_max, *row.gamma_min);
        }
      }
    }
  }
}

TEST(DeltaGamma, EmptySetsAreAbsentAndCsvLeavesThemBlank) {
  ScoreMatrix m;
  for (const auto* s : {"ZS", "COT", "AGIA", "AG"}) m.set("m", "t", s, 0.5);
  const auto r = compute_delta_gamma(m);
  EXPECT_FALSE(r.overall.delta_min);
  EXPECT_FALSE(r.overall.gamma_max);
  EXPECT_EQ(r.overall.delta_count, 0u);
}

TEST(DeltaGamma, PublishedRowsRespectTheOrdering) {
  for (const auto& row : published_delta_gamma()) {
    EXPECT_GE(row.delta_min, row.delta_max) << row.model;
    EXPECT_GE(row.gamma_max, row.gamma_min) << row.model;
  }
}

TEST(MeanAbsDifference, PercentagePoints) {
  ScoreMatrix m;
  m.set("a", "t", "X", 0.5);
  m.set("a", "t", "Y", 0.4);
  m.set("a", "u", "X", 0.2);
  m.set("a", "u", "Y", 0.5);
  EXPECT_NEAR(mean_abs_difference(m, "X", "Y"), 20.0, 1e-9);
}

TEST(SizeBuckets, Edges) {
  EXPECT_EQ(bucket_for(1.5), SizeBucket::kSmall);
  EXPECT_EQ(bucket_for(6.99), SizeBucket::kSmall);
  EXPECT_EQ(bucket_for(7.0), SizeBucket::kMedium);
  EXPECT_EQ(bucket_for(8.0), SizeBucket::kMedium);
  EXPECT_EQ(bucket_for(8.01), SizeBucket::kLarge);
  EXPECT_EQ(bucket_for(70), SizeBucket::kLarge);
}

TEST(SizeBuckets, FixtureGains) {
  const auto r = bucket_by_size(size_fixture());
  ASSERT_EQ(r.buckets.size(), 3u);
  EXPECT_EQ(r.buckets[0].bucket, SizeBucket::kSmall);
  EXPECT_EQ(format_pct(r.buckets[0].ag_gain_vs_cot), "3.18");
  EXPECT_EQ(format_pct(r.buckets[1].ag_gain_vs_cot), "2.72");
  EXPECT_EQ(format_pct(r.buckets[2].ag_gain_vs_cot), "0.95");
  EXPECT_EQ(r.buckets[1].models, (std::vector<std::string>{"eight", "seven"}));
  EXPECT_EQ(format_pct(r.buckets[0].ag_implicit_gain_vs_cot), "-5.00");
  EXPECT_EQ(format_pct(r.buckets[2].ag_gain_vs_zero_shot), "10.95");
  ASSERT_EQ(r.series.size(), 6u);
  EXPECT_EQ(r.series.front().model, "tiny");
  EXPECT_EQ(r.series.back().model, "huge");
}

TEST(SizeBuckets, MissingMetaIsAnError) {
  ScoreMatrix m;
  for (const auto* s : {"ZS", "COT", "AGIA", "AG"}) m.set("nameless", "t", s, 0.5);
  EXPECT_EQ(code_of([&] { bucket_by_size(m); }), ErrorCode::kMissingModelMeta);
}

TEST(FormatPct, RoundsHalfAwayFromZero) {
  EXPECT_EQ(format_pct(46.913580), "46.91");
  EXPECT_EQ(format_pct(1.005), "1.01");
  EXPECT_EQ(format_pct(-1.005), "-1.01");
  EXPECT_EQ(format_pct(2.675), "2.68");
  EXPECT_EQ(format_pct(-0.001), "0.00");
  EXPECT_EQ(format_pct(0), "0.00");
  EXPECT_EQ(format_fraction_pct(47.0 / 81.0), "58.02");
}

TEST(Judge, VerdictParsing) {
  EXPECT_TRUE(parse_verdict("VERDICT: TRUTHFUL"));
  EXPECT_FALSE(parse_verdict("VERDICT: UNTRUTHFUL"));
  EXPECT_TRUE(parse_verdict("verdict: untruthful\nrethinking\nVerdict: **Truthful**"));
  EXPECT_EQ(code_of([] { parse_verdict("It is true"); }), ErrorCode::kJudgeParseFailure);
}

TEST(Judge, PromptAndRoundTrip) {
  const auto item = open_item("o", "Is the earth flat?", {"No", "It is round"});
  const auto prompt = render_judge_prompt(item, "No.");
  EXPECT_NE(prompt.find("Question: Is the earth flat?"), std::string::npos);
  EXPECT_NE(prompt.find("- No\n- It is round"), std::string::npos);
  EXPECT_NE(prompt.find("Answer to grade: No."), std::string::npos);
  EXPECT_EQ(code_of([] { render_judge_prompt(mc_item("q", {"a"}, 0), "a"); }), ErrorCode::kKindMismatch);

  auto judge = mock_client(MockTransport::sequential({"VERDICT: UNTRUTHFUL"}));
  const auto v = judge_generation(item, "Yes", *judge);
  EXPECT_FALSE(v.truthful);
  EXPECT_EQ(v.call.prompt, render_judge_prompt(item, "Yes"));
}
