#include <gtest/gtest.h>

#include "argen/core.hpp"
#include "argen/serialize.hpp"
#include "test_support.hpp"

using namespace argen;
using argen::testing::mc_item;

namespace {

void expect_invalid(const TaskItem& item, const std::string& fragment) {
  try {
    validate_item(item);
    FAIL() << "expected InvalidItem containing '" << fragment << "'";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidItem);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Labels, RoundTrip) {
  EXPECT_EQ(label_for(0), "A");
  EXPECT_EQ(label_for(25), "Z");
  EXPECT_EQ(index_for_label('C'), 2u);
  EXPECT_EQ(index_for_label('c'), 2u);
  EXPECT_FALSE(index_for_label('?').has_value());
  for (std::size_t i = 0; i < kMaxCandidates; ++i) EXPECT_EQ(index_for_label(label_for(i)[0]), i);
}

TEST(Strategy, ParsesShortAndLongForms) {
  EXPECT_EQ(parse_strategy("ZS"), (StrategyKind{StrategyVariant::kZeroShot, ExecutionMode::kComposite}));
  EXPECT_EQ(parse_strategy("chain-of-thought"), (StrategyKind{StrategyVariant::kChainOfThought}));
  EXPECT_EQ(parse_strategy("AGIA-2C"), (StrategyKind{StrategyVariant::kArgGenImplicit, ExecutionMode::kTwoCall}));
  EXPECT_EQ(parse_strategy("arg-gen:two-call"), (StrategyKind{StrategyVariant::kArgGen, ExecutionMode::kTwoCall}));
  EXPECT_EQ(parse_strategy("ag:composite"), (StrategyKind{StrategyVariant::kArgGen, ExecutionMode::kComposite}));
  EXPECT_THROW(parse_strategy("self-consistency"), Error);
}

TEST(Strategy, LabelsAreStable) {
  EXPECT_EQ((StrategyKind{StrategyVariant::kZeroShot}).label(), "ZS");
  EXPECT_EQ((StrategyKind{StrategyVariant::kChainOfThought}).label(), "COT");
  EXPECT_EQ((StrategyKind{StrategyVariant::kArgGenImplicit}).label(), "AGIA");
  EXPECT_EQ((StrategyKind{StrategyVariant::kArgGen}).label(), "AG");
  EXPECT_EQ((StrategyKind{StrategyVariant::kArgGenImplicit, ExecutionMode::kTwoCall}).label(), "AGIA-2C");
  EXPECT_EQ((StrategyKind{StrategyVariant::kArgGen, ExecutionMode::kTwoCall}).label(), "AG-2C");
  for (const char* s : {"ZS", "COT", "AGIA", "AG", "AGIA-2C", "AG-2C"}) EXPECT_EQ(parse_strategy(s).label(), s);
}

TEST(Strategy, BaselinesIgnoreMode) {
  const StrategyKind two_call_cot{StrategyVariant::kChainOfThought, ExecutionMode::kTwoCall};
  EXPECT_EQ(two_call_cot, StrategyKind{StrategyVariant::kChainOfThought});
  EXPECT_EQ(two_call_cot.normalized().mode, ExecutionMode::kComposite);
  EXPECT_EQ(two_call_cot.label(), "COT");
}

TEST(Ranking, PermutationCheck) {
  EXPECT_TRUE((Ranking{{2, 0, 1}}).is_permutation_of(3));
  EXPECT_FALSE((Ranking{{0, 0, 1}}).is_permutation_of(3));
  EXPECT_FALSE((Ranking{{0, 1}}).is_permutation_of(3));
  EXPECT_FALSE((Ranking{{0, 1, 3}}).is_permutation_of(3));
}

TEST(ValidateItem, AcceptsWellFormedItems) {
  EXPECT_NO_THROW(validate_item(mc_item("q", {"a", "b", "c"}, 2)));
  auto binary = mc_item("b", {"yes", "no"}, 1);
  binary.kind = TaskKind::kBinary;
  EXPECT_NO_THROW(validate_item(binary));
  EXPECT_NO_THROW(validate_item(argen::testing::regression_item("r", 0.5)));
  EXPECT_NO_THROW(validate_item(argen::testing::open_item("o", "Why?", {"Because."})));
}

TEST(ValidateItem, RejectsGoldOutOfRange) { expect_invalid(mc_item("q", {"a", "b", "c"}, 3), "gold out of range"); }

TEST(ValidateItem, RejectsScoreOutsideUnitInterval) {
  expect_invalid(argen::testing::regression_item("r", 1.5), "score range");
  expect_invalid(argen::testing::regression_item("r", -0.1), "score range");
}

TEST(ValidateItem, RejectsStructuralProblems) {
  expect_invalid(mc_item("", {"a", "b"}, 0), "empty id");
  expect_invalid(mc_item("q", {"a", "b"}, 0, ""), "empty question");
  expect_invalid(mc_item("q", {"a"}, 0), "at least 2");
  expect_invalid(mc_item("q", {"a", ""}, 0), "empty candidate");
  std::vector<std::string> many(27, "x");
  expect_invalid(mc_item("q", many, 0), "26");

  auto binary = mc_item("b", {"a", "b", "c"}, 0);
  binary.kind = TaskKind::kBinary;
  expect_invalid(binary, "exactly 2");

  auto reg = argen::testing::regression_item("r", 0.5);
  reg.candidates = {"low", "high"};
  expect_invalid(reg, "no numeric value");
  reg.candidate_values = {0.0, 2.0};
  expect_invalid(reg, "outside [0,1]");

  auto open = argen::testing::open_item("o", "Why?", {});
  expect_invalid(open, "no reference answers");
}

TEST(CandidateValue, ParsesTextOrUsesExplicitValues) {
  auto reg = argen::testing::regression_item("r", 0.5);
  EXPECT_DOUBLE_EQ(*candidate_value(reg, 3), 0.75);
  reg.candidates = {"low", "high"};
  reg.candidate_values = {0.1, 0.9};
  EXPECT_DOUBLE_EQ(*candidate_value(reg, 1), 0.9);
  EXPECT_FALSE(candidate_value(reg, 5).has_value());
}

TEST(ErrorCodes, MessagesCarryTheName) {
  Error e(ErrorCode::kCacheMiss, "nothing stored");
  EXPECT_EQ(e.code(), ErrorCode::kCacheMiss);
  EXPECT_EQ(std::string(e.what()), "CacheMiss: nothing stored");
}

TEST(Serialize, TaskItemRoundTrip) {
  auto item = mc_item("q1", {"alpha", "beta"}, 1);
  item.augmented = true;
  item.source_id = "q0";
  const TaskItem back = json(item).get<TaskItem>();
  EXPECT_EQ(back, item);

  const auto reg = argen::testing::regression_item("r", 0.25);
  EXPECT_EQ(json(reg).get<TaskItem>(), reg);
  const auto open = argen::testing::open_item("o", "Why?", {"one", "two"});
  EXPECT_EQ(json(open).get<TaskItem>(), open);
}

TEST(Serialize, AcceptsIntegerIdAndStringReference) {
  const auto item = json::parse(R"({"id": 7, "kind": "open", "question": "Q?", "gold": "ref"})").get<TaskItem>();
  EXPECT_EQ(item.id, "7");
  EXPECT_EQ(std::get<GoldReferences>(item.gold).answers, std::vector<std::string>{"ref"});
}

TEST(Serialize, RejectsBadGold) {
  EXPECT_THROW(json::parse(R"({"id": "a", "kind": "mc", "question": "Q", "candidates": ["x","y"], "gold": -1})")
                   .get<TaskItem>(),
               Error);
  EXPECT_THROW(json::parse(R"({"id": "a", "kind": "mc", "question": "Q", "candidates": ["x","y"]})").get<TaskItem>(),
               Error);
}

TEST(Serialize, TranscriptRoundTrip) {
  Transcript t;
  t.item_id = "q1";
  t.strategy = StrategyKind{StrategyVariant::kArgGen, ExecutionMode::kTwoCall};
  t.calls.push_back(CallRecord{"prompt", "response", 12, 3, 4, true, false});
  t.chosen_index = 2;
  t.parse_status = ParseStatus::kFuzzyMatched;
  t.ranking = Ranking{{2, 0, 1}};
  t.notes = {"a note"};
  t.generated_candidates = {"x", "y", "z"};
  EXPECT_EQ(json(t).get<Transcript>(), t);

  Transcript failed;
  failed.item_id = "q2";
  failed.failure = ErrorCode::kParseFailure;
  EXPECT_EQ(json(failed).get<Transcript>(), failed);
}

TEST(Serialize, DumpLineSurvivesInvalidUtf8) {
  json j{{"text", std::string("bad \xff byte")}};
  EXPECT_NO_THROW(dump_line(j));
  EXPECT_EQ(dump_line(j).find('\n'), std::string::npos);
}
