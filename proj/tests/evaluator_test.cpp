#include <gtest/gtest.h>

#include <vector>

#include "srl/evaluator.hpp"
#include "srl/rng.hpp"

namespace {

using namespace srl;

Frame frame_of(const std::vector<std::string>& labels) {
  Frame f;
  f.gold_labels = labels;
  return f;
}

TEST(Score, PerfectPredictions) {
  std::vector<Frame> gold;
  Predictions pred;
  gold.push_back(frame_of({"A0", "_", "A1", "_", "A2", "A3", "_"}));
  pred.push_back(gold[0].gold_labels);
  gold.push_back(frame_of({"A0", "A1", "AM", "_"}));
  pred.push_back(gold[1].gold_labels);
  const EvalReport r = score(gold, pred);
  EXPECT_EQ(r.correct, 7u);
  EXPECT_DOUBLE_EQ(r.precision(), 100.0);
  EXPECT_DOUBLE_EQ(r.recall(), 100.0);
  EXPECT_DOUBLE_EQ(r.f1(), 100.0);
}

TEST(Score, AllNonroleGivesZeroByConvention) {
  const std::vector<Frame> gold = {frame_of({"A0", "A1", "A2", "_"})};
  const Predictions pred = {{"_", "_", "_", "_"}};
  const EvalReport r = score(gold, pred);
  EXPECT_EQ(r.predicted, 0u);
  EXPECT_EQ(r.gold, 3u);
  EXPECT_DOUBLE_EQ(r.precision(), 0.0);
  EXPECT_DOUBLE_EQ(r.recall(), 0.0);
  EXPECT_DOUBLE_EQ(r.f1(), 0.0);
}

TEST(Score, HandCountedHalf) {
  // gold {A0@2, A1@5}, predicted {A0@2, A1@4}.
  const std::vector<Frame> gold = {
      frame_of({"_", "_", "A0", "_", "_", "A1", "_"})};
  const Predictions pred = {{"_", "_", "A0", "_", "A1", "_", "_"}};
  const EvalReport r = score(gold, pred);
  EXPECT_EQ(r.correct, 1u);
  EXPECT_EQ(r.predicted, 2u);
  EXPECT_EQ(r.gold, 2u);
  EXPECT_DOUBLE_EQ(r.precision(), 50.0);
  EXPECT_DOUBLE_EQ(r.recall(), 50.0);
  EXPECT_DOUBLE_EQ(r.f1(), 50.0);
}

TEST(Score, WrongLabelAtGoldPositionIsNotCorrect) {
  const std::vector<Frame> gold = {frame_of({"A0", "_"})};
  const Predictions pred = {{"A1", "_"}};
  const EvalReport r = score(gold, pred);
  EXPECT_EQ(r.correct, 0u);
  EXPECT_EQ(r.predicted, 1u);
  EXPECT_EQ(r.gold, 1u);
}

TEST(Score, LengthMismatchRejected) {
  const std::vector<Frame> gold = {frame_of({"A0", "_"})};
  const Predictions pred = {{"A0"}};
  EXPECT_THROW(score(gold, pred), DataError);
}

TEST(Score, InvariantToFrameOrder) {
  std::vector<Frame> gold = {frame_of({"A0", "_"}), frame_of({"_", "A1"})};
  Predictions pred = {{"A0", "A1"}, {"_", "_"}};
  const EvalReport a = score(gold, pred);
  std::swap(gold[0], gold[1]);
  std::swap(pred[0], pred[1]);
  const EvalReport b = score(gold, pred);
  EXPECT_EQ(a.correct, b.correct);
  EXPECT_EQ(a.predicted, b.predicted);
  EXPECT_EQ(a.gold, b.gold);
}

TEST(Score, RemovingACorrectPredictionNeverIncreasesF1) {
  const std::vector<Frame> gold = {
      frame_of({"A0", "_", "A1", "A2", "_", "_"})};
  Predictions pred = {{"A0", "_", "A1", "A3", "A1", "_"}};
  const double before = score(gold, pred).f1();
  pred[0][2] = "_";  // drop a correct prediction
  const double after = score(gold, pred).f1();
  EXPECT_LE(after, before);
}

// Brute-force recount oracle over random frame pairs.
TEST(Score, MatchesBruteForceRecountOnRandomFrames) {
  Rng rng(314);
  const std::vector<std::string> inventory = {"_", "A0", "A1", "A2", "AM"};
  std::vector<Frame> gold;
  Predictions pred;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t len = 1 + rng.index(12);
    Frame f;
    std::vector<std::string> p;
    for (std::size_t t = 0; t < len; ++t) {
      f.gold_labels.push_back(inventory[rng.index(inventory.size())]);
      p.push_back(inventory[rng.index(inventory.size())]);
    }
    gold.push_back(f);
    pred.push_back(p);
  }
  std::size_t correct = 0, predicted = 0, gold_count = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].gold_labels.size(); ++t) {
      const std::string& g = gold[i].gold_labels[t];
      const std::string& q = pred[i][t];
      if (g != "_") ++gold_count;
      if (q != "_") ++predicted;
      if (g != "_" && q != "_" && g == q) ++correct;
    }
  }
  const EvalReport r = score(gold, pred);
  EXPECT_EQ(r.correct, correct);
  EXPECT_EQ(r.predicted, predicted);
  EXPECT_EQ(r.gold, gold_count);
}

TEST(Score, F1SymmetricInPrecisionRecall) {
  EvalReport r;
  r.correct = 30;
  r.predicted = 40;  // P = 75
  r.gold = 60;       // R = 50
  EvalReport mirrored;
  mirrored.correct = 30;
  mirrored.predicted = 60;  // P = 50
  mirrored.gold = 40;       // R = 75
  EXPECT_DOUBLE_EQ(r.f1(), mirrored.f1());
  EXPECT_GE(r.f1(), 0.0);
  EXPECT_LE(r.f1(), 100.0);
}

TEST(Iow, PaperTableThreeAnchors) {
  EXPECT_NEAR(iow(67.78, 48.91), 38.58, 0.01);  // Finnish char3
  EXPECT_NEAR(iow(56.60, 44.82), 26.28, 0.01);  // Turkish char3
  // The published char cells carry rounding drift from unrounded F1s;
  // recomputation stays within two hundredths.
  EXPECT_NEAR(iow(67.24, 48.91), 37.46, 0.02);  // Finnish char
  EXPECT_NEAR(iow(55.89, 44.82), 24.68, 0.02);  // Turkish char
}

TEST(Iow, EqualScoresGiveZero) { EXPECT_DOUBLE_EQ(iow(50.0, 50.0), 0.0); }

TEST(Iow, ZeroBaselineRejected) { EXPECT_THROW(iow(10.0, 0.0), NumericError); }

TEST(Ioc, PaperTableThreeAnchors) {
  EXPECT_NEAR(ioc(71.15, 67.78), 4.97, 0.01);  // Finnish
  EXPECT_NEAR(ioc(59.38, 56.60), 4.91, 0.01);  // Turkish
  // Spanish morph 69.39 vs char3 68.43: recomputation gives 1.40, not the
  // published 2.25; the toolkit reports the recomputed value.
  EXPECT_NEAR(ioc(69.39, 68.43), 1.40, 0.01);
}

TEST(Ioc, EqualScoresGiveZero) { EXPECT_DOUBLE_EQ(ioc(67.0, 67.0), 0.0); }

TEST(Iob, PaperTableFourSpanishAnchor) {
  // Spanish char+oracle: Avg 71.80, SG 71.75 vs members 67.90 / 69.39.
  EXPECT_NEAR(iob({71.80, 71.75}, {67.90, 69.39}), 3.47, 0.01);
}

TEST(Iob, HandArithmetic) {
  EXPECT_NEAR(iob({66.0, 63.0}, {50.0, 60.0}), 10.0, 1e-9);
}

TEST(Iob, EnsembleEqualToBestMemberGivesZero) {
  EXPECT_DOUBLE_EQ(iob({60.0}, {60.0, 55.0}), 0.0);
}

TEST(Iob, EmptyListsRejected) {
  EXPECT_THROW(iob({}, {50.0}), DataError);
  EXPECT_THROW(iob({50.0}, {}), DataError);
}

TEST(ScoreIds, UnknownGoldCountsAsUnreachableArgument) {
  // gold ids: -1 marks a role outside the training label set.
  const std::vector<std::vector<int>> gold = {{0, -1, 1}};
  const std::vector<std::vector<int>> pred = {{0, 1, 1}};
  const EvalReport r = score_ids(gold, pred, 0);
  EXPECT_EQ(r.gold, 2u);       // -1 and 1
  EXPECT_EQ(r.predicted, 2u);  // two non-nonrole predictions
  EXPECT_EQ(r.correct, 1u);    // only the id-1 match
}

}  // namespace
