#include <gtest/gtest.h>

#include <random>

#include "phishtriage/error.hpp"
#include "phishtriage/metrics.hpp"

namespace phishtriage {
namespace {

ScoredOutcome scored(Label truth, bool predicted, Risk risk = Risk::High) {
  Verdict v;
  v.is_phishing = predicted;
  v.risk = risk;
  return {truth, v};
}

std::vector<ScoredOutcome> planted(const ConfusionCounts& c) {
  std::vector<ScoredOutcome> out;
  for (std::size_t i = 0; i < c.tp; ++i) out.push_back(scored(Label::Phishing, true));
  for (std::size_t i = 0; i < c.fp; ++i) out.push_back(scored(Label::Legit, true));
  for (std::size_t i = 0; i < c.tn; ++i) out.push_back(scored(Label::Legit, false));
  for (std::size_t i = 0; i < c.fn; ++i) out.push_back(scored(Label::Phishing, false));
  return out;
}

TEST(ConfusionCounts, PlantedLlamaRow) {
  const ConfusionCounts c{4806, 93, 1869, 98};
  const auto outcomes = planted(c);
  EXPECT_EQ(confusion_counts(outcomes).counts, c);
}

TEST(ConfusionCounts, AllCorrectToy) {
  const auto outcomes = planted({2, 0, 2, 0});
  EXPECT_EQ(confusion_counts(outcomes).counts, (ConfusionCounts{2, 0, 2, 0}));
}

TEST(ConfusionCounts, ErrorsExcluded) {
  auto outcomes = planted({5, 1, 2, 1});
  outcomes.push_back({Label::Phishing, std::nullopt});
  const auto r = confusion_counts(outcomes);
  EXPECT_EQ(r.counts.total(), 9u);
  EXPECT_EQ(r.unscored, 1u);
}

TEST(ConfusionCounts, MissingLabel) {
  std::vector<ScoredOutcome> outcomes{{std::nullopt, Verdict{}}};
  try {
    confusion_counts(outcomes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLabel);
  }
}

TEST(ComputeMetrics, LlamaRow) {
  const Metrics m = compute_metrics({4806, 93, 1869, 98});
  EXPECT_NEAR(*m.precision, 0.9810, 1e-4);
  EXPECT_NEAR(*m.recall, 0.9800, 1e-4);
  EXPECT_NEAR(*m.f1, 0.9805, 1e-4);
  EXPECT_NEAR(*m.accuracy, 0.9721, 1e-4);
  EXPECT_NEAR(*m.fpr, 0.0474, 1e-4);
}

TEST(ComputeMetrics, GemmaRow) {
  const Metrics m = compute_metrics({4882, 301, 1661, 22});
  EXPECT_NEAR(*m.precision, 0.9419, 1e-4);
  EXPECT_NEAR(*m.recall, 0.9955, 1e-4);
  EXPECT_NEAR(*m.f1, 0.9679, 1e-4);
  EXPECT_NEAR(*m.accuracy, 0.9529, 1e-4);
  EXPECT_NEAR(*m.fpr, 0.1534, 1e-4);
}

TEST(ComputeMetrics, Llama3Row) {
  const Metrics m = compute_metrics({4863, 760, 1202, 41});
  EXPECT_NEAR(*m.precision, 0.8648, 1e-4);
  EXPECT_NEAR(*m.recall, 0.9916, 1e-4);
  EXPECT_NEAR(*m.f1, 0.9239, 1e-4);
  EXPECT_NEAR(*m.accuracy, 0.8833, 1e-4);
}

TEST(ComputeMetrics, EmptyCounts) {
  try {
    compute_metrics({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCounts);
  }
}

TEST(ComputeMetrics, UndefinedIsNotZero) {
  const Metrics m = compute_metrics({0, 0, 5, 0});
  EXPECT_FALSE(m.precision);
  EXPECT_FALSE(m.recall);
  EXPECT_FALSE(m.f1);
  EXPECT_FALSE(m.fnr);
  EXPECT_EQ(*m.accuracy, 1.0);
  EXPECT_EQ(*m.fpr, 0.0);
}

TEST(ComputeMetrics, BruteForceOracle) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> size(1, 300);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ScoredOutcome> outcomes;
    const int n = size(rng);
    double correct = 0, pred_pos = 0, true_pos = 0, actual_pos = 0, false_pos = 0, actual_neg = 0;
    for (int i = 0; i < n; ++i) {
      const bool actual = coin(rng);
      const bool predicted = coin(rng);
      outcomes.push_back(scored(actual ? Label::Phishing : Label::Legit, predicted));
      correct += actual == predicted;
      pred_pos += predicted;
      true_pos += actual && predicted;
      actual_pos += actual;
      actual_neg += !actual;
      false_pos += predicted && !actual;
    }
    const Metrics m = compute_metrics(confusion_counts(outcomes).counts);
    ASSERT_DOUBLE_EQ(*m.accuracy, correct / n);
    if (pred_pos > 0) ASSERT_DOUBLE_EQ(*m.precision, true_pos / pred_pos);
    if (actual_pos > 0) ASSERT_DOUBLE_EQ(*m.recall, true_pos / actual_pos);
    if (actual_neg > 0) ASSERT_DOUBLE_EQ(*m.fpr, false_pos / actual_neg);
    for (const auto& v : {m.accuracy, m.precision, m.recall, m.f1, m.fpr, m.fnr}) {
      if (v) ASSERT_TRUE(*v >= 0.0 && *v <= 1.0);
    }
    if (m.precision && m.recall && m.f1) {
      ASSERT_GE(*m.f1, std::min(*m.precision, *m.recall) - 1e-12);
      ASSERT_LE(*m.f1, std::max(*m.precision, *m.recall) + 1e-12);
    }
  }
}

TEST(ComputeMetrics, ClassSwapIdentities) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> count(1, 500);
  for (int trial = 0; trial < 1000; ++trial) {
    const ConfusionCounts c{count(rng), count(rng), count(rng), count(rng)};
    const Metrics m = compute_metrics(c);
    const Metrics s = compute_metrics(c.swapped());
    ASSERT_DOUBLE_EQ(*m.accuracy, *s.accuracy);
    ASSERT_DOUBLE_EQ(*m.fpr, *s.fnr);
    ASSERT_DOUBLE_EQ(*m.fnr, *s.fpr);
    ASSERT_NEAR(*m.recall, 1.0 - *s.fpr, 1e-12);
  }
}

TEST(Reliability, AllCorrect) {
  const auto outcomes = planted({3, 0, 2, 0});
  EXPECT_EQ(reliability_score(outcomes).score, 1.0);
}

TEST(Reliability, MediumMissOnPhishing) {
  const std::vector<ScoredOutcome> outcomes{scored(Label::Phishing, true),
                                            scored(Label::Phishing, false, Risk::Medium)};
  const auto r = reliability_score(outcomes);
  EXPECT_EQ(r.score, 0.75);
  EXPECT_EQ(r.half_marks, 1u);
}

TEST(Reliability, ZeroMarkMiss) {
  const std::vector<ScoredOutcome> outcomes{scored(Label::Legit, false), scored(Label::Legit, true, Risk::High)};
  EXPECT_EQ(reliability_score(outcomes).score, 0.5);
}

TEST(Reliability, MediumOnLegitEarnsNothing) {
  const std::vector<ScoredOutcome> outcomes{scored(Label::Legit, true, Risk::Medium)};
  EXPECT_EQ(reliability_score(outcomes).score, 0.0);
}

TEST(Reliability, EqualsAccuracyWithoutHalfMarks) {
  const auto outcomes = planted({40, 7, 30, 9});
  EXPECT_DOUBLE_EQ(reliability_score(outcomes).score, *compute_metrics(confusion_counts(outcomes).counts).accuracy);
}

}  // namespace
}  // namespace phishtriage
