#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "phishtriage/dataset.hpp"
#include "phishtriage/prompt.hpp"

namespace phishtriage {

/// Phishing is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  /// Counts with Legit treated as the positive class.
  ConfusionCounts swapped() const noexcept { return {tn, fn, tp, fp}; }

  ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept;
  bool operator==(const ConfusionCounts&) const = default;
};

/// nullopt marks a zero denominator; it is never reported as 0.
struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> fpr;
  std::optional<double> fnr;
};

/// A scored record: ground truth plus the model's verdict, or nothing when the
/// model call failed.
struct ScoredOutcome {
  std::optional<Label> truth;
  std::optional<Verdict> verdict;
};

struct CountResult {
  ConfusionCounts counts;
  std::size_t unscored = 0;  ///< outcomes without a verdict
};

/// Throws Error{MissingLabel} when a verdict-bearing outcome has no truth.
CountResult confusion_counts(std::span<const ScoredOutcome> outcomes);

/// Throws Error{EmptyCounts} when all four counts are zero.
Metrics compute_metrics(const ConfusionCounts& counts);

struct ReliabilityResult {
  double score = 0.0;
  std::size_t full_marks = 0;
  std::size_t half_marks = 0;
  std::size_t zero_marks = 0;

  std::size_t total() const noexcept { return full_marks + half_marks + zero_marks; }
};

/// One mark per correct prediction, half a mark for a miss whose risk is Medium
/// on a true phishing email, nothing otherwise; score is the mean. Outcomes
/// without a verdict are skipped. Throws Error{MissingLabel} or
/// Error{EmptyCounts} when nothing is scored.
ReliabilityResult reliability_score(std::span<const ScoredOutcome> outcomes);

}  // namespace phishtriage
