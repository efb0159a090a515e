#include "phishtriage/metrics.hpp"

#include "phishtriage/error.hpp"

namespace phishtriage {
namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) noexcept {
  tp += other.tp;
  fp += other.fp;
  tn += other.tn;
  fn += other.fn;
  return *this;
}

CountResult confusion_counts(std::span<const ScoredOutcome> outcomes) {
  CountResult result;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (!o.truth) throw Error(ErrorCode::MissingLabel, "outcome " + std::to_string(i) + " has no ground truth");
    if (!o.verdict) {
      ++result.unscored;
      continue;
    }
    const bool actual = *o.truth == Label::Phishing;
    const bool predicted = o.verdict->is_phishing;
    if (predicted && actual) ++result.counts.tp;
    else if (predicted) ++result.counts.fp;
    else if (actual) ++result.counts.fn;
    else ++result.counts.tn;
  }
  return result;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error(ErrorCode::EmptyCounts, "confusion counts are all zero");
  Metrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN), which avoids compounding rounding.
  if (m.precision && m.recall) m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  m.fpr = ratio(c.fp, c.fp + c.tn);
  m.fnr = ratio(c.fn, c.fn + c.tp);
  return m;
}

ReliabilityResult reliability_score(std::span<const ScoredOutcome> outcomes) {
  ReliabilityResult r;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (!o.truth) throw Error(ErrorCode::MissingLabel, "outcome " + std::to_string(i) + " has no ground truth");
    if (!o.verdict) continue;
    const bool actual = *o.truth == Label::Phishing;
    if (o.verdict->is_phishing == actual) ++r.full_marks;
    else if (actual && o.verdict->risk == Risk::Medium) ++r.half_marks;
    else ++r.zero_marks;
  }
  if (r.total() == 0) throw Error(ErrorCode::EmptyCounts, "no scored outcomes for reliability");
  r.score = (static_cast<double>(r.full_marks) + 0.5 * static_cast<double>(r.half_marks)) /
            static_cast<double>(r.total());
  return r;
}

}  // namespace phishtriage
