#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phishtriage/metrics.hpp"

namespace phishtriage {

/// Metric values as printed by some external source, checked against a
/// recomputation from the counts.
struct StatedMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> accuracy;
};

struct ModelResult {
  std::string model;
  ConfusionCounts counts;
  std::size_t unscored = 0;
  std::optional<ReliabilityResult> reliability;
  std::optional<StatedMetrics> stated;
};

struct Discrepancy {
  std::string model;
  std::string metric;
  double stated = 0.0;
  double recomputed = 0.0;
};

struct ReportOptions {
  /// A stated metric further than this from the recomputed value is flagged.
  double discrepancy_tolerance = 5e-4;
};

struct ReportArtifacts {
  std::string csv;
  std::string json;
  std::string text;
  std::string confusion_matrices;
  std::vector<Discrepancy> discrepancies;
  std::vector<std::string> model_order;  ///< accuracy descending
};

/// Column order of the CSV report.
inline constexpr const char* kReportCsvHeader =
    "model,tp,fp,tn,fn,unscored,precision,recall,f1,accuracy,fpr,fnr,reliability,discrepancy";

/// Comparison table in CSV, JSON and text form. Rows are sorted by accuracy
/// descending (stable, undefined accuracy last). Metrics print with four
/// decimals; "n/a" marks undefined values.
ReportArtifacts render_report(const std::vector<ModelResult>& results, const ReportOptions& options = {});

/// Two-by-two matrix for one model, actual classes as rows.
std::string render_confusion_matrix(const std::string& model, const ConfusionCounts& counts);

/// "%.4f" or "n/a".
std::string format_metric(const std::optional<double>& value);

}  // namespace phishtriage
