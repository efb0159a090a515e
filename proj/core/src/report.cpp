#include "phishtriage/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "phishtriage/csv.hpp"

namespace phishtriage {
namespace {

using nlohmann::json;

json metric_json(const std::optional<double>& v) { return v ? json(*v) : json(); }

std::string pad(std::string s, std::size_t width, bool right = false) {
  if (s.size() >= width) return s;
  return right ? std::string(width - s.size(), ' ') + s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string format_metric(const std::optional<double>& value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *value);
  return buf;
}

std::string render_confusion_matrix(const std::string& model, const ConfusionCounts& c) {
  const std::size_t w = std::max<std::size_t>(
      {std::to_string(c.tp).size(), std::to_string(c.fp).size(), std::to_string(c.tn).size(),
       std::to_string(c.fn).size(), std::string("Phishing").size()});
  std::ostringstream out;
  out << model << "\n";
  out << pad("", 18) << pad("pred Phishing", w + 6, true) << pad("pred Legit", w + 6, true) << "\n";
  out << pad("actual Phishing", 18) << pad(std::to_string(c.tp), w + 6, true)
      << pad(std::to_string(c.fn), w + 6, true) << "\n";
  out << pad("actual Legit", 18) << pad(std::to_string(c.fp), w + 6, true)
      << pad(std::to_string(c.tn), w + 6, true) << "\n";
  return out.str();
}

ReportArtifacts render_report(const std::vector<ModelResult>& results, const ReportOptions& options) {
  struct Row {
    const ModelResult* result;
    Metrics metrics;
    std::vector<Discrepancy> flags;
  };
  std::vector<Row> rows;
  rows.reserve(results.size());
  ReportArtifacts art;

  for (const auto& r : results) {
    Row row{&r, r.counts.total() ? compute_metrics(r.counts) : Metrics{}, {}};
    if (r.stated) {
      const auto check = [&](const char* name, const std::optional<double>& stated,
                             const std::optional<double>& recomputed) {
        if (!stated) return;
        if (!recomputed || std::fabs(*stated - *recomputed) > options.discrepancy_tolerance) {
          row.flags.push_back({r.model, name, *stated, recomputed.value_or(std::nan(""))});
        }
      };
      check("precision", r.stated->precision, row.metrics.precision);
      check("recall", r.stated->recall, row.metrics.recall);
      check("f1", r.stated->f1, row.metrics.f1);
      check("accuracy", r.stated->accuracy, row.metrics.accuracy);
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.metrics.accuracy && b.metrics.accuracy) return *a.metrics.accuracy > *b.metrics.accuracy;
    return a.metrics.accuracy.has_value() && !b.metrics.accuracy.has_value();
  });

  std::string csv_text = std::string(kReportCsvHeader) + "\n";
  json doc = {{"models", json::array()}};
  std::ostringstream text;
  const std::vector<std::string> headings = {"model", "TP", "FP", "TN", "FN", "unscored", "precision", "recall",
                                             "F1", "accuracy", "FPR", "FNR", "reliability"};
  std::vector<std::vector<std::string>> cells;

  for (const auto& row : rows) {
    const auto& r = *row.result;
    const auto& m = row.metrics;
    art.model_order.push_back(r.model);
    const std::optional<double> reliability =
        r.reliability ? std::optional<double>(r.reliability->score) : std::nullopt;
    std::string flag_text;
    for (const auto& d : row.flags) {
      if (!flag_text.empty()) flag_text += ';';
      flag_text += d.metric + " stated " + format_metric(d.stated) + " recomputed " +
                   format_metric(std::isnan(d.recomputed) ? std::nullopt : std::optional<double>(d.recomputed));
    }
    std::vector<std::string> fields = {r.model,
                                       std::to_string(r.counts.tp),
                                       std::to_string(r.counts.fp),
                                       std::to_string(r.counts.tn),
                                       std::to_string(r.counts.fn),
                                       std::to_string(r.unscored),
                                       format_metric(m.precision),
                                       format_metric(m.recall),
                                       format_metric(m.f1),
                                       format_metric(m.accuracy),
                                       format_metric(m.fpr),
                                       format_metric(m.fnr),
                                       format_metric(reliability)};
    cells.push_back(fields);
    fields.push_back(flag_text);
    csv_text += csv::format_row(fields) + "\n";

    json entry = {{"model", r.model},
                  {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
                  {"unscored", r.unscored},
                  {"metrics",
                   {{"precision", metric_json(m.precision)},
                    {"recall", metric_json(m.recall)},
                    {"f1", metric_json(m.f1)},
                    {"accuracy", metric_json(m.accuracy)},
                    {"fpr", metric_json(m.fpr)},
                    {"fnr", metric_json(m.fnr)}}},
                  {"reliability", json()},
                  {"discrepancies", json::array()}};
    if (r.reliability) {
      entry["reliability"] = {{"score", r.reliability->score},
                              {"full_marks", r.reliability->full_marks},
                              {"half_marks", r.reliability->half_marks},
                              {"zero_marks", r.reliability->zero_marks}};
    }
    for (const auto& d : row.flags) {
      entry["discrepancies"].push_back(
          {{"metric", d.metric}, {"stated", d.stated}, {"recomputed", metric_json(std::isnan(d.recomputed)
                                                                                      ? std::nullopt
                                                                                      : std::optional(d.recomputed))}});
      art.discrepancies.push_back(d);
    }
    doc["models"].push_back(std::move(entry));
    art.confusion_matrices += render_confusion_matrix(r.model, r.counts) + "\n";
  }

  std::vector<std::size_t> widths(headings.size());
  for (std::size_t i = 0; i < headings.size(); ++i) {
    widths[i] = headings[i].size();
    for (const auto& row : cells) widths[i] = std::max(widths[i], row[i].size());
  }
  const auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text << "  ";
      text << pad(fields[i], widths[i], i > 0);
    }
    text << "\n";
  };
  emit(headings);
  text << std::string(std::accumulate(widths.begin(), widths.end(), std::size_t{0}) + 2 * (widths.size() - 1), '-')
       << "\n";
  for (const auto& row : cells) emit(row);
  if (!art.discrepancies.empty()) {
    text << "\nStated metrics that disagree with the counts:\n";
    for (const auto& d : art.discrepancies) {
      text << "  " << d.model << " " << d.metric << ": stated " << format_metric(d.stated) << ", recomputed "
           << (std::isnan(d.recomputed) ? std::string("n/a") : format_metric(d.recomputed)) << "\n";
    }
  }

  art.csv = std::move(csv_text);
  art.json = doc.dump(2);
  art.text = text.str();
  return art;
}

}  // namespace phishtriage
