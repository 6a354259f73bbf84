#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cicc/decision.hpp"

namespace cicc {

// Heuristic selection rules evaluated through the same decision thresholding
// as the conformal pipeline.
enum class BaselineId { B1, B2, B3 };

std::string_view baseline_name(BaselineId id);
std::optional<BaselineId> baseline_from_name(std::string_view name);

// B1: classes scoring above 1-alpha, top-5 when that is empty.
// B2: classes scoring above 1-alpha, top-1 when that is empty.
// B3: top-5 always. Top-k is capped at K.
PredictionSet baseline_select(BaselineId id, const ScoreVector& f, double alpha);

struct StratumStats {
  int count = 0;
  double coverage = 0.0;
};

struct EvalReport {
  std::optional<double> cov;      // absent when every input was rejected
  std::optional<double> single;   // absent when every input was rejected
  std::optional<double> cq_size;  // absent when no clarification was asked
  double amb = 0.0;
  std::optional<double> ssc;  // absent when no stratum is non-empty
  int n = 0;
  int m = 0;  // non-rejected count
  std::map<int, StratumStats> per_stratum;
};

struct LabeledDecision {
  Decision decision;
  std::optional<ClassId> truth;  // nullopt = out-of-scope ground truth
};

// Ambiguity rate over all n decisions; coverage, single rate and mean
// clarification size over the m non-rejected ones. All ratios are exact
// integer quotients.
EvalReport evaluate(const std::vector<LabeledDecision>& decisions);

// Minimum within-stratum coverage across non-empty set-size strata.
std::optional<double> ssc_score(const std::vector<PredictionSet>& sets,
                                const std::vector<std::optional<ClassId>>& truths);

struct SweepRow {
  Variant method;
  double alpha;
  // Raw prediction-set statistics over every test example (pre-rejection).
  double cov = 0.0;
  double mean_set_size = 0.0;
  std::optional<double> ssc;
  // Decision-loop statistics at the given th.
  std::optional<double> single;
  double amb = 0.0;
};

// One row per (method, alpha) in input order: fit on the calibration split,
// predict on the test split, aggregate.
std::vector<SweepRow> alpha_sweep(const std::vector<ConformalMethod>& methods,
                                  const std::vector<double>& alphas, const Dataset& calibration,
                                  const Dataset& test, int th);

// Report CSV schema; absent values serialize as empty fields.
std::string report_csv_header();
std::string report_csv_row(const std::string& setting, const std::string& method, double alpha,
                           int th, const EvalReport& report);
// Same fields with "-" for absent values, Table-style.
std::string report_pretty(const EvalReport& report);

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row);

}  // namespace cicc
