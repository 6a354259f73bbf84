#include "cicc/evaluation.hpp"

#include <algorithm>

namespace cicc {

namespace {

// CSV cell for an optional metric; absent -> empty field.
std::string csv_cell(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string{};
}

std::string pretty_cell(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string("-");
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out += c;
    }
  }
  out += "\"";
  return out;
}

}  // namespace

std::string_view baseline_name(BaselineId id) {
  switch (id) {
    case BaselineId::B1:
      return "b1";
    case BaselineId::B2:
      return "b2";
    case BaselineId::B3:
      return "b3";
  }
  return "unknown";
}

std::optional<BaselineId> baseline_from_name(std::string_view name) {
  if (name == "b1" || name == "B1") {
    return BaselineId::B1;
  }
  if (name == "b2" || name == "B2") {
    return BaselineId::B2;
  }
  if (name == "b3" || name == "B3") {
    return BaselineId::B3;
  }
  return std::nullopt;
}

PredictionSet baseline_select(BaselineId id, const ScoreVector& f, double alpha) {
  if (f.empty()) {
    throw InputError("baseline selection on an empty score vector");
  }
  const auto order = descending_order(f);
  const std::size_t top_k = std::min<std::size_t>(5, f.size());

  PredictionSet out;
  if (id == BaselineId::B3) {
    out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_k));
    return out;
  }
  const double threshold = 1.0 - alpha;
  for (const ClassId y : order) {
    if (f[static_cast<std::size_t>(y)] > threshold) {
      out.indices.push_back(y);
    }
  }
  if (out.indices.empty()) {
    const std::size_t fill = id == BaselineId::B1 ? top_k : 1;
    out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(fill));
  }
  return out;
}

EvalReport evaluate(const std::vector<LabeledDecision>& decisions) {
  if (decisions.empty()) {
    throw InputError("evaluate called with no decisions");
  }

  int ambiguous = 0;
  int confident = 0;
  int clarify = 0;
  int hits = 0;
  long long clarify_size_sum = 0;
  std::map<int, std::pair<int, int>> strata;  // size -> (hits, count)

  for (const auto& [decision, truth] : decisions) {
    if (std::holds_alternative<Ambiguous>(decision)) {
      ++ambiguous;
      continue;
    }
    bool hit = false;
    int size = 0;
    if (const auto* c = std::get_if<Confident>(&decision)) {
      ++confident;
      size = 1;
      hit = truth && *truth == c->intent;
    } else {
      const auto& cl = std::get<Clarify>(decision);
      ++clarify;
      size = cl.set.size();
      clarify_size_sum += size;
      hit = truth && cl.set.contains(*truth);
    }
    auto& [stratum_hits, stratum_count] = strata[size];
    stratum_hits += hit ? 1 : 0;
    ++stratum_count;
    hits += hit ? 1 : 0;
  }

  EvalReport report;
  report.n = static_cast<int>(decisions.size());
  report.m = report.n - ambiguous;
  report.amb = static_cast<double>(ambiguous) / report.n;
  if (report.m > 0) {
    report.cov = static_cast<double>(hits) / report.m;
    report.single = static_cast<double>(confident) / report.m;
  }
  if (clarify > 0) {
    report.cq_size = static_cast<double>(clarify_size_sum) / clarify;
  }
  for (const auto& [size, stats] : strata) {
    const auto& [stratum_hits, stratum_count] = stats;
    const double coverage = static_cast<double>(stratum_hits) / stratum_count;
    report.per_stratum[size] = StratumStats{stratum_count, coverage};
    if (!report.ssc || coverage < *report.ssc) {
      report.ssc = coverage;
    }
  }
  return report;
}

std::optional<double> ssc_score(const std::vector<PredictionSet>& sets,
                                const std::vector<std::optional<ClassId>>& truths) {
  if (sets.size() != truths.size()) {
    throw InputError("ssc: sets and truths differ in length");
  }
  std::map<int, std::pair<int, int>> strata;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    auto& [stratum_hits, stratum_count] = strata[sets[i].size()];
    stratum_hits += (truths[i] && sets[i].contains(*truths[i])) ? 1 : 0;
    ++stratum_count;
  }
  std::optional<double> minimum;
  for (const auto& [size, stats] : strata) {
    (void)size;
    const double coverage = static_cast<double>(stats.first) / stats.second;
    if (!minimum || coverage < *minimum) {
      minimum = coverage;
    }
  }
  return minimum;
}

std::vector<SweepRow> alpha_sweep(const std::vector<ConformalMethod>& methods,
                                  const std::vector<double>& alphas, const Dataset& calibration,
                                  const Dataset& test, int th) {
  if (!(calibration.vocabulary == test.vocabulary)) {
    throw InputError("calibration and test sets use different vocabularies");
  }
  if (test.examples.empty()) {
    throw InputError("empty test set");
  }
  EngineConfig engine;
  engine.th = th;
  engine.validate();

  std::vector<SweepRow> rows;
  rows.reserve(methods.size() * alphas.size());
  for (const auto& method : methods) {
    for (const double alpha : alphas) {
      const auto calibrator = FittedCalibrator::fit({method, alpha}, calibration);

      int hits = 0;
      long long size_sum = 0;
      int confident = 0;
      int ambiguous = 0;
      std::vector<PredictionSet> sets;
      std::vector<std::optional<ClassId>> truths;
      sets.reserve(test.examples.size());
      truths.reserve(test.examples.size());
      for (const auto& ex : test.examples) {
        PredictionSet set = calibrator.predict_set(ex.scores);
        size_sum += set.size();
        if (ex.label && set.contains(*ex.label)) {
          ++hits;
        }
        if (set.size() == 1) {
          ++confident;
        } else if (exceeds_ambiguity_threshold(set.size(), th)) {
          ++ambiguous;
        }
        sets.push_back(std::move(set));
        truths.push_back(ex.label);
      }

      SweepRow row;
      row.method = method.variant;
      row.alpha = alpha;
      const int n = static_cast<int>(test.examples.size());
      row.cov = static_cast<double>(hits) / n;
      row.mean_set_size = static_cast<double>(size_sum) / n;
      row.ssc = ssc_score(sets, truths);
      const int m = n - ambiguous;
      if (m > 0) {
        row.single = static_cast<double>(confident) / m;
      }
      row.amb = static_cast<double>(ambiguous) / n;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string report_csv_header() { return "setting,method,alpha,th,cov,single,cq_size,amb,ssc,n,m"; }

std::string report_csv_row(const std::string& setting, const std::string& method, double alpha,
                           int th, const EvalReport& report) {
  std::string row = csv_escape(setting);
  row += "," + method;
  row += "," + format_double(alpha);
  row += "," + std::to_string(th);
  row += "," + csv_cell(report.cov);
  row += "," + csv_cell(report.single);
  row += "," + csv_cell(report.cq_size);
  row += "," + format_double(report.amb);
  row += "," + csv_cell(report.ssc);
  row += "," + std::to_string(report.n);
  row += "," + std::to_string(report.m);
  return row;
}

std::string report_pretty(const EvalReport& report) {
  std::string out = "cov=" + pretty_cell(report.cov);
  out += " single=" + pretty_cell(report.single);
  out += " |CQ|=" + pretty_cell(report.cq_size);
  out += " amb=" + format_double(report.amb);
  out += " ssc=" + pretty_cell(report.ssc);
  out += " n=" + std::to_string(report.n);
  out += " m=" + std::to_string(report.m);
  return out;
}

std::string sweep_csv_header() { return "method,alpha,cov,mean_set_size,ssc,single,amb"; }

std::string sweep_csv_row(const SweepRow& row) {
  std::string out{variant_name(row.method)};
  out += "," + format_double(row.alpha);
  out += "," + format_double(row.cov);
  out += "," + format_double(row.mean_set_size);
  out += "," + csv_cell(row.ssc);
  out += "," + csv_cell(row.single);
  out += "," + format_double(row.amb);
  return out;
}

}  // namespace cicc
