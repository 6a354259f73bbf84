#include "cicc/oos.hpp"

#include <algorithm>
#include <numeric>

namespace cicc {

double f1_score(const std::vector<bool>& predicted_oos, const std::vector<bool>& truth_oos) {
  if (predicted_oos.size() != truth_oos.size()) {
    throw InputError("f1: predictions and truths differ in length");
  }
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long positives = 0;
  for (std::size_t i = 0; i < truth_oos.size(); ++i) {
    positives += truth_oos[i] ? 1 : 0;
    if (predicted_oos[i] && truth_oos[i]) {
      ++tp;
    } else if (predicted_oos[i] && !truth_oos[i]) {
      ++fp;
    } else if (!predicted_oos[i] && truth_oos[i]) {
      ++fn;
    }
  }
  if (positives == 0) {
    throw InputError("f1: no out-of-scope example in the ground truth");
  }
  // Equals 2PR/(P+R); zero when precision and recall are both zero.
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

double auroc(const std::vector<double>& scores, const std::vector<bool>& truth_oos) {
  if (scores.size() != truth_oos.size()) {
    throw InputError("auroc: scores and truths differ in length");
  }
  const auto n = scores.size();
  long long positives = std::count(truth_oos.begin(), truth_oos.end(), true);
  const long long negatives = static_cast<long long>(n) - positives;
  if (positives == 0 || negatives == 0) {
    throw InputError("auroc: both classes must be present");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over tie groups; the rank sum of positives gives the U statistic.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (truth_oos[order[k]]) {
        positive_rank_sum += midrank;
      }
    }
    i = j + 1;
  }
  const double u = positive_rank_sum -
                   static_cast<double>(positives) * (static_cast<double>(positives) + 1.0) / 2.0;
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

std::vector<double> default_oos_alphas() {
  // 1-alpha in {0.90, 0.905, ..., 0.995} plus 0.999; built from integer
  // thousandths so the doubles come out exact.
  std::vector<double> alphas;
  alphas.push_back(1.0 / 1000.0);
  for (int thousandths = 5; thousandths <= 100; thousandths += 5) {
    alphas.push_back(static_cast<double>(thousandths) / 1000.0);
  }
  return alphas;
}

std::vector<int> default_oos_ths(int num_classes) {
  std::vector<int> ths;
  for (int th = 1; th <= std::min(num_classes, 20); ++th) {
    ths.push_back(th);
  }
  return ths;
}

OosTuneResult tune_oos(const ConformalMethod& method, const Dataset& cal_with_oos,
                       const std::vector<double>& alphas, const std::vector<int>& ths) {
  if (alphas.empty() || ths.empty()) {
    throw InputError("empty tuning grid");
  }
  for (const int th : ths) {
    if (th < 1) {
      throw InputError("th grid values must be at least 1");
    }
  }

  Dataset in_scope;
  in_scope.vocabulary = cal_with_oos.vocabulary;
  std::vector<bool> truth_oos;
  truth_oos.reserve(cal_with_oos.examples.size());
  for (const auto& ex : cal_with_oos.examples) {
    truth_oos.push_back(ex.is_oos());
    if (!ex.is_oos()) {
      in_scope.examples.push_back(ex);
    }
  }
  const auto oos_count = std::count(truth_oos.begin(), truth_oos.end(), true);
  if (oos_count == 0) {
    throw InputError("calibration set has no out-of-scope rows; nothing to tune");
  }
  if (in_scope.examples.empty()) {
    throw InputError("calibration set has no in-scope rows to calibrate on");
  }

  // Canonical grid order: ascending alpha, then th.
  std::vector<double> sorted_alphas = alphas;
  std::sort(sorted_alphas.begin(), sorted_alphas.end());
  sorted_alphas.erase(std::unique(sorted_alphas.begin(), sorted_alphas.end()),
                      sorted_alphas.end());
  std::vector<int> sorted_ths = ths;
  std::sort(sorted_ths.begin(), sorted_ths.end());
  sorted_ths.erase(std::unique(sorted_ths.begin(), sorted_ths.end()), sorted_ths.end());

  OosTuneResult result;
  bool have_best = false;
  const auto better = [&](double f1, double alpha, int th) {
    if (!have_best || f1 > result.f1) {
      return true;
    }
    if (f1 < result.f1) {
      return false;
    }
    if (alpha != result.best_alpha) {
      return alpha > result.best_alpha;
    }
    return th < result.best_th;
  };

  for (const double alpha : sorted_alphas) {
    const auto calibrator = FittedCalibrator::fit({method, alpha}, in_scope);
    std::vector<int> sizes;
    sizes.reserve(cal_with_oos.examples.size());
    for (const auto& ex : cal_with_oos.examples) {
      sizes.push_back(calibrator.predict_set(ex.scores).size());
    }
    for (const int th : sorted_ths) {
      std::vector<bool> predicted;
      predicted.reserve(sizes.size());
      for (const int size : sizes) {
        predicted.push_back(exceeds_ambiguity_threshold(size, th));
      }
      const double f1 = f1_score(predicted, truth_oos);
      result.trace.push_back(OosGridPoint{alpha, th, f1});
      if (better(f1, alpha, th)) {
        result.best_alpha = alpha;
        result.best_th = th;
        result.f1 = f1;
        have_best = true;
      }
    }
  }

  // Set sizes at the tuned alpha are the ranking score for AUROC.
  const auto best_calibrator = FittedCalibrator::fit({method, result.best_alpha}, in_scope);
  std::vector<double> scores;
  scores.reserve(cal_with_oos.examples.size());
  for (const auto& ex : cal_with_oos.examples) {
    scores.push_back(static_cast<double>(best_calibrator.predict_set(ex.scores).size()));
  }
  result.auroc = auroc(scores, truth_oos);
  return result;
}

nlohmann::json OosTuneResult::to_json() const {
  nlohmann::json j;
  j["best_alpha"] = best_alpha;
  j["best_th"] = best_th;
  j["f1"] = f1;
  j["auroc"] = auroc;
  auto trace_json = nlohmann::json::array();
  for (const auto& point : trace) {
    trace_json.push_back({point.alpha, point.th, point.f1});
  }
  j["trace"] = std::move(trace_json);
  return j;
}

std::string OosTuneResult::to_csv() const {
  std::string out = "alpha,th,f1\n";
  for (const auto& point : trace) {
    out += format_double(point.alpha);
    out += "," + std::to_string(point.th);
    out += "," + format_double(point.f1);
    out += "\n";
  }
  return out;
}

}  // namespace cicc
