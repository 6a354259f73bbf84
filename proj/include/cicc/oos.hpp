#pragma once

#include <vector>

#include "json.hpp"

#include "cicc/conformal.hpp"
#include "cicc/decision.hpp"

namespace cicc {

// A rejection of the input doubles as an out-of-scope classification; shares
// the engine's strict threshold predicate.
inline bool classify_oos(const PredictionSet& set, int th) {
  return exceeds_ambiguity_threshold(set.size(), th);
}

// Harmonic mean of precision and recall with out-of-scope as the positive
// class; 0 when nothing was flagged. Requires at least one positive truth.
double f1_score(const std::vector<bool>& predicted_oos, const std::vector<bool>& truth_oos);

// Rank-based (Mann-Whitney) AUROC with ties contributing one half. Larger
// scores must indicate out-of-scope. Requires both classes present.
double auroc(const std::vector<double>& scores, const std::vector<bool>& truth_oos);

struct OosGridPoint {
  double alpha = 0.0;
  int th = 0;
  double f1 = 0.0;
};

struct OosTuneResult {
  double best_alpha = 0.0;
  int best_th = 0;
  double f1 = 0.0;
  double auroc = 0.0;
  std::vector<OosGridPoint> trace;  // canonical order: ascending alpha, then th

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// 1-alpha in {0.90, 0.905, ..., 0.995} plus 0.999, returned as ascending alphas.
std::vector<double> default_oos_alphas();
// 1..min(K, 20).
std::vector<int> default_oos_ths(int num_classes);

// Exhaustive grid search: the calibrator is fit per alpha on the in-scope
// subset only; F1 uses classify_oos over the full calibration set. Ties in F1
// prefer the larger alpha, then the smaller th. AUROC ranks prediction-set
// sizes at the best alpha.
OosTuneResult tune_oos(const ConformalMethod& method, const Dataset& cal_with_oos,
                       const std::vector<double>& alphas, const std::vector<int>& ths);

}  // namespace cicc
