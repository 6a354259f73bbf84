#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cicc/dataset.hpp"

namespace cicc {

enum class Variant { Marginal, Adaptive, Raps };

std::string_view variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);

struct ConformalMethod {
  Variant variant = Variant::Marginal;
  // Rank-penalty parameters, read only when variant == Raps.
  double raps_lambda = 0.01;
  int raps_kreg = 5;
};

struct CalibratorConfig {
  ConformalMethod method;
  double alpha = 0.1;  // error level in [0, 1)

  void validate(int num_classes) const;
};

// Class ids in descending score order, ties by ascending class id. Never
// empty; a set that would be empty under the marginal rule is replaced by
// the top-scoring class with `argmax_fallback` set.
struct PredictionSet {
  std::vector<ClassId> indices;
  bool argmax_fallback = false;

  int size() const { return static_cast<int>(indices.size()); }
  bool contains(ClassId y) const;
};

// One minus the score of the true class.
double nonconformity_marginal(const ScoreVector& f, ClassId y);

// Total score mass of every class at least as likely as the true class
// (ties included).
double nonconformity_adaptive(const ScoreVector& f, ClassId y);

// Adaptive score plus lambda * max(0, rank(y) - kreg), rank being the 1-based
// position of y in descending score order with ties by ascending class id.
double nonconformity_raps(const ScoreVector& f, ClassId y, double lambda, int kreg);

// The ceil((n+1)(1-alpha))-th smallest score, or +infinity when that rank
// exceeds n (the coverage demand cannot be met with n calibration points).
double conformal_quantile(std::vector<double> scores, double alpha);

// Permutation of {0..K-1} sorting f in descending order, ties by ascending id.
std::vector<ClassId> descending_order(const ScoreVector& f);

class FittedCalibrator {
 public:
  // Computes the per-example nonconformity of the true class over the
  // calibration set and fits the quantile threshold. The calibration set
  // must be non-empty and contain no out-of-scope rows.
  static FittedCalibrator fit(const CalibratorConfig& config, const Dataset& calibration);

  PredictionSet predict_set(const ScoreVector& f) const;

  const CalibratorConfig& config() const { return config_; }
  double q_hat() const;
  bool q_hat_is_infinite() const { return infinite_; }
  int calibration_size() const { return n_; }
  const LabelVocabulary& vocabulary() const { return vocabulary_; }

  // Artifact schema: {"method", "alpha", "q_hat" (number or "inf"), "n",
  // "raps_lambda"?, "raps_kreg"?, "labels"}. Round-trips bit-exactly.
  nlohmann::json to_json() const;
  static FittedCalibrator from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static FittedCalibrator load(const std::filesystem::path& path);

 private:
  FittedCalibrator() = default;

  CalibratorConfig config_;
  double q_hat_value_ = 0.0;  // ignored when infinite_
  bool infinite_ = false;
  int n_ = 0;
  LabelVocabulary vocabulary_;
};

}  // namespace cicc
