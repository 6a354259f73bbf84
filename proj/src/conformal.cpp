#include "cicc/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace cicc {

namespace {

void check_class_id(const ScoreVector& f, ClassId y) {
  if (y < 0 || static_cast<std::size_t>(y) >= f.size()) {
    throw InputError("class id " + std::to_string(y) + " out of range [0, " +
                     std::to_string(f.size()) + ")");
  }
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Marginal:
      return "marginal";
    case Variant::Adaptive:
      return "adaptive";
    case Variant::Raps:
      return "raps";
  }
  return "unknown";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  if (name == "marginal") {
    return Variant::Marginal;
  }
  if (name == "adaptive") {
    return Variant::Adaptive;
  }
  if (name == "raps") {
    return Variant::Raps;
  }
  return std::nullopt;
}

void CalibratorConfig::validate(int num_classes) const {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw InputError("alpha must lie in [0, 1), got " + format_double(alpha));
  }
  if (method.variant == Variant::Raps) {
    if (method.raps_lambda < 0.0) {
      throw InputError("raps lambda must be non-negative");
    }
    if (method.raps_kreg < 0 || method.raps_kreg > num_classes) {
      throw InputError("raps kreg must lie in [0, " + std::to_string(num_classes) + "]");
    }
  }
}

bool PredictionSet::contains(ClassId y) const {
  return std::find(indices.begin(), indices.end(), y) != indices.end();
}

double nonconformity_marginal(const ScoreVector& f, ClassId y) {
  check_class_id(f, y);
  return 1.0 - f[static_cast<std::size_t>(y)];
}

double nonconformity_adaptive(const ScoreVector& f, ClassId y) {
  check_class_id(f, y);
  const double f_y = f[static_cast<std::size_t>(y)];
  double total = 0.0;
  for (const double v : f) {
    if (v >= f_y) {
      total += v;
    }
  }
  return total;
}

double nonconformity_raps(const ScoreVector& f, ClassId y, double lambda, int kreg) {
  check_class_id(f, y);
  const auto order = descending_order(f);
  const auto pos = std::find(order.begin(), order.end(), y) - order.begin();
  const int rank = static_cast<int>(pos) + 1;
  return nonconformity_adaptive(f, y) + lambda * std::max(0, rank - kreg);
}

double conformal_quantile(std::vector<double> scores, double alpha) {
  if (scores.empty()) {
    throw InputError("conformal quantile of an empty score list");
  }
  const auto n = scores.size();
  // rank = ceil((n+1)(1-alpha)); the slack absorbs float noise when the
  // product is mathematically integral (e.g. n=9, alpha=0.1).
  const double target = (static_cast<double>(n) + 1.0) * (1.0 - alpha);
  const double ceiled = std::ceil(target - 1e-9);
  const std::size_t rank = ceiled < 1.0 ? 1 : static_cast<std::size_t>(ceiled);
  if (rank > n) {
    return kInf;
  }
  const auto nth = scores.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(scores.begin(), nth, scores.end());
  return *nth;
}

std::vector<ClassId> descending_order(const ScoreVector& f) {
  std::vector<ClassId> order(f.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](ClassId a, ClassId b) {
                     return f[static_cast<std::size_t>(a)] > f[static_cast<std::size_t>(b)];
                   });
  return order;
}

FittedCalibrator FittedCalibrator::fit(const CalibratorConfig& config,
                                       const Dataset& calibration) {
  config.validate(calibration.num_classes());
  if (calibration.examples.empty()) {
    throw InputError("calibration set is empty");
  }

  std::vector<double> scores;
  scores.reserve(calibration.examples.size());
  for (std::size_t i = 0; i < calibration.examples.size(); ++i) {
    const auto& ex = calibration.examples[i];
    if (ex.is_oos()) {
      throw InputError("calibration example " + std::to_string(i) +
                       " is out-of-scope; fit on in-scope rows only");
    }
    switch (config.method.variant) {
      case Variant::Marginal:
        scores.push_back(nonconformity_marginal(ex.scores, *ex.label));
        break;
      case Variant::Adaptive:
        scores.push_back(nonconformity_adaptive(ex.scores, *ex.label));
        break;
      case Variant::Raps:
        scores.push_back(nonconformity_raps(ex.scores, *ex.label, config.method.raps_lambda,
                                            config.method.raps_kreg));
        break;
    }
  }

  FittedCalibrator out;
  out.config_ = config;
  out.n_ = static_cast<int>(scores.size());
  out.vocabulary_ = calibration.vocabulary;
  const double q = conformal_quantile(std::move(scores), config.alpha);
  out.infinite_ = std::isinf(q);
  out.q_hat_value_ = out.infinite_ ? 0.0 : q;
  return out;
}

double FittedCalibrator::q_hat() const { return infinite_ ? kInf : q_hat_value_; }

PredictionSet FittedCalibrator::predict_set(const ScoreVector& f) const {
  if (static_cast<int>(f.size()) != vocabulary_.size()) {
    throw InputError("score vector has " + std::to_string(f.size()) + " entries, expected " +
                     std::to_string(vocabulary_.size()));
  }
  const auto order = descending_order(f);
  PredictionSet out;

  if (infinite_) {
    out.indices = order;
    return out;
  }
  const double q = q_hat_value_;

  if (config_.method.variant == Variant::Marginal) {
    for (const ClassId y : order) {
      if (1.0 - f[static_cast<std::size_t>(y)] <= q) {
        out.indices.push_back(y);
      }
    }
    if (out.indices.empty()) {
      // No class clears the threshold; a dialogue system still has to answer.
      out.indices.push_back(order.front());
      out.argmax_fallback = true;
    }
    return out;
  }

  // Adaptive and RAPS both take the shortest prefix of the descending
  // permutation whose cumulative (penalized) mass reaches q.
  const bool raps = config_.method.variant == Variant::Raps;
  const double lambda = raps ? config_.method.raps_lambda : 0.0;
  const int kreg = raps ? config_.method.raps_kreg : 0;
  const int num_classes = vocabulary_.size();

  int sup = 0;  // sup over the empty set is 0
  double cumulative = 0.0;
  for (int j = 1; j <= num_classes; ++j) {
    cumulative += f[static_cast<std::size_t>(order[static_cast<std::size_t>(j - 1)])];
    const double term = cumulative + lambda * std::max(0, j - kreg);
    if (term < q) {
      sup = j;
    } else {
      break;
    }
  }
  const int k = std::min(sup + 1, num_classes);
  out.indices.assign(order.begin(), order.begin() + k);
  return out;
}

nlohmann::json FittedCalibrator::to_json() const {
  nlohmann::json j;
  j["method"] = variant_name(config_.method.variant);
  j["alpha"] = config_.alpha;
  if (infinite_) {
    j["q_hat"] = "inf";
  } else {
    j["q_hat"] = q_hat_value_;
  }
  j["n"] = n_;
  if (config_.method.variant == Variant::Raps) {
    j["raps_lambda"] = config_.method.raps_lambda;
    j["raps_kreg"] = config_.method.raps_kreg;
  }
  j["labels"] = vocabulary_.labels();
  return j;
}

FittedCalibrator FittedCalibrator::from_json(const nlohmann::json& j) {
  FittedCalibrator out;
  try {
    const auto variant = variant_from_name(j.at("method").get<std::string>());
    if (!variant) {
      throw InputError("unknown conformal method '" + j.at("method").get<std::string>() + "'");
    }
    out.config_.method.variant = *variant;
    out.config_.alpha = j.at("alpha").get<double>();
    if (*variant == Variant::Raps) {
      out.config_.method.raps_lambda = j.at("raps_lambda").get<double>();
      out.config_.method.raps_kreg = j.at("raps_kreg").get<int>();
    } else if (j.contains("raps_lambda") || j.contains("raps_kreg")) {
      throw InputError("raps parameters are only valid for the raps method");
    }
    out.n_ = j.at("n").get<int>();
    const auto& q = j.at("q_hat");
    if (q.is_string()) {
      if (q.get<std::string>() != "inf") {
        throw InputError("q_hat must be a number or \"inf\"");
      }
      out.infinite_ = true;
    } else {
      out.q_hat_value_ = q.get<double>();
    }
    out.vocabulary_ = LabelVocabulary(j.at("labels").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed calibrator artifact: ") + e.what());
  }
  if (out.n_ < 1) {
    throw InputError("calibrator artifact has n < 1");
  }
  out.config_.validate(out.vocabulary_.size());
  return out;
}

void FittedCalibrator::save(const std::filesystem::path& path) const {
  std::ofstream outfile(path, std::ios::trunc);
  if (!outfile) {
    throw InputError("cannot write file: " + path.string());
  }
  outfile << to_json().dump(2) << "\n";
}

FittedCalibrator FittedCalibrator::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open file: " + path.string());
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw InputError("malformed calibrator artifact: " + path.string());
  }
  return from_json(j);
}

}  // namespace cicc
