#include "cicc/dataset.hpp"

#include <cmath>
#include <numeric>

namespace cicc {

LabelVocabulary::LabelVocabulary(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw InputError("label vocabulary needs at least 2 labels, got " +
                     std::to_string(labels_.size()));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const auto& name = labels_[i];
    if (name.empty()) {
      throw InputError("label " + std::to_string(i) + " is empty");
    }
    if (name == kOosLabel) {
      throw InputError(std::string("reserved label name '") + std::string(kOosLabel) +
                       "' cannot appear in the vocabulary");
    }
    const auto [it, inserted] = index_.emplace(name, static_cast<ClassId>(i));
    (void)it;
    if (!inserted) {
      throw InputError("duplicate label name '" + name + "'");
    }
  }
}

const std::string& LabelVocabulary::name(ClassId id) const {
  if (id < 0 || id >= size()) {
    throw InputError("class id " + std::to_string(id) + " out of range [0, " +
                     std::to_string(size()) + ")");
  }
  return labels_[static_cast<std::size_t>(id)];
}

std::optional<ClassId> LabelVocabulary::find(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

void validate_and_normalize_scores(ScoreVector& scores, int num_classes,
                                   const std::string& context,
                                   std::vector<std::string>* warnings) {
  if (static_cast<int>(scores.size()) != num_classes) {
    throw InputError(context + ": expected " + std::to_string(num_classes) +
                     " scores, got " + std::to_string(scores.size()));
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0) || !std::isfinite(scores[i])) {
      throw InputError(context + ": score " + std::to_string(i) +
                       " is negative or not finite");
    }
  }
  const double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
  if (sum <= 0.0) {
    throw InputError(context + ": all scores are zero");
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    for (auto& s : scores) {
      s /= sum;
    }
    if (warnings != nullptr) {
      warnings->push_back(context + ": scores summed to " + format_double(sum) +
                          "; renormalized to 1");
    }
  }
}

void SplitSpec::validate() const {
  const double parts[] = {train, calibration, test};
  for (const double p : parts) {
    if (!(p > 0.0 && p < 1.0)) {
      throw InputError("split proportions must each lie in (0,1)");
    }
  }
  if (std::abs(train + calibration + test - 1.0) > 1e-9) {
    throw InputError("split proportions must sum to 1");
  }
}

}  // namespace cicc
