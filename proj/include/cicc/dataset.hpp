#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cicc/common.hpp"

namespace cicc {

// Classifier output: K non-negative entries that sum to one once ingested.
using ScoreVector = std::vector<double>;

// Ordered label set; a name's index is its class id and is stable for the
// lifetime of the artifact.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  explicit LabelVocabulary(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& name(ClassId id) const;
  std::optional<ClassId> find(std::string_view label) const;
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const LabelVocabulary& a, const LabelVocabulary& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, ClassId> index_;
};

struct LabeledExample {
  ScoreVector scores;
  std::optional<ClassId> label;  // nullopt marks an out-of-scope example
  std::optional<std::string> utterance;

  bool is_oos() const { return !label.has_value(); }
};

enum class DatasetRole { Unspecified, Train, Calibration, Test };

struct Dataset {
  LabelVocabulary vocabulary;
  std::vector<LabeledExample> examples;
  DatasetRole role = DatasetRole::Unspecified;

  int num_classes() const { return vocabulary.size(); }
  std::size_t size() const { return examples.size(); }
};

// Checks length and non-negativity, then renormalizes in place when the sum
// drifts from one by more than 1e-6 (real score dumps carry float noise).
// A renormalization note goes to `warnings` when provided. Throws InputError
// on violations; `context` names the offending row in messages.
void validate_and_normalize_scores(ScoreVector& scores, int num_classes,
                                   const std::string& context,
                                   std::vector<std::string>* warnings = nullptr);

struct SplitSpec {
  double train = 0.6;
  double calibration = 0.2;
  double test = 0.2;

  enum class Strategy { Stratified, Random };
  Strategy strategy = Strategy::Stratified;
  std::uint64_t seed = kDefaultSeed;

  // Proportions each in (0,1) and summing to 1 within 1e-9.
  void validate() const;
};

}  // namespace cicc
