#pragma once

#include <map>
#include <utility>
#include <vector>

#include "cicc/dataset.hpp"

namespace cicc {

struct SplitResult {
  Dataset train;
  Dataset calibration;
  Dataset test;
  // Set when stratified sampling was impossible (some label has fewer than
  // 3 examples) and the whole dataset fell back to random sampling.
  bool used_random_fallback = false;
  std::vector<std::string> warnings;
};

// Deterministic for a fixed seed. Stratified allocation uses the largest
// remainder per class, so every split count is within one example of the
// exact proportion. The three splits partition the input.
SplitResult stratified_split(const Dataset& dataset, const SplitSpec& spec);

// Truncated commercial classifier output: only the listed classes carry raw
// scores in [0,100]; the result has the listed classes at raw/sum and exact
// zeros everywhere else.
ScoreVector normalize_truncated_scores(const std::vector<std::pair<ClassId, double>>& raw,
                                       int num_classes);

// Half in-scope examples with their original labels, half outliers relabeled
// as out-of-scope, shuffled deterministically by seed. The outlier examples
// must already carry score vectors over the in-scope vocabulary.
Dataset make_open_domain_oos(const Dataset& in_scope, const Dataset& outlier_source,
                             std::uint64_t seed);

// Per-label example counts, keyed by label name ("__oos__" for outliers).
std::map<std::string, int> class_counts(const Dataset& dataset);

}  // namespace cicc
