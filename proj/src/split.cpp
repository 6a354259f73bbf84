#include "cicc/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace cicc {

namespace {

// Largest-remainder allocation of n items over the three proportions.
// Remainder ties go to the earlier split (train, calibration, test).
std::array<std::size_t, 3> allocate_counts(std::size_t n, const SplitSpec& spec) {
  const std::array<double, 3> proportions = {spec.train, spec.calibration, spec.test};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = static_cast<double>(n) * proportions[i];
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainders[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (std::size_t extra = 0; extra < n - assigned; ++extra) {
    ++counts[static_cast<std::size_t>(order[extra % 3])];
  }
  return counts;
}

Dataset subset(const Dataset& source, const std::vector<std::size_t>& indices,
               DatasetRole role) {
  Dataset out;
  out.vocabulary = source.vocabulary;
  out.role = role;
  out.examples.reserve(indices.size());
  for (const std::size_t i : indices) {
    out.examples.push_back(source.examples[i]);
  }
  return out;
}

}  // namespace

SplitResult stratified_split(const Dataset& dataset, const SplitSpec& spec) {
  spec.validate();
  if (dataset.examples.empty()) {
    throw InputError("cannot split an empty dataset");
  }

  SplitResult result;

  // Group example indices by label; the out-of-scope marker is its own
  // stratum, ordered after the in-scope classes.
  std::map<int, std::vector<std::size_t>> strata;  // class id, K = OOS
  const int oos_key = dataset.num_classes();
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    const auto& ex = dataset.examples[i];
    strata[ex.label ? *ex.label : oos_key].push_back(i);
  }

  bool stratified = spec.strategy == SplitSpec::Strategy::Stratified;
  if (stratified) {
    for (const auto& [key, indices] : strata) {
      if (indices.size() < 3) {
        const std::string name =
            key == oos_key ? std::string(kOosLabel) : dataset.vocabulary.name(key);
        result.warnings.push_back("label '" + name + "' has only " +
                                  std::to_string(indices.size()) +
                                  " example(s); stratified sampling is impossible, "
                                  "falling back to random sampling");
        result.used_random_fallback = true;
        stratified = false;
        break;
      }
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> cal_idx;
  std::vector<std::size_t> test_idx;

  const auto distribute = [&](std::vector<std::size_t>& pool) {
    deterministic_shuffle(pool, rng);
    const auto counts = allocate_counts(pool.size(), spec);
    auto it = pool.begin();
    train_idx.insert(train_idx.end(), it, it + static_cast<std::ptrdiff_t>(counts[0]));
    it += static_cast<std::ptrdiff_t>(counts[0]);
    cal_idx.insert(cal_idx.end(), it, it + static_cast<std::ptrdiff_t>(counts[1]));
    it += static_cast<std::ptrdiff_t>(counts[1]);
    test_idx.insert(test_idx.end(), it, pool.end());
  };

  if (stratified) {
    for (auto& [key, indices] : strata) {
      (void)key;
      distribute(indices);
    }
  } else {
    std::vector<std::size_t> all(dataset.examples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    distribute(all);
  }

  result.train = subset(dataset, train_idx, DatasetRole::Train);
  result.calibration = subset(dataset, cal_idx, DatasetRole::Calibration);
  result.test = subset(dataset, test_idx, DatasetRole::Test);
  return result;
}

ScoreVector normalize_truncated_scores(const std::vector<std::pair<ClassId, double>>& raw,
                                       int num_classes) {
  if (raw.empty()) {
    throw InputError("no raw scores given");
  }
  ScoreVector out(static_cast<std::size_t>(num_classes), 0.0);
  std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
  double sum = 0.0;
  for (const auto& [id, score] : raw) {
    if (id < 0 || id >= num_classes) {
      throw InputError("raw score class id " + std::to_string(id) + " out of range [0, " +
                       std::to_string(num_classes) + ")");
    }
    if (seen[static_cast<std::size_t>(id)]) {
      throw InputError("duplicate class id " + std::to_string(id) + " in raw scores");
    }
    if (!(score >= 0.0) || score > 100.0 || !std::isfinite(score)) {
      throw InputError("raw score for class " + std::to_string(id) +
                       " must lie in [0, 100], got " + format_double(score));
    }
    seen[static_cast<std::size_t>(id)] = true;
    sum += score;
  }
  if (sum <= 0.0) {
    throw InputError("all raw scores are zero");
  }
  for (const auto& [id, score] : raw) {
    out[static_cast<std::size_t>(id)] = score / sum;
  }
  return out;
}

Dataset make_open_domain_oos(const Dataset& in_scope, const Dataset& outlier_source,
                             std::uint64_t seed) {
  if (in_scope.examples.empty() || outlier_source.examples.empty()) {
    throw InputError("both the in-scope and the outlier dataset must be non-empty");
  }
  if (outlier_source.num_classes() != in_scope.num_classes()) {
    throw InputError("outlier score vectors must be over the in-scope vocabulary: expected " +
                     std::to_string(in_scope.num_classes()) + " classes, got " +
                     std::to_string(outlier_source.num_classes()));
  }
  const std::size_t needed = in_scope.examples.size();
  if (outlier_source.examples.size() < needed) {
    throw InputError("outlier source smaller than in-scope count: shortfall " +
                     std::to_string(needed - outlier_source.examples.size()));
  }

  Dataset out;
  out.vocabulary = in_scope.vocabulary;
  out.examples.reserve(2 * needed);
  out.examples = in_scope.examples;
  for (std::size_t i = 0; i < needed; ++i) {
    LabeledExample ex = outlier_source.examples[i];
    ex.label.reset();
    out.examples.push_back(std::move(ex));
  }
  std::mt19937_64 rng(seed);
  deterministic_shuffle(out.examples, rng);
  return out;
}

std::map<std::string, int> class_counts(const Dataset& dataset) {
  std::map<std::string, int> counts;
  for (const auto& ex : dataset.examples) {
    const std::string name =
        ex.label ? dataset.vocabulary.name(*ex.label) : std::string(kOosLabel);
    ++counts[name];
  }
  return counts;
}

}  // namespace cicc
