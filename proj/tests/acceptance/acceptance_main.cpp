// Acceptance suite: prints one line per criterion and exits nonzero if any
// hard criterion fails. Criterion 7 needs externally produced score dumps and
// is skipped (not failed) when CICC_TABLE2_DIR is unset.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "cicc/conformal.hpp"
#include "cicc/dataset_io.hpp"
#include "cicc/decision.hpp"
#include "cicc/evaluation.hpp"
#include "cicc/oos.hpp"
#include "cicc/split.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

using namespace cicc;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  if (!pass) {
    ++g_failures;
  }
}

void report_skip(int index, const std::string& name, const std::string& detail) {
  std::printf("[SKIP] criterion %d: %s (%s)\n", index, name.c_str(), detail.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const std::array<ConformalMethod, 3> kMethods = {
    ConformalMethod{Variant::Marginal, 0.0, 0},
    ConformalMethod{Variant::Adaptive, 0.0, 0},
    ConformalMethod{Variant::Raps, 0.01, 5},
};

// --------------------------------------------------------------------------
// 1. Coverage guarantee on the synthetic task.

void criterion_coverage() {
  const auto start = std::chrono::steady_clock::now();
  const int num_seeds = 20;
  std::array<double, 3> mean_coverage{};
  std::array<int, 3> seeds_ok{};

  for (int seed = 0; seed < num_seeds; ++seed) {
    const auto cal = testsupport::synthetic_dataset({}, 2000, 1000 + seed);
    const auto test = testsupport::synthetic_dataset({}, 2000, 9000 + seed);
    for (std::size_t m = 0; m < kMethods.size(); ++m) {
      const auto calibrator = FittedCalibrator::fit({kMethods[m], 0.1}, cal);
      int hits = 0;
      for (const auto& ex : test.examples) {
        if (calibrator.predict_set(ex.scores).contains(*ex.label)) {
          ++hits;
        }
      }
      const double coverage = static_cast<double>(hits) / static_cast<double>(test.size());
      mean_coverage[m] += coverage / num_seeds;
      if (coverage >= 0.875) {
        ++seeds_ok[m];
      }
    }
  }
  const double elapsed = seconds_since(start);

  bool pass = elapsed < 10.0;
  for (std::size_t m = 0; m < kMethods.size(); ++m) {
    pass = pass && mean_coverage[m] >= 0.89 && seeds_ok[m] >= 18;
  }
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "alpha=0.1: mean cov marginal=%.4f adaptive=%.4f raps=%.4f, seeds>=0.875: "
                "%d/%d/%d of 20, %.2fs",
                mean_coverage[0], mean_coverage[1], mean_coverage[2], seeds_ok[0], seeds_ok[1],
                seeds_ok[2], elapsed);
  report(1, "coverage guarantee", pass, detail);
}

// --------------------------------------------------------------------------
// 2. Oracle equivalence of predict_set.

void criterion_oracle() {
  std::mt19937_64 rng(777);
  int mismatches = 0;
  const int instances = 1000;
  for (int trial = 0; trial < instances; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 50);
    const double alpha = static_cast<double>(rng() % 10000) / 10000.0 * 0.99;
    const double lambda = static_cast<double>(rng() % 100) / 250.0;
    const int kreg = static_cast<int>(rng() % static_cast<unsigned>(k + 1));
    const auto cal = testsupport::synthetic_dataset({.num_classes = k}, n, rng());
    const auto f = testsupport::dirichlet(std::vector<double>(static_cast<std::size_t>(k), 0.8),
                                          rng);

    for (const Variant v : {Variant::Marginal, Variant::Adaptive, Variant::Raps}) {
      const auto calibrator = FittedCalibrator::fit({{v, lambda, kreg}, alpha}, cal);
      const auto actual = calibrator.predict_set(f);
      const auto expected = oracle::brute_predict(f, v, calibrator.q_hat(),
                                                  calibrator.q_hat_is_infinite(), lambda, kreg);
      if (actual.indices != expected) {
        ++mismatches;
      }
    }
  }
  report(2, "oracle equivalence", mismatches == 0,
         std::to_string(instances) + " instances x 3 methods, " + std::to_string(mismatches) +
             " mismatches");
}

// --------------------------------------------------------------------------
// 3. Marginal minimality of mean set size.

void criterion_marginal_minimality() {
  const int num_seeds = 20;
  std::array<double, 3> mean_size{};
  for (int seed = 0; seed < num_seeds; ++seed) {
    const auto cal = testsupport::synthetic_dataset({}, 2000, 3000 + seed);
    const auto test = testsupport::synthetic_dataset({}, 2000, 7000 + seed);
    for (std::size_t m = 0; m < kMethods.size(); ++m) {
      const auto calibrator = FittedCalibrator::fit({kMethods[m], 0.1}, cal);
      long long total = 0;
      for (const auto& ex : test.examples) {
        total += calibrator.predict_set(ex.scores).size();
      }
      mean_size[m] += static_cast<double>(total) / static_cast<double>(test.size()) / num_seeds;
    }
  }
  const bool pass =
      mean_size[0] <= mean_size[1] + 0.05 && mean_size[0] <= mean_size[2] + 0.05;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "mean |C| marginal=%.3f adaptive=%.3f raps=%.3f over 20 seeds", mean_size[0],
                mean_size[1], mean_size[2]);
  report(3, "marginal minimality", pass, detail);
}

// --------------------------------------------------------------------------
// 4. Metric identities against brute force.

std::vector<LabeledDecision> random_decision_list(std::mt19937_64& rng) {
  EngineConfig config;
  config.th = 2 + static_cast<int>(rng() % 8);
  const int num_classes = 4 + static_cast<int>(rng() % 8);
  const int count = 20 + static_cast<int>(rng() % 80);
  std::vector<LabeledDecision> out;
  for (int i = 0; i < count; ++i) {
    const int size = 1 + static_cast<int>(rng() % static_cast<unsigned>(num_classes));
    std::vector<ClassId> indices(static_cast<std::size_t>(num_classes));
    std::iota(indices.begin(), indices.end(), 0);
    deterministic_shuffle(indices, rng);
    indices.resize(static_cast<std::size_t>(size));
    PredictionSet set;
    set.indices = std::move(indices);
    std::optional<ClassId> truth;
    if (rng() % 8 != 0) {
      truth = static_cast<ClassId>(rng() % static_cast<unsigned>(num_classes));
    }
    out.push_back({decide(set, config), truth});
  }
  return out;
}

void criterion_metric_identities() {
  std::mt19937_64 rng(4242);
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto decisions = random_decision_list(rng);
    const auto report_actual = evaluate(decisions);
    const auto expected = oracle::brute_metrics(decisions);
    const bool same = report_actual.n == expected.n && report_actual.m == expected.m &&
                      report_actual.amb == expected.amb && report_actual.cov == expected.cov &&
                      report_actual.single == expected.single &&
                      report_actual.cq_size == expected.cq_size &&
                      report_actual.ssc == expected.ssc;
    if (!same) {
      ++failures;
      continue;
    }
    // Standalone SSC against the same brute-force stratification.
    std::vector<PredictionSet> sets;
    std::vector<std::optional<ClassId>> truths;
    for (const auto& d : decisions) {
      if (const auto* c = std::get_if<Confident>(&d.decision)) {
        PredictionSet s;
        s.indices = {c->intent};
        sets.push_back(s);
        truths.push_back(d.truth);
      } else if (const auto* cl = std::get_if<Clarify>(&d.decision)) {
        sets.push_back(cl->set);
        truths.push_back(d.truth);
      }
    }
    if (!sets.empty() && ssc_score(sets, truths) != expected.ssc) {
      ++failures;
    }
  }
  report(4, "metric identities", failures == 0,
         "200 random decision lists, exact match on Cov/Single/|CQ|/Amb/SSC, " +
             std::to_string(failures) + " mismatches");
}

// --------------------------------------------------------------------------
// 5. Structural Table-2 reproductions.

void criterion_structural() {
  std::mt19937_64 rng(99);
  std::string why;
  bool pass = true;

  // B3 at th=4: every input rejected, pre-rejection sets of exactly five.
  {
    EngineConfig config;
    config.th = 4;
    std::vector<LabeledDecision> decisions;
    long long raw_size = 0;
    for (int i = 0; i < 200; ++i) {
      const auto f = testsupport::dirichlet(std::vector<double>(10, 1.0), rng);
      const auto set = baseline_select(BaselineId::B3, f, 0.1);
      raw_size += set.size();
      decisions.push_back({decide(set, config), 0});
    }
    const auto result = evaluate(decisions);
    if (result.amb != 1.0 || raw_size != 200 * 5) {
      pass = false;
      why += "B3 ";
    }
  }

  // B2 with sum-normalized scores and 1-alpha >= 0.5: Single = 1.
  for (const double alpha : {0.5, 0.25, 0.1, 0.01}) {
    EngineConfig config;
    std::vector<LabeledDecision> decisions;
    for (int i = 0; i < 200; ++i) {
      const auto f = testsupport::dirichlet(std::vector<double>(8, 0.7), rng);
      decisions.push_back({decide(baseline_select(BaselineId::B2, f, alpha), config),
                           static_cast<ClassId>(rng() % 8)});
    }
    const auto result = evaluate(decisions);
    if (!result.single || *result.single != 1.0 || result.amb != 0.0) {
      pass = false;
      why += "B2 ";
      break;
    }
  }

  // All-singleton outcome: |CQ| serializes as an absent field / "-".
  {
    EngineConfig config;
    std::vector<LabeledDecision> decisions;
    for (int i = 0; i < 50; ++i) {
      PredictionSet set;
      set.indices = {static_cast<ClassId>(i % 3)};
      decisions.push_back({decide(set, config), i % 3});
    }
    const auto result = evaluate(decisions);
    const auto row = report_csv_row("mtod_like", "marginal", 0.01, 7, result);
    if (result.cq_size || row.find(",1,1,,0,") == std::string::npos ||
        report_pretty(result).find("|CQ|=-") == std::string::npos) {
      pass = false;
      why += "singleton-CQ ";
    }
  }

  report(5, "structural reproductions", pass,
         pass ? "B3 th=4 all-ambiguous at |C|=5; B2 single=1; absent |CQ| serialized"
              : "failed: " + why);
}

// --------------------------------------------------------------------------
// 6. Out-of-scope tuning dominates the vanilla configuration.

void criterion_oos() {
  const auto start = std::chrono::steady_clock::now();
  const auto dataset = testsupport::synthetic_oos_dataset(20, 1000, 1000, 0.005, 20240101);

  const auto tuned =
      tune_oos({Variant::Marginal}, dataset, default_oos_alphas(), default_oos_ths(20));

  // Vanilla operating point: alpha=0.01, th=7 on the same data.
  Dataset in_scope;
  in_scope.vocabulary = dataset.vocabulary;
  std::vector<bool> truth_oos;
  for (const auto& ex : dataset.examples) {
    truth_oos.push_back(ex.is_oos());
    if (!ex.is_oos()) {
      in_scope.examples.push_back(ex);
    }
  }
  const auto vanilla = FittedCalibrator::fit({{Variant::Marginal}, 0.01}, in_scope);
  std::vector<bool> vanilla_predictions;
  for (const auto& ex : dataset.examples) {
    vanilla_predictions.push_back(classify_oos(vanilla.predict_set(ex.scores), 7));
  }
  const double vanilla_f1 = f1_score(vanilla_predictions, truth_oos);
  const double elapsed = seconds_since(start);

  const bool pass = tuned.f1 >= 0.95 && tuned.auroc >= 0.95 && vanilla_f1 < tuned.f1 &&
                    elapsed < 30.0;
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "tuned f1=%.3f auroc=%.3f at 1-alpha=%.3f th=%d; vanilla f1=%.3f, %.2fs",
                tuned.f1, tuned.auroc, 1.0 - tuned.best_alpha, tuned.best_th, vanilla_f1,
                elapsed);
  report(6, "oos tuning", pass, detail);
}

// --------------------------------------------------------------------------
// 7. Conditional reproduction from externally produced score dumps.

void criterion_conditional() {
  const char* dir = std::getenv("CICC_TABLE2_DIR");
  if (dir == nullptr || *dir == '\0') {
    report_skip(7, "conditional reproduction",
                "optional: set CICC_TABLE2_DIR to a directory with cal.jsonl, test.jsonl and "
                "expected.json to run");
    return;
  }
  try {
    const std::filesystem::path base(dir);
    const auto cal = load_dataset(base / "cal.jsonl", FileFormat::Jsonl);
    const auto test = load_dataset(base / "test.jsonl", FileFormat::Jsonl);
    const auto expected = nlohmann::json::parse(testsupport::read_file(base / "expected.json"));
    const double alpha = expected.at("alpha").get<double>();

    EngineConfig config;
    config.th = expected.value("th", 7);
    const auto calibrator = FittedCalibrator::fit({{Variant::Marginal}, alpha}, cal);
    std::vector<LabeledDecision> decisions;
    for (const auto& ex : test.examples) {
      decisions.push_back({decide(calibrator.predict_set(ex.scores), config), ex.label});
    }
    const auto result = evaluate(decisions);

    const double want_cov = expected.at("cov").get<double>();
    bool pass = result.cov && std::abs(*result.cov - want_cov) <= 0.01;
    std::string detail = "cov=" + (result.cov ? format_double(*result.cov) : "-") +
                         " vs " + format_double(want_cov);
    if (expected.contains("cq_size")) {
      const double want_cq = expected.at("cq_size").get<double>();
      pass = pass && result.cq_size && std::abs(*result.cq_size - want_cq) <= 0.1;
      detail += ", |CQ|=" + (result.cq_size ? format_double(*result.cq_size) : "-") + " vs " +
                format_double(want_cq);
    }
    report(7, "conditional reproduction", pass, detail);
  } catch (const std::exception& e) {
    report(7, "conditional reproduction", false, std::string("error: ") + e.what());
  }
}

// --------------------------------------------------------------------------
// 8. Byte-identical reruns of every batch subcommand.

int run_quiet(const std::string& args) {
  const std::string command = std::string(CICC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_determinism() {
  testsupport::TempDir dir;
  const auto dataset = testsupport::synthetic_dataset({}, 400, 11);
  save_dataset_jsonl(dataset, dir.file("data.jsonl"));
  save_dataset_jsonl(testsupport::synthetic_oos_dataset(10, 150, 150, 0.01, 12),
                     dir.file("oos.jsonl"));

  bool pass = true;
  std::string why;
  const auto twice = [&](const std::string& name, const std::string& args_template,
                         const std::vector<std::string>& outputs) {
    for (const char* tag : {"a", "b"}) {
      std::string args = args_template;
      std::size_t pos;
      while ((pos = args.find("{}")) != std::string::npos) {
        args.replace(pos, 2, dir.file(std::string(tag)).string());
      }
      if (run_quiet(args) != 0) {
        pass = false;
        why += name + "-exit ";
        return;
      }
    }
    for (const auto& suffix : outputs) {
      if (testsupport::read_file(dir.file("a" + suffix)) !=
          testsupport::read_file(dir.file("b" + suffix))) {
        pass = false;
        why += name + " ";
      }
    }
  };

  const std::string data = dir.file("data.jsonl").string();
  const std::string oos = dir.file("oos.jsonl").string();
  twice("split", "split --input " + data + " --output {}_split --seed 3",
        {"_split.train", "_split.cal", "_split.test"});
  twice("calibrate", "calibrate --input " + data + " --alpha 0.1 --output {}_art.json",
        {"_art.json"});
  if (pass) {
    twice("evaluate",
          "evaluate --input " + data + " --artifact " + dir.file("a_art.json").string() +
              " --setting d --output {}_report.csv",
          {"_report.csv"});
  }
  twice("sweep",
        "sweep --cal " + data + " --test " + data + " --alphas 0.2,0.1 --output {}_sweep.csv",
        {"_sweep.csv"});
  twice("oos-tune", "oos-tune --input " + oos + " --output {}_tune.json --trace-csv {}_trace.csv",
        {"_tune.json", "_trace.csv"});

  report(8, "batch determinism", pass,
         pass ? "split/calibrate/evaluate/sweep/oos-tune rerun byte-identical"
              : "differing outputs: " + why);
}

// --------------------------------------------------------------------------
// 9. Alpha-sweep monotonicity, exact per seed.

void criterion_sweep_monotonicity() {
  const std::vector<double> alphas{0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.0};  // decreasing
  const std::vector<ConformalMethod> methods(kMethods.begin(), kMethods.end());
  bool pass = true;
  for (int seed = 0; seed < 20 && pass; ++seed) {
    const auto cal = testsupport::synthetic_dataset({}, 1000, 500 + seed);
    const auto test = testsupport::synthetic_dataset({}, 1000, 800 + seed);
    const auto rows = alpha_sweep(methods, alphas, cal, test, 7);
    for (std::size_t m = 0; m < methods.size() && pass; ++m) {
      for (std::size_t a = 1; a < alphas.size(); ++a) {
        const auto& prev = rows[m * alphas.size() + a - 1];
        const auto& cur = rows[m * alphas.size() + a];
        if (cur.cov < prev.cov || cur.mean_set_size < prev.mean_set_size) {
          pass = false;
          break;
        }
      }
    }
  }
  report(9, "alpha-sweep monotonicity", pass,
         "20 seeds x 3 methods x 7 alphas, coverage and mean size non-decreasing as alpha "
         "decreases");
}

}  // namespace

int main() {
  criterion_coverage();
  criterion_oracle();
  criterion_marginal_minimality();
  criterion_metric_identities();
  criterion_structural();
  criterion_oos();
  criterion_conditional();
  criterion_determinism();
  criterion_sweep_monotonicity();

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
