// Command-line surface for the conformal intent classification and
// clarification pipeline: splitting, calibration, evaluation, alpha sweeps,
// out-of-scope tuning, an interactive demo and a serving endpoint.

#include <atomic>
#include <cctype>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "cicc/conformal.hpp"
#include "cicc/dataset_io.hpp"
#include "cicc/decision.hpp"
#include "cicc/evaluation.hpp"
#include "cicc/gen_client.hpp"
#include "cicc/oos.hpp"
#include "cicc/split.hpp"

namespace {

using nlohmann::json;

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) {
    std::cerr << "warning: " << w << "\n";
  }
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    try {
      std::size_t consumed = 0;
      values.push_back(std::stod(token, &consumed));
      if (consumed != token.size()) {
        throw std::invalid_argument(token);
      }
    } catch (const std::exception&) {
      throw cicc::InputError(flag + ": '" + token + "' is not a number");
    }
  }
  if (values.empty()) {
    throw cicc::InputError(flag + ": empty list");
  }
  return values;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> values;
  for (const double v : parse_double_list(text, flag)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw cicc::InputError(flag + ": expected integers");
    }
    values.push_back(i);
  }
  return values;
}

struct DatasetArgs {
  std::string input;
  std::string format = "jsonl";
  std::string labels;

  void add_to(CLI::App* cmd, const std::string& input_desc) {
    cmd->add_option("--input", input, input_desc)->required();
    cmd->add_option("--format", format, "Input format: jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    cmd->add_option("--labels", labels, "Labels file for csv input (one name per line)");
  }

  cicc::Dataset load() const { return load_path(input); }

  cicc::Dataset load_path(const std::string& path) const {
    const auto format_id = cicc::file_format_from_name(format);
    if (!format_id) {
      throw cicc::InputError("unknown format '" + format + "'");
    }
    std::optional<std::filesystem::path> labels_path;
    if (!labels.empty()) {
      labels_path = labels;
    }
    std::vector<std::string> warnings;
    auto dataset = cicc::load_dataset(path, *format_id, labels_path, &warnings);
    print_warnings(warnings);
    return dataset;
  }
};

// A negative kreg flag means "not given": default to min(5, K).
int effective_kreg(int flag_value, int num_classes) {
  return flag_value >= 0 ? flag_value : std::min(5, num_classes);
}

cicc::ConformalMethod method_from_flags(const std::string& method, double raps_lambda,
                                        int raps_kreg) {
  const auto variant = cicc::variant_from_name(method);
  if (!variant) {
    throw cicc::InputError("unknown method '" + method + "'");
  }
  cicc::ConformalMethod out;
  out.variant = *variant;
  out.raps_lambda = raps_lambda;
  out.raps_kreg = raps_kreg;
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw cicc::InputError("cannot write file: " + path);
  }
  return out;
}

std::string resolve_client_url(const std::string& flag_value) {
  if (const char* env = std::getenv("CICC_CLIENT_URL"); env != nullptr && *env != '\0') {
    return env;
  }
  return flag_value;
}

// Builds the question generator for demo/serve. Generative modes require a
// client url; the engine still falls back to templates on client failure.
std::unique_ptr<cicc::CqGenerator> make_generator(cicc::CqMode mode, const std::string& url,
                                                  const std::string& prompt_spec_path,
                                                  std::unique_ptr<cicc::GenerativeClient>& client) {
  if (mode == cicc::CqMode::Template) {
    return std::make_unique<cicc::TemplateCq>();
  }
  if (url.empty()) {
    throw cicc::InputError("generative cq mode needs --client-url or CICC_CLIENT_URL");
  }
  cicc::ClientConfig config;
  config.url = url;
  client = std::make_unique<cicc::HttpGenerativeClient>(config);
  auto spec = prompt_spec_path.empty() ? cicc::PromptSpec::defaults()
                                       : cicc::PromptSpec::load(prompt_spec_path);
  return std::make_unique<cicc::GenerativeCq>(*client, std::move(spec), mode,
                                              config.max_reply_length);
}

// ---------------------------------------------------------------------------
// split

struct SplitOptions {
  DatasetArgs data;
  std::string output;
  std::string proportions = "0.6,0.2,0.2";
  std::string strategy = "stratified";
  std::uint64_t seed = cicc::kDefaultSeed;
};

void print_counts(const std::string& name, const cicc::Dataset& dataset) {
  std::cout << name << " (" << dataset.size() << " examples)\n";
  const auto counts = cicc::class_counts(dataset);
  for (const auto& label : dataset.vocabulary.labels()) {
    const auto it = counts.find(label);
    std::cout << "  " << label << ": " << (it == counts.end() ? 0 : it->second) << "\n";
  }
  if (const auto it = counts.find(std::string(cicc::kOosLabel)); it != counts.end()) {
    std::cout << "  " << cicc::kOosLabel << ": " << it->second << "\n";
  }
}

int cmd_split(const SplitOptions& opts) {
  const auto dataset = opts.data.load();

  cicc::SplitSpec spec;
  const auto proportions = parse_double_list(opts.proportions, "--proportions");
  if (proportions.size() != 3) {
    throw cicc::InputError("--proportions needs exactly three values");
  }
  spec.train = proportions[0];
  spec.calibration = proportions[1];
  spec.test = proportions[2];
  spec.strategy = opts.strategy == "random" ? cicc::SplitSpec::Strategy::Random
                                            : cicc::SplitSpec::Strategy::Stratified;
  spec.seed = opts.seed;

  const auto result = cicc::stratified_split(dataset, spec);
  print_warnings(result.warnings);

  cicc::save_dataset_jsonl(result.train, opts.output + ".train");
  cicc::save_dataset_jsonl(result.calibration, opts.output + ".cal");
  cicc::save_dataset_jsonl(result.test, opts.output + ".test");

  print_counts("train", result.train);
  print_counts("cal", result.calibration);
  print_counts("test", result.test);
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
  DatasetArgs data;
  std::string output;
  std::string method = "marginal";
  double alpha = 0.1;
  double raps_lambda = 0.01;
  int raps_kreg = -1;
};

int cmd_calibrate(const CalibrateOptions& opts) {
  const auto dataset = opts.data.load();
  for (const auto& ex : dataset.examples) {
    if (ex.is_oos()) {
      throw cicc::InputError(
          "calibration file contains out-of-scope rows; plain calibration needs in-scope "
          "rows only (use the oos-tune subcommand to tune with out-of-scope data)");
    }
  }
  cicc::CalibratorConfig config;
  config.method = method_from_flags(opts.method, opts.raps_lambda,
                                    effective_kreg(opts.raps_kreg, dataset.num_classes()));
  config.alpha = opts.alpha;

  const auto calibrator = cicc::FittedCalibrator::fit(config, dataset);
  calibrator.save(opts.output);
  std::cout << "method=" << cicc::variant_name(config.method.variant)
            << " alpha=" << cicc::format_double(config.alpha)
            << " n=" << calibrator.calibration_size()
            << " q_hat=" << cicc::format_double(calibrator.q_hat()) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  DatasetArgs data;
  std::string artifact;
  std::string output;
  std::string baseline;
  std::string setting;
  int th = 7;
  double alpha = -1.0;  // <0: use the artifact's alpha
};

int cmd_evaluate(const EvaluateOptions& opts) {
  const auto calibrator = cicc::FittedCalibrator::load(opts.artifact);
  const auto test = opts.data.load();
  if (!(calibrator.vocabulary() == test.vocabulary)) {
    throw cicc::InputError("artifact and test file use different label vocabularies");
  }

  cicc::EngineConfig engine;
  engine.th = opts.th;
  const double alpha = opts.alpha >= 0.0 ? opts.alpha : calibrator.config().alpha;

  std::optional<cicc::BaselineId> baseline;
  if (!opts.baseline.empty()) {
    baseline = cicc::baseline_from_name(opts.baseline);
    if (!baseline) {
      throw cicc::InputError("unknown baseline '" + opts.baseline + "'");
    }
  }

  std::vector<cicc::LabeledDecision> decisions;
  decisions.reserve(test.examples.size());
  for (const auto& ex : test.examples) {
    const cicc::PredictionSet set = baseline
                                        ? cicc::baseline_select(*baseline, ex.scores, alpha)
                                        : calibrator.predict_set(ex.scores);
    decisions.push_back({cicc::decide(set, engine), ex.label});
  }
  const auto report = cicc::evaluate(decisions);

  const std::string setting =
      opts.setting.empty() ? std::filesystem::path(opts.data.input).stem().string()
                           : opts.setting;
  const std::string method = baseline
                                 ? std::string(cicc::baseline_name(*baseline))
                                 : std::string(cicc::variant_name(
                                       calibrator.config().method.variant));

  if (!opts.output.empty()) {
    auto out = open_output(opts.output);
    out << cicc::report_csv_header() << "\n";
    out << cicc::report_csv_row(setting, method, alpha, opts.th, report) << "\n";
  }
  std::cout << "setting=" << setting << " method=" << method
            << " alpha=" << cicc::format_double(alpha) << " th=" << opts.th << "\n";
  std::cout << cicc::report_pretty(report) << "\n";
  for (const auto& [size, stats] : report.per_stratum) {
    std::cout << "stratum size=" << size << ": count=" << stats.count
              << " coverage=" << cicc::format_double(stats.coverage) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string cal;
  std::string test;
  std::string format = "jsonl";
  std::string labels;
  std::string output;
  std::string alphas = "0.2,0.1,0.05,0.02,0.01";
  int th = 7;
  double raps_lambda = 0.01;
  int raps_kreg = -1;
};

int cmd_sweep(const SweepOptions& opts) {
  DatasetArgs args;
  args.format = opts.format;
  args.labels = opts.labels;
  const auto cal = args.load_path(opts.cal);
  const auto test = args.load_path(opts.test);

  const auto alphas = parse_double_list(opts.alphas, "--alphas");
  std::vector<cicc::ConformalMethod> methods = {
      {cicc::Variant::Marginal, 0.0, 0},
      {cicc::Variant::Adaptive, 0.0, 0},
      {cicc::Variant::Raps, opts.raps_lambda, effective_kreg(opts.raps_kreg, cal.num_classes())},
  };

  const auto rows = cicc::alpha_sweep(methods, alphas, cal, test, opts.th);
  std::string text = cicc::sweep_csv_header() + "\n";
  for (const auto& row : rows) {
    text += cicc::sweep_csv_row(row) + "\n";
  }
  if (!opts.output.empty()) {
    open_output(opts.output) << text;
  }
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------
// oos-tune

struct OosTuneOptions {
  DatasetArgs data;
  std::string output;
  std::string trace_csv;
  std::string method = "marginal";
  std::string alphas;
  std::string ths;
  double raps_lambda = 0.01;
  int raps_kreg = -1;
};

int cmd_oos_tune(const OosTuneOptions& opts) {
  const auto dataset = opts.data.load();
  const auto method = method_from_flags(
      opts.method, opts.raps_lambda, effective_kreg(opts.raps_kreg, dataset.num_classes()));
  const auto alphas = opts.alphas.empty() ? cicc::default_oos_alphas()
                                          : parse_double_list(opts.alphas, "--alphas");
  const auto ths = opts.ths.empty() ? cicc::default_oos_ths(dataset.num_classes())
                                    : parse_int_list(opts.ths, "--ths");

  const auto result = cicc::tune_oos(method, dataset, alphas, ths);
  if (!opts.output.empty()) {
    open_output(opts.output) << result.to_json().dump(2) << "\n";
  }
  if (!opts.trace_csv.empty()) {
    open_output(opts.trace_csv) << result.to_csv();
  }
  std::cout << "best_alpha=" << cicc::format_double(result.best_alpha)
            << " best_th=" << result.best_th << " f1=" << cicc::format_double(result.f1)
            << " auroc=" << cicc::format_double(result.auroc) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// demo

struct DemoOptions {
  std::string artifact;
  std::string scores;
  std::string score_url;
  std::string client_url;
  std::string prompt_spec;
  std::string cq_mode = "template";
  int th = 7;
};

// POST {"utterance": ...} -> {"scores": [...]} against a scoring endpoint.
cicc::ScoreVector fetch_scores(const std::string& url, const std::string& utterance,
                               int num_classes) {
  const auto scheme_end = url.find("://");
  const auto path_start =
      scheme_end == std::string::npos ? std::string::npos : url.find('/', scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(5, 0);
  json request;
  request["utterance"] = utterance;
  const auto result = client.Post(path, request.dump(), "application/json");
  if (!result || result->status != 200) {
    throw cicc::InputError("scoring endpoint request failed");
  }
  const json reply = json::parse(result->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("scores") || !reply["scores"].is_array()) {
    throw cicc::InputError("scoring endpoint reply is not a {\"scores\": ...} object");
  }
  cicc::ScoreVector scores = reply["scores"].get<std::vector<double>>();
  cicc::validate_and_normalize_scores(scores, num_classes, "scoring endpoint reply");
  return scores;
}

int cmd_demo(const DemoOptions& opts) {
  const auto calibrator = cicc::FittedCalibrator::load(opts.artifact);
  if (opts.scores.empty() == opts.score_url.empty()) {
    throw cicc::InputError("demo needs exactly one scores source: --scores or --score-url");
  }

  std::optional<cicc::ScoreLookup> lookup;
  if (!opts.scores.empty()) {
    std::vector<std::string> warnings;
    lookup = cicc::load_score_lookup(opts.scores, &warnings);
    print_warnings(warnings);
    if (!(lookup->vocabulary == calibrator.vocabulary())) {
      throw cicc::InputError("artifact and scores file use different label vocabularies");
    }
  }

  const auto mode = cicc::cq_mode_from_name(opts.cq_mode);
  if (!mode) {
    throw cicc::InputError("unknown cq mode '" + opts.cq_mode + "'");
  }
  std::unique_ptr<cicc::GenerativeClient> client;
  auto generator =
      make_generator(*mode, resolve_client_url(opts.client_url), opts.prompt_spec, client);

  cicc::EngineConfig engine;
  engine.th = opts.th;
  engine.cq_mode = *mode;
  engine.validate();

  std::vector<std::string> pending;  // option label names of the last question
  std::string line;
  std::cout << "> " << std::flush;
  while (std::getline(std::cin, line)) {
    if (!pending.empty() && !line.empty() && line.size() <= 9 &&
        std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return std::isdigit(c) != 0; })) {
      const int choice = std::atoi(line.c_str());
      if (choice >= 1 && choice <= static_cast<int>(pending.size())) {
        std::cout << "intent: " << pending[static_cast<std::size_t>(choice - 1)] << "\n";
        pending.clear();
      } else {
        std::cout << "choose a number between 1 and " << pending.size() << "\n";
      }
      std::cout << "> " << std::flush;
      continue;
    }
    pending.clear();
    if (line.empty()) {
      std::cout << "> " << std::flush;
      continue;
    }

    std::optional<cicc::ScoreVector> scores;
    if (lookup) {
      const auto it = lookup->by_utterance.find(line);
      if (it != lookup->by_utterance.end()) {
        scores = it->second;
      }
    } else {
      try {
        scores = fetch_scores(opts.score_url, line, calibrator.vocabulary().size());
      } catch (const std::exception& e) {
        std::cerr << "warning: " << e.what() << "\n";
      }
    }
    if (!scores) {
      std::cout << "no scores for utterance: " << line << "\n> " << std::flush;
      continue;
    }

    const auto decision = cicc::handle_utterance(line, *scores, calibrator, engine, *generator);
    if (const auto* confident = std::get_if<cicc::Confident>(&decision)) {
      if (confident->from_fallback) {
        std::cerr << "note: no class met the confidence threshold; using the top-scoring "
                     "intent\n";
      }
      std::cout << "intent: " << calibrator.vocabulary().name(confident->intent) << "\n";
    } else if (const auto* clarify = std::get_if<cicc::Clarify>(&decision)) {
      std::cout << "question: " << clarify->question << "\n";
      for (std::size_t i = 0; i < clarify->set.indices.size(); ++i) {
        const auto& name = calibrator.vocabulary().name(clarify->set.indices[i]);
        std::cout << "  " << (i + 1) << ") " << name << "\n";
        pending.push_back(name);
      }
    } else {
      std::cout << "response: " << std::get<cicc::Ambiguous>(decision).response << "\n";
    }
    std::cout << "> " << std::flush;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// serve

httplib::Server* g_server = nullptr;

void handle_shutdown(int) {
  if (g_server != nullptr) {
    g_server->stop();
  }
}

struct ServeOptions {
  std::string artifact;
  std::string client_url;
  std::string prompt_spec;
  std::string cq_mode = "template";
  int th = 7;
  int port = 8080;
};

int cmd_serve(const ServeOptions& opts) {
  const auto calibrator = cicc::FittedCalibrator::load(opts.artifact);
  const auto mode = cicc::cq_mode_from_name(opts.cq_mode);
  if (!mode) {
    throw cicc::InputError("unknown cq mode '" + opts.cq_mode + "'");
  }
  std::unique_ptr<cicc::GenerativeClient> client;
  auto generator =
      make_generator(*mode, resolve_client_url(opts.client_url), opts.prompt_spec, client);

  cicc::EngineConfig engine;
  engine.th = opts.th;
  engine.cq_mode = *mode;
  engine.validate();

  httplib::Server server;
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  server.Post("/decide", [&](const httplib::Request& req, httplib::Response& res) {
    const auto fail = [&res](int status, const std::string& message) {
      json err;
      err["error"] = message;
      res.status = status;
      res.set_content(err.dump(), "application/json");
    };
    try {
      const json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        return fail(400, "body: invalid JSON object");
      }
      if (!body.contains("scores") || !body["scores"].is_array()) {
        return fail(400, "scores: required array field");
      }
      cicc::ScoreVector scores;
      scores.reserve(body["scores"].size());
      for (const auto& v : body["scores"]) {
        if (!v.is_number()) {
          return fail(400, "scores: entries must be numbers");
        }
        scores.push_back(v.get<double>());
      }
      std::optional<std::string> utterance;
      if (body.contains("utterance")) {
        if (!body["utterance"].is_string()) {
          return fail(400, "utterance: must be a string");
        }
        utterance = body["utterance"].get<std::string>();
      }
      try {
        cicc::validate_and_normalize_scores(scores, calibrator.vocabulary().size(), "scores");
      } catch (const cicc::InputError& e) {
        return fail(400, e.what());
      }
      const auto decision =
          cicc::handle_utterance(utterance, scores, calibrator, engine, *generator);
      if (const auto* confident = std::get_if<cicc::Confident>(&decision);
          confident != nullptr && confident->from_fallback) {
        std::cerr << "note: empty prediction set; answered with the top-scoring intent\n";
      }
      res.set_content(cicc::decision_to_json(decision, calibrator.vocabulary()).dump(),
                      "application/json");
    } catch (const std::exception&) {
      fail(500, "internal error");
    }
  });

  g_server = &server;
  std::signal(SIGINT, handle_shutdown);
  std::signal(SIGTERM, handle_shutdown);

  std::cerr << "listening on port " << opts.port << "\n";
  if (!server.listen("0.0.0.0", opts.port)) {
    g_server = nullptr;
    throw cicc::InputError("cannot listen on port " + std::to_string(opts.port));
  }
  g_server = nullptr;
  std::cerr << "shut down\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal intent classification and clarification toolkit"};
  app.require_subcommand(1);

  SplitOptions split_opts;
  auto* split = app.add_subcommand("split", "Split a dataset into train/cal/test files");
  split_opts.data.add_to(split, "Dataset file");
  split->add_option("--output", split_opts.output,
                    "Output base path; writes <base>.train/.cal/.test")
      ->required();
  split->add_option("--proportions", split_opts.proportions,
                    "Comma-separated train,cal,test proportions");
  split->add_option("--strategy", split_opts.strategy, "stratified or random")
      ->check(CLI::IsMember({"stratified", "random"}));
  split->add_option("--seed", split_opts.seed, "RNG seed");

  CalibrateOptions cal_opts;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a conformal calibrator artifact");
  cal_opts.data.add_to(calibrate, "Calibration dataset file (in-scope rows only)");
  calibrate->add_option("--output", cal_opts.output, "Calibrator artifact JSON path")
      ->required();
  calibrate->add_option("--method", cal_opts.method, "marginal, adaptive or raps")
      ->check(CLI::IsMember({"marginal", "adaptive", "raps"}));
  calibrate->add_option("--alpha", cal_opts.alpha, "Error level in [0,1)");
  calibrate->add_option("--raps-lambda", cal_opts.raps_lambda, "RAPS rank penalty");
  calibrate->add_option("--raps-kreg", cal_opts.raps_kreg, "RAPS penalty-free rank count (default: min(5, K))");

  EvaluateOptions eval_opts;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a calibrator or baseline");
  eval_opts.data.add_to(evaluate, "Test dataset file");
  evaluate->add_option("--artifact", eval_opts.artifact, "Calibrator artifact JSON")
      ->required();
  evaluate->add_option("--output", eval_opts.output, "Report CSV path");
  evaluate->add_option("--baseline", eval_opts.baseline, "Evaluate b1, b2 or b3 instead")
      ->check(CLI::IsMember({"b1", "b2", "b3"}));
  evaluate->add_option("--setting", eval_opts.setting, "Setting name for the report");
  evaluate->add_option("--th", eval_opts.th, "Ambiguity threshold");
  evaluate->add_option("--alpha", eval_opts.alpha, "Baseline alpha (default: artifact alpha)");

  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Alpha sweep over all three methods");
  sweep->add_option("--cal", sweep_opts.cal, "Calibration dataset file")->required();
  sweep->add_option("--test", sweep_opts.test, "Test dataset file")->required();
  sweep->add_option("--format", sweep_opts.format, "jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  sweep->add_option("--labels", sweep_opts.labels, "Labels file for csv input");
  sweep->add_option("--output", sweep_opts.output, "Sweep CSV path");
  sweep->add_option("--alphas", sweep_opts.alphas, "Comma-separated error levels");
  sweep->add_option("--th", sweep_opts.th, "Ambiguity threshold");
  sweep->add_option("--raps-lambda", sweep_opts.raps_lambda, "RAPS rank penalty");
  sweep->add_option("--raps-kreg", sweep_opts.raps_kreg, "RAPS penalty-free rank count (default: min(5, K))");

  OosTuneOptions oos_opts;
  auto* oos_tune = app.add_subcommand("oos-tune", "Grid-tune alpha and th for OOS detection");
  oos_opts.data.add_to(oos_tune, "Calibration dataset containing __oos__ rows");
  oos_tune->add_option("--output", oos_opts.output, "Tune result JSON path");
  oos_tune->add_option("--trace-csv", oos_opts.trace_csv, "Grid trace CSV path");
  oos_tune->add_option("--method", oos_opts.method, "marginal, adaptive or raps")
      ->check(CLI::IsMember({"marginal", "adaptive", "raps"}));
  oos_tune->add_option("--alphas", oos_opts.alphas, "Comma-separated error levels");
  oos_tune->add_option("--ths", oos_opts.ths, "Comma-separated thresholds");
  oos_tune->add_option("--raps-lambda", oos_opts.raps_lambda, "RAPS rank penalty");
  oos_tune->add_option("--raps-kreg", oos_opts.raps_kreg, "RAPS penalty-free rank count (default: min(5, K))");

  DemoOptions demo_opts;
  auto* demo = app.add_subcommand("demo", "Interactive decision-loop REPL");
  demo->add_option("--artifact", demo_opts.artifact, "Calibrator artifact JSON")->required();
  demo->add_option("--scores", demo_opts.scores, "Utterance-to-scores lookup JSONL");
  demo->add_option("--score-url", demo_opts.score_url, "Scoring endpoint URL");
  demo->add_option("--client-url", demo_opts.client_url, "Generative client URL");
  demo->add_option("--prompt-spec", demo_opts.prompt_spec, "Prompt spec JSON file");
  demo->add_option("--cq-mode", demo_opts.cq_mode, "template, gen or gen-utterance")
      ->check(CLI::IsMember({"template", "gen", "gen-utterance"}));
  demo->add_option("--th", demo_opts.th, "Ambiguity threshold");

  ServeOptions serve_opts;
  auto* serve = app.add_subcommand("serve", "HTTP decision endpoint");
  serve->add_option("--artifact", serve_opts.artifact, "Calibrator artifact JSON")->required();
  serve->add_option("--port", serve_opts.port, "Listen port")->required();
  serve->add_option("--client-url", serve_opts.client_url, "Generative client URL");
  serve->add_option("--prompt-spec", serve_opts.prompt_spec, "Prompt spec JSON file");
  serve->add_option("--cq-mode", serve_opts.cq_mode, "template, gen or gen-utterance")
      ->check(CLI::IsMember({"template", "gen", "gen-utterance"}));
  serve->add_option("--th", serve_opts.th, "Ambiguity threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (split->parsed()) {
      return cmd_split(split_opts);
    }
    if (calibrate->parsed()) {
      return cmd_calibrate(cal_opts);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_opts);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_opts);
    }
    if (oos_tune->parsed()) {
      return cmd_oos_tune(oos_opts);
    }
    if (demo->parsed()) {
      return cmd_demo(demo_opts);
    }
    if (serve->parsed()) {
      return cmd_serve(serve_opts);
    }
  } catch (const cicc::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
