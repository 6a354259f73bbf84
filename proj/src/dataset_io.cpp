#include "cicc/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cicc {

namespace {

using nlohmann::json;

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open file: " + path.string());
  }
  return in;
}

std::string row_context(const std::filesystem::path& path, std::size_t line_no) {
  return path.filename().string() + ":" + std::to_string(line_no);
}

// Resolves a label string against the vocabulary; "__oos__" maps to nullopt.
std::optional<ClassId> resolve_label(const std::string& label, const LabelVocabulary& vocabulary,
                                     const std::string& context) {
  if (label == kOosLabel) {
    return std::nullopt;
  }
  const auto id = vocabulary.find(label);
  if (!id) {
    throw InputError(context + ": unknown label name '" + label + "'");
  }
  return id;
}

json parse_json_line(const std::string& line, const std::string& context) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw InputError(context + ": malformed JSON object");
  }
  return j;
}

ScoreVector scores_from_json(const json& j, const std::string& context) {
  if (!j.contains("scores") || !j["scores"].is_array()) {
    throw InputError(context + ": missing \"scores\" array");
  }
  ScoreVector scores;
  scores.reserve(j["scores"].size());
  for (const auto& v : j["scores"]) {
    if (!v.is_number()) {
      throw InputError(context + ": non-numeric score entry");
    }
    scores.push_back(v.get<double>());
  }
  return scores;
}

LabelVocabulary header_vocabulary(const json& header, const std::string& context) {
  if (!header.contains("labels") || !header["labels"].is_array()) {
    throw InputError(context + ": first line must be a header object {\"labels\": [...]}");
  }
  std::vector<std::string> labels;
  labels.reserve(header["labels"].size());
  for (const auto& v : header["labels"]) {
    if (!v.is_string()) {
      throw InputError(context + ": header labels must be strings");
    }
    labels.push_back(v.get<std::string>());
  }
  return LabelVocabulary(std::move(labels));
}

Dataset load_jsonl(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  std::string line;
  std::size_t line_no = 0;

  LabelVocabulary vocabulary;
  std::vector<LabeledExample> examples;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string context = row_context(path, line_no);
    const json j = parse_json_line(line, context);
    if (!have_header) {
      vocabulary = header_vocabulary(j, context);
      have_header = true;
      continue;
    }
    LabeledExample ex;
    ex.scores = scores_from_json(j, context);
    validate_and_normalize_scores(ex.scores, vocabulary.size(), context, warnings);
    if (!j.contains("label") || !j["label"].is_string()) {
      throw InputError(context + ": missing \"label\" string");
    }
    ex.label = resolve_label(j["label"].get<std::string>(), vocabulary, context);
    if (j.contains("utterance")) {
      if (!j["utterance"].is_string()) {
        throw InputError(context + ": \"utterance\" must be a string");
      }
      ex.utterance = j["utterance"].get<std::string>();
    }
    examples.push_back(std::move(ex));
  }
  if (!have_header) {
    throw InputError(path.string() + ": empty file");
  }
  if (examples.empty()) {
    throw InputError(path.string() + ": no example rows after the header");
  }
  return Dataset{std::move(vocabulary), std::move(examples)};
}

// Minimal RFC-4180 field splitting: double quotes guard separators, "" is an
// escaped quote. Enough for utterances with commas.
std::vector<std::string> split_csv_line(const std::string& line, const std::string& context) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (in_quotes) {
    throw InputError(context + ": unterminated quote");
  }
  fields.push_back(std::move(field));
  return fields;
}

Dataset load_csv(const std::filesystem::path& path, const LabelVocabulary& vocabulary,
                 std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  std::string line;
  std::size_t line_no = 0;
  const int num_classes = vocabulary.size();

  if (!std::getline(in, line)) {
    throw InputError(path.string() + ": empty file");
  }
  ++line_no;
  const auto header = split_csv_line(line, row_context(path, line_no));
  if (header.size() != static_cast<std::size_t>(num_classes) + 2 || header[0] != "label" ||
      header[1] != "utterance") {
    throw InputError(row_context(path, line_no) +
                     ": header must be label,utterance,score_0,...,score_" +
                     std::to_string(num_classes - 1));
  }

  std::vector<LabeledExample> examples;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string context = row_context(path, line_no);
    const auto fields = split_csv_line(line, context);
    if (fields.size() != header.size()) {
      throw InputError(context + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    LabeledExample ex;
    ex.label = resolve_label(fields[0], vocabulary, context);
    if (!fields[1].empty()) {
      ex.utterance = fields[1];
    }
    ex.scores.reserve(num_classes);
    for (int k = 0; k < num_classes; ++k) {
      const auto& raw = fields[static_cast<std::size_t>(k) + 2];
      try {
        std::size_t consumed = 0;
        ex.scores.push_back(std::stod(raw, &consumed));
        if (consumed != raw.size()) {
          throw std::invalid_argument(raw);
        }
      } catch (const std::exception&) {
        throw InputError(context + ": score_" + std::to_string(k) + " is not a number: '" +
                         raw + "'");
      }
    }
    validate_and_normalize_scores(ex.scores, num_classes, context, warnings);
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) {
    throw InputError(path.string() + ": no example rows after the header");
  }
  return Dataset{vocabulary, std::move(examples)};
}

}  // namespace

std::optional<FileFormat> file_format_from_name(std::string_view name) {
  if (name == "jsonl") {
    return FileFormat::Jsonl;
  }
  if (name == "csv") {
    return FileFormat::Csv;
  }
  return std::nullopt;
}

Dataset load_dataset(const std::filesystem::path& path, FileFormat format,
                     const std::optional<std::filesystem::path>& labels_path,
                     std::vector<std::string>* warnings) {
  if (format == FileFormat::Jsonl) {
    return load_jsonl(path, warnings);
  }
  if (!labels_path) {
    throw InputError("csv format requires a labels file");
  }
  return load_csv(path, load_labels_file(*labels_path), warnings);
}

void save_dataset_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw InputError("cannot write file: " + path.string());
  }
  json header;
  header["labels"] = dataset.vocabulary.labels();
  out << header.dump() << "\n";
  for (const auto& ex : dataset.examples) {
    json j;
    j["scores"] = ex.scores;
    j["label"] = ex.label ? dataset.vocabulary.name(*ex.label) : std::string(kOosLabel);
    if (ex.utterance) {
      j["utterance"] = *ex.utterance;
    }
    out << j.dump() << "\n";
  }
}

LabelVocabulary load_labels_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (!line.empty()) {
      labels.push_back(line);
    }
  }
  return LabelVocabulary(std::move(labels));
}

ScoreLookup load_score_lookup(const std::filesystem::path& path,
                              std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  std::string line;
  std::size_t line_no = 0;

  ScoreLookup lookup;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::string context = row_context(path, line_no);
    const json j = parse_json_line(line, context);
    if (!have_header) {
      lookup.vocabulary = header_vocabulary(j, context);
      have_header = true;
      continue;
    }
    if (!j.contains("utterance") || !j["utterance"].is_string()) {
      throw InputError(context + ": missing \"utterance\" string");
    }
    ScoreVector scores = scores_from_json(j, context);
    validate_and_normalize_scores(scores, lookup.vocabulary.size(), context, warnings);
    lookup.by_utterance[j["utterance"].get<std::string>()] = std::move(scores);
  }
  if (!have_header) {
    throw InputError(path.string() + ": empty file");
  }
  return lookup;
}

}  // namespace cicc
