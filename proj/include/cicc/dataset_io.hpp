#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cicc/dataset.hpp"

namespace cicc {

enum class FileFormat { Jsonl, Csv };

std::optional<FileFormat> file_format_from_name(std::string_view name);

// JSONL: line 1 is a header object {"labels": [string x K]}, then one object
// per line: {"scores": [float x K], "label": string | "__oos__",
// "utterance": string (optional)}.
//
// CSV: header `label,utterance,score_0,...,score_{K-1}`; label names come from
// `labels_path`, one per line, line order defining class ids.
Dataset load_dataset(const std::filesystem::path& path, FileFormat format,
                     const std::optional<std::filesystem::path>& labels_path = std::nullopt,
                     std::vector<std::string>* warnings = nullptr);

// Writes the JSONL schema above. Output is byte-stable for equal inputs.
void save_dataset_jsonl(const Dataset& dataset, const std::filesystem::path& path);

// One label name per non-empty line; line order defines class ids.
LabelVocabulary load_labels_file(const std::filesystem::path& path);

// Demo scores source: JSONL with the usual header line, rows needing only
// "utterance" and "scores" ("label" is ignored when present).
struct ScoreLookup {
  LabelVocabulary vocabulary;
  std::unordered_map<std::string, ScoreVector> by_utterance;
};

ScoreLookup load_score_lookup(const std::filesystem::path& path,
                              std::vector<std::string>* warnings = nullptr);

}  // namespace cicc
