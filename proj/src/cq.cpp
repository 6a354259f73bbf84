#include "cicc/cq.hpp"

#include <fstream>

namespace cicc {

std::string_view cq_mode_name(CqMode mode) {
  switch (mode) {
    case CqMode::Template:
      return "template";
    case CqMode::GenerativeNoUtterance:
      return "gen";
    case CqMode::GenerativeWithUtterance:
      return "gen-utterance";
  }
  return "unknown";
}

std::optional<CqMode> cq_mode_from_name(std::string_view name) {
  if (name == "template") {
    return CqMode::Template;
  }
  if (name == "gen") {
    return CqMode::GenerativeNoUtterance;
  }
  if (name == "gen-utterance") {
    return CqMode::GenerativeWithUtterance;
  }
  return std::nullopt;
}

std::string humanize_label(std::string_view label) {
  std::string out(label);
  for (auto& c : out) {
    if (c == '_') {
      c = ' ';
    }
  }
  return out;
}

std::string render_template_cq(const std::vector<std::string>& options,
                               const std::optional<std::string>& utterance) {
  (void)utterance;  // templates do not refer back to the original utterance
  if (options.size() < 2) {
    throw InputError("a clarification question needs at least 2 options, got " +
                     std::to_string(options.size()));
  }
  std::string out = "Did you mean: ";
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    if (i + 1 == options.size()) {
      out += "or ";
    }
    out += humanize_label(options[i]);
  }
  out += "?";
  return out;
}

PromptSpec PromptSpec::defaults() {
  PromptSpec spec;
  spec.preamble =
      "Customers asked an ambiguous question. Complete each set with a disambiguation "
      "question.";
  spec.few_shot = {
      {"The terminal I paid at wouldn't take my card. Is something wrong?",
       {"card not working", "card swallowed"},
       "I understand this was about you card. Was is swallowed or not working?"},
      {"I have a problem with a transfer. It didn't work. Can you tell me why?",
       {"declined transfer", "failed transfer"},
       "I see you are having issues with your transfer. Was your transfer failed or declined?"},
  };
  spec.terminator = "**END**";
  return spec;
}

void PromptSpec::validate() const {
  if (few_shot.empty()) {
    throw InputError("prompt spec needs at least one few-shot example");
  }
  if (terminator.empty()) {
    throw InputError("prompt spec terminator must be non-empty");
  }
}

PromptSpec PromptSpec::from_json(const nlohmann::json& j) {
  PromptSpec spec;
  try {
    spec.preamble = j.at("preamble").get<std::string>();
    spec.terminator = j.at("terminator").get<std::string>();
    for (const auto& entry : j.at("few_shot_examples")) {
      FewShotExample ex;
      ex.utterance = entry.at("utterance").get<std::string>();
      ex.options = entry.at("options").get<std::vector<std::string>>();
      ex.question = entry.at("question").get<std::string>();
      spec.few_shot.push_back(std::move(ex));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed prompt spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json PromptSpec::to_json() const {
  nlohmann::json j;
  j["preamble"] = preamble;
  j["terminator"] = terminator;
  j["few_shot_examples"] = nlohmann::json::array();
  for (const auto& ex : few_shot) {
    nlohmann::json entry;
    entry["utterance"] = ex.utterance;
    entry["options"] = ex.options;
    entry["question"] = ex.question;
    j["few_shot_examples"].push_back(std::move(entry));
  }
  return j;
}

PromptSpec PromptSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open file: " + path.string());
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw InputError("malformed prompt spec: " + path.string());
  }
  return from_json(j);
}

std::string build_prompt(const PromptSpec& spec, const std::vector<std::string>& options,
                         const std::optional<std::string>& utterance, CqMode mode) {
  if (mode == CqMode::Template) {
    throw InputError("build_prompt called in template mode");
  }
  spec.validate();
  if (options.size() < 2) {
    throw InputError("a prompt needs at least 2 options, got " +
                     std::to_string(options.size()));
  }

  std::string prompt = spec.preamble + "\n\n";
  std::size_t set_no = 0;
  for (const auto& ex : spec.few_shot) {
    ++set_no;
    prompt += "Set " + std::to_string(set_no) + ": Customer Asked: '" + ex.utterance + "'\n";
    for (std::size_t i = 0; i < ex.options.size(); ++i) {
      prompt += "Option " + std::to_string(i + 1) + ": '" + humanize_label(ex.options[i]) + "'\n";
    }
    prompt += "Disambiguation Question: '" + ex.question + "'\n";
    prompt += spec.terminator + "\n\n";
  }

  ++set_no;
  const bool with_utterance =
      mode == CqMode::GenerativeWithUtterance && utterance && !utterance->empty();
  if (with_utterance) {
    prompt += "Set " + std::to_string(set_no) + ": Customer Asked: '" + *utterance + "'\n";
  } else {
    prompt += "Set " + std::to_string(set_no) + ":\n";
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    prompt += "Option " + std::to_string(i + 1) + ": '" + humanize_label(options[i]) + "'\n";
  }
  prompt += "Disambiguation Question:";
  return prompt;
}

}  // namespace cicc
