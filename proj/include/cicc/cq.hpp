#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cicc/common.hpp"

namespace cicc {

enum class CqMode { Template, GenerativeNoUtterance, GenerativeWithUtterance };

std::string_view cq_mode_name(CqMode mode);
std::optional<CqMode> cq_mode_from_name(std::string_view name);

// Label names are snake_case in most intent datasets; user-facing text gets
// spaces instead.
std::string humanize_label(std::string_view label);

// "Did you mean: a, b, or c?" — a pure function of the options, byte-identical
// across runs. Needs at least two options.
std::string render_template_cq(const std::vector<std::string>& options,
                               const std::optional<std::string>& utterance = std::nullopt);

struct FewShotExample {
  std::string utterance;
  std::vector<std::string> options;
  std::string question;
};

struct PromptSpec {
  std::string preamble;
  std::vector<FewShotExample> few_shot;
  std::string terminator;

  // Two banking disambiguation examples; override per domain via a JSON file.
  static PromptSpec defaults();

  static PromptSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static PromptSpec load(const std::filesystem::path& path);

  void validate() const;  // at least one few-shot example, non-empty terminator
};

// Few-shot completion prompt: preamble, numbered example sets each closed by
// the terminator, then the live set. The live set carries a
// "Customer Asked:" line only in GenerativeWithUtterance mode with a
// non-empty utterance. Always ends with exactly "Disambiguation Question:".
std::string build_prompt(const PromptSpec& spec, const std::vector<std::string>& options,
                         const std::optional<std::string>& utterance, CqMode mode);

// Question text for a clarify decision. Implementations may throw; the
// decision engine falls back to the template on any failure.
class CqGenerator {
 public:
  virtual ~CqGenerator() = default;
  virtual std::string clarification_question(const std::vector<std::string>& options,
                                             const std::optional<std::string>& utterance) = 0;
};

class TemplateCq : public CqGenerator {
 public:
  std::string clarification_question(const std::vector<std::string>& options,
                                     const std::optional<std::string>& utterance) override {
    return render_template_cq(options, utterance);
  }
};

}  // namespace cicc
