#pragma once

#include <string>
#include <variant>

#include "json.hpp"

#include "cicc/conformal.hpp"
#include "cicc/cq.hpp"

namespace cicc {

struct EngineConfig {
  int th = 7;  // largest set size for which a clarification question is asked
  std::string ambiguity_response =
      "I am not sure what you mean. Could you rephrase your question?";
  CqMode cq_mode = CqMode::Template;

  void validate() const;
};

struct Confident {
  ClassId intent;
  bool from_fallback = false;  // intent came from the empty-set argmax policy
};

struct Clarify {
  PredictionSet set;  // size in [2, th]
  std::string question;
};

struct Ambiguous {
  std::string response;
};

using Decision = std::variant<Confident, Clarify, Ambiguous>;

// Rejection is strictly "more than th options": a set of exactly th still
// gets a clarification question. Out-of-scope detection shares this predicate.
inline bool exceeds_ambiguity_threshold(int set_size, int th) { return set_size > th; }

// Kind selection from the set size alone; the clarification question is
// filled in by handle_utterance.
Decision decide(const PredictionSet& set, const EngineConfig& config);

// predict_set -> decide -> fill the question. Generator failures degrade to
// the template question; the decision itself never fails.
Decision handle_utterance(const std::optional<std::string>& utterance, const ScoreVector& f,
                          const FittedCalibrator& calibrator, const EngineConfig& config,
                          CqGenerator& generator);

// {"kind": "confident"|"clarify"|"ambiguous", "intent"?, "options"?,
//  "question"?, "response"?} with only the fields of the decision's kind.
nlohmann::json decision_to_json(const Decision& decision, const LabelVocabulary& vocabulary);

}  // namespace cicc
