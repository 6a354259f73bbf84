#include "cicc/decision.hpp"

namespace cicc {

void EngineConfig::validate() const {
  if (th < 1) {
    throw InputError("th must be at least 1, got " + std::to_string(th));
  }
}

Decision decide(const PredictionSet& set, const EngineConfig& config) {
  config.validate();
  if (set.indices.empty()) {
    throw InputError("decide called with an empty prediction set");
  }
  if (set.size() == 1) {
    return Confident{set.indices.front(), set.argmax_fallback};
  }
  if (exceeds_ambiguity_threshold(set.size(), config.th)) {
    return Ambiguous{config.ambiguity_response};
  }
  return Clarify{set, std::string{}};
}

Decision handle_utterance(const std::optional<std::string>& utterance, const ScoreVector& f,
                          const FittedCalibrator& calibrator, const EngineConfig& config,
                          CqGenerator& generator) {
  const PredictionSet set = calibrator.predict_set(f);
  Decision decision = decide(set, config);
  if (auto* clarify = std::get_if<Clarify>(&decision)) {
    std::vector<std::string> options;
    options.reserve(clarify->set.indices.size());
    for (const ClassId y : clarify->set.indices) {
      options.push_back(calibrator.vocabulary().name(y));
    }
    try {
      clarify->question = generator.clarification_question(options, utterance);
    } catch (const std::exception&) {
      clarify->question = render_template_cq(options, utterance);
    }
  }
  return decision;
}

nlohmann::json decision_to_json(const Decision& decision, const LabelVocabulary& vocabulary) {
  nlohmann::json j;
  if (const auto* confident = std::get_if<Confident>(&decision)) {
    j["kind"] = "confident";
    j["intent"] = vocabulary.name(confident->intent);
  } else if (const auto* clarify = std::get_if<Clarify>(&decision)) {
    j["kind"] = "clarify";
    auto options = nlohmann::json::array();
    for (const ClassId y : clarify->set.indices) {
      options.push_back(vocabulary.name(y));
    }
    j["options"] = std::move(options);
    j["question"] = clarify->question;
  } else {
    j["kind"] = "ambiguous";
    j["response"] = std::get<Ambiguous>(decision).response;
  }
  return j;
}

}  // namespace cicc
