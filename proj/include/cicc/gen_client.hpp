#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cicc/cq.hpp"

namespace cicc {

struct ClientConfig {
  std::string url;  // e.g. http://localhost:8800/complete
  std::chrono::milliseconds timeout{5000};
  int max_reply_length = 100;  // forwarded as max_tokens

  void validate() const;
};

// Boundary to a hosted generative model. complete() returns the raw
// completion text and throws ClientError on any failure.
class GenerativeClient {
 public:
  virtual ~GenerativeClient() = default;
  virtual std::string complete(const std::string& prompt, int max_tokens) = 0;
};

// Wire contract: POST <url> with {"prompt": string, "max_tokens": int},
// reply {"text": string}.
class HttpGenerativeClient : public GenerativeClient {
 public:
  explicit HttpGenerativeClient(ClientConfig config);
  std::string complete(const std::string& prompt, int max_tokens) override;

 private:
  ClientConfig config_;
};

// FNV-1a; keys scripted mock replies.
std::uint64_t prompt_hash(std::string_view prompt);

// Deterministic stand-in for a hosted model. Scripted replies are keyed by
// prompt hash; unscripted prompts get a completion built from the live set's
// option lines, followed by the terminator and trailing chatter so that
// truncation is exercised.
class MockGenerativeClient : public GenerativeClient {
 public:
  void script_reply(std::uint64_t hash, std::string reply);
  // Every subsequent call throws ClientError(reason); simulates timeouts.
  void fail_always(std::string reason);

  std::string complete(const std::string& prompt, int max_tokens) override;

 private:
  std::map<std::uint64_t, std::string> scripted_;
  std::optional<std::string> failure_;
};

// Runs the client, truncates the completion at `terminator`, trims quotes and
// whitespace, and requires that at least two options are mentioned. Throws
// ClientError otherwise so the caller can fall back to a template question.
std::string generate_cq(GenerativeClient& client, const std::string& prompt,
                        const std::vector<std::string>& options,
                        const std::string& terminator = "**END**", int max_tokens = 100);

// LM-backed question generator for the decision engine.
class GenerativeCq : public CqGenerator {
 public:
  GenerativeCq(GenerativeClient& client, PromptSpec spec, CqMode mode, int max_tokens = 100);

  std::string clarification_question(const std::vector<std::string>& options,
                                     const std::optional<std::string>& utterance) override;

 private:
  GenerativeClient* client_;
  PromptSpec spec_;
  CqMode mode_;
  int max_tokens_;
};

}  // namespace cicc
