#include "cicc/gen_client.hpp"

#include <algorithm>
#include <cctype>

#include "httplib.h"
#include "json.hpp"

namespace cicc {

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string text) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!text.empty() && is_space(static_cast<unsigned char>(text.front()))) {
    text.erase(text.begin());
  }
  while (!text.empty() && is_space(static_cast<unsigned char>(text.back()))) {
    text.pop_back();
  }
  return text;
}

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("client url must start with http:// or https://: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

void ClientConfig::validate() const {
  if (url.empty()) {
    throw InputError("client url is empty");
  }
  if (timeout.count() <= 0) {
    throw InputError("client timeout must be positive");
  }
  if (max_reply_length < 1) {
    throw InputError("max reply length must be at least 1");
  }
}

HttpGenerativeClient::HttpGenerativeClient(ClientConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::string HttpGenerativeClient::complete(const std::string& prompt, int max_tokens) {
  const auto [base, path] = split_url(config_.url);
  httplib::Client client(base);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(static_cast<time_t>(seconds.count()),
                                static_cast<time_t>(micros.count()));
  client.set_read_timeout(static_cast<time_t>(seconds.count()),
                          static_cast<time_t>(micros.count()));

  nlohmann::json request;
  request["prompt"] = prompt;
  request["max_tokens"] = max_tokens;
  const auto result = client.Post(path, request.dump(), "application/json");
  if (!result) {
    throw ClientError("generative client request failed: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw ClientError("generative client returned status " + std::to_string(result->status));
  }
  const nlohmann::json reply = nlohmann::json::parse(result->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") ||
      !reply["text"].is_string()) {
    throw ClientError("generative client reply is not a {\"text\": ...} object");
  }
  return reply["text"].get<std::string>();
}

std::uint64_t prompt_hash(std::string_view prompt) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (const char c : prompt) {
    hash ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    hash *= 1099511628211ULL;
  }
  return hash;
}

void MockGenerativeClient::script_reply(std::uint64_t hash, std::string reply) {
  scripted_[hash] = std::move(reply);
}

void MockGenerativeClient::fail_always(std::string reason) { failure_ = std::move(reason); }

std::string MockGenerativeClient::complete(const std::string& prompt, int max_tokens) {
  (void)max_tokens;
  if (failure_) {
    throw ClientError(*failure_);
  }
  const auto it = scripted_.find(prompt_hash(prompt));
  if (it != scripted_.end()) {
    return it->second;
  }

  // Pull the live set's options back out of the prompt.
  std::vector<std::string> options;
  const auto last_set = prompt.rfind("Set ");
  std::size_t pos = last_set == std::string::npos ? 0 : last_set;
  while ((pos = prompt.find("Option ", pos)) != std::string::npos) {
    const auto open = prompt.find('\'', pos);
    if (open == std::string::npos) {
      break;
    }
    const auto close = prompt.find('\'', open + 1);
    if (close == std::string::npos) {
      break;
    }
    options.push_back(prompt.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  if (options.size() < 2) {
    throw ClientError("mock could not find options in the prompt");
  }
  return " 'I understand. Did you mean " + options[0] + " or " + options[1] +
         "?'\n**END**\nSet 99: Customer Asked:";
}

std::string generate_cq(GenerativeClient& client, const std::string& prompt,
                        const std::vector<std::string>& options,
                        const std::string& terminator, int max_tokens) {
  std::string reply = client.complete(prompt, max_tokens);
  if (const auto pos = reply.find(terminator); pos != std::string::npos) {
    reply = reply.substr(0, pos);
  }
  reply = trim(std::move(reply));
  if (reply.size() >= 2 && reply.front() == '\'' && reply.back() == '\'') {
    reply = trim(reply.substr(1, reply.size() - 2));
  }
  if (reply.empty()) {
    throw ClientError("empty completion");
  }

  const std::string haystack = lowercase(reply);
  std::size_t mentioned = 0;
  for (const auto& option : options) {
    if (haystack.find(lowercase(humanize_label(option))) != std::string::npos) {
      ++mentioned;
    }
  }
  if (mentioned < 2) {
    throw ClientError("completion mentions " + std::to_string(mentioned) +
                      " of the options; need at least 2");
  }
  return reply;
}

GenerativeCq::GenerativeCq(GenerativeClient& client, PromptSpec spec, CqMode mode,
                           int max_tokens)
    : client_(&client), spec_(std::move(spec)), mode_(mode), max_tokens_(max_tokens) {
  spec_.validate();
  if (mode_ == CqMode::Template) {
    throw InputError("generative question source cannot run in template mode");
  }
}

std::string GenerativeCq::clarification_question(const std::vector<std::string>& options,
                                                 const std::optional<std::string>& utterance) {
  const std::string prompt = build_prompt(spec_, options, utterance, mode_);
  return generate_cq(*client_, prompt, options, spec_.terminator, max_tokens_);
}

}  // namespace cicc
