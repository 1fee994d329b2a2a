#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowdial/plantuml.hpp"
#include "flowdial/synth.hpp"

// Chat-completion client and the three augmentation prompts: user input,
// robot output and loop insertion.
namespace flowdial::llm {

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string token_env = "OPENAI_API_KEY";
  std::size_t max_in_flight = 4;
  unsigned retry_limit = 3;
  double timeout_seconds = 60.0;
  std::string cache_dir;  // empty: in-memory cache only
  unsigned backoff_ms = 500;

  static ProviderConfig from_json(const nlohmann::json& j);
  static ProviderConfig load(const std::string& path);
  // Throws Error(Usage) on an invalid configuration.
  void validate() const;
};

// A filled (or partially filled) dialogue tuple as it appears in prompts.
struct TupleFields {
  std::string flowchart_text;
  std::string current_state;
  std::string next_state;
  std::optional<std::string> user_input;
  std::optional<std::string> robot_output;

  bool operator==(const TupleFields&) const = default;
};

// "PlantUML:\n<text>\nCurrent state: ...\nNext state: ...[\nUser input: ...][\nRobot output: ...]"
std::string render_tuple(const TupleFields& t);
// Inverse of render_tuple. Throws Error(BadResponse) on a malformed block.
TupleFields split_tuple(std::string_view block);

struct PromptBundle {
  std::string system;
  std::string user;
  std::vector<std::string> examples;

  bool operator==(const PromptBundle&) const = default;
};

extern const std::string_view kUserInputTemplate;
extern const std::string_view kRobotOutputTemplate;
extern const std::string_view kBackwardTemplate;

PromptBundle build_user_input_prompt(std::string_view flowchart_text, std::string_view current,
                                     std::string_view next, const std::vector<TupleFields>& examples = {});

PromptBundle build_robot_output_prompt(std::string_view flowchart_text, std::string_view current,
                                       std::string_view next, std::string_view user_input,
                                       const std::vector<TupleFields>& examples = {});

struct LoopExemplar {
  std::string original;
  std::string revised;
};

// Throws Error(Usage) if either side of the exemplar is empty.
PromptBundle build_backward_prompt(std::string_view original_plantuml, const LoopExemplar& exemplar);

// Hex SHA-256 of the canonical JSON of {model, system, user, examples, variant}.
std::string cache_key(const PromptBundle& bundle, std::string_view model, unsigned variant = 0);

struct HttpResponse {
  enum class Failure { None, Timeout, Network };

  int status = 0;
  std::string body;
  Failure failure = Failure::None;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers,
                            std::chrono::milliseconds timeout) = 0;
};

class HttpTransport final : public Transport {
 public:
  HttpResponse post(const std::string& url, const std::string& body,
                    const std::map<std::string, std::string>& headers,
                    std::chrono::milliseconds timeout) override;
};

class LlmClient {
 public:
  struct Stats {
    std::size_t requests = 0;  // transport calls, including retries
    std::size_t cache_hits = 0;
  };

  LlmClient(ProviderConfig config, std::shared_ptr<Transport> transport);

  // Returns the model's reply. Identical (bundle, variant) pairs are served
  // from the cache; `variant` lets callers ask for a fresh generation.
  // Errors: RetriesExhausted, AuthFailure, Timeout, BadResponse.
  std::string complete(const PromptBundle& bundle, unsigned variant = 0);

  Stats stats() const;
  const ProviderConfig& config() const { return config_; }

 private:
  std::string request(const PromptBundle& bundle);
  std::optional<std::string> cached(const std::string& key);
  void store(const std::string& key, const std::string& value);
  std::shared_ptr<std::mutex> key_mutex(const std::string& key);

  ProviderConfig config_;
  std::shared_ptr<Transport> transport_;
  std::string token_;

  mutable std::mutex mutex_;
  std::map<std::string, std::string> cache_;
  std::map<std::string, std::shared_ptr<std::mutex>> key_mutexes_;
  Stats stats_;

  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  std::size_t in_flight_ = 0;
};

// Chat wire format helpers.
nlohmann::json chat_request(const PromptBundle& bundle, std::string_view model);
// Throws Error(BadResponse) when choices[0].message.content is missing.
std::string chat_content(std::string_view response_body);

// Strips an echoed "User input:" / "Robot output:" header and surrounding
// quotes from a model reply.
std::string extract_field(std::string_view reply, std::string_view header);
// The last @startuml ... @enduml block in a reply, or the whole reply.
std::string extract_plantuml(std::string_view reply);

class LlmProvider final : public synth::AugmentationProvider {
 public:
  LlmProvider(LlmClient& client, std::vector<TupleFields> user_examples = {},
              std::vector<TupleFields> robot_examples = {});

  std::string user_input(const synth::TransitionContext& ctx) override;
  std::string robot_output(const synth::TransitionContext& ctx, std::string_view user_input) override;

 private:
  LlmClient& client_;
  std::vector<TupleFields> user_examples_;
  std::vector<TupleFields> robot_examples_;
};

// Asks the model for a one-loop revision of `ast`, regenerating until the
// reply parses and passes augment::check_loop_revision. Throws
// Error(Synthesis) with the last rejection reason after `attempts` replies.
plantuml::ActivityAst llm_insert_loop(const plantuml::ActivityAst& ast, LlmClient& client,
                                      const LoopExemplar& exemplar, unsigned attempts = 3);

}  // namespace flowdial::llm
