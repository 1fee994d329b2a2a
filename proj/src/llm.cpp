#include "flowdial/llm.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "flowdial/augment.hpp"
#include "flowdial/error.hpp"
#include "flowdial/text.hpp"

namespace flowdial::llm {

namespace fs = std::filesystem;

const std::string_view kUserInputTemplate =
    "These examples are four-tuples consisting of the PlantUML diagram, the current state, the next "
    "state, and the user input.\n"
    "\n"
    "{examples}\n"
    "\n"
    "The user's input explains the change in state from the current state to the next state. For "
    "example, if the original state is A, the user might input \"A has been completed.\" or, when a "
    "choice is required, the user selects an option based on the next state.\n"
    "Now I have a four-tuple consisting of the PlantUML diagram, the current state, and the next "
    "state, without user inpupt. Your task is to generate the user's input based on the rules "
    "provided.\n"
    "\n"
    "This is the four-tuple need to be filled:\n"
    "{tuple}\n";

const std::string_view kRobotOutputTemplate =
    "These examples are five-tuples consisting of the PlantUML diagram, the current state, the next "
    "state, user input, and the robot output.\n"
    "\n"
    "{examples}\n"
    "\n"
    "The user's input explains the change in state from the current state to the next state. The "
    "robot output is related to next state. Robot acts as the server-provider. For example, if the "
    "current state is A, tobot might output \"Now process A.\" or, when a choice is required, robot "
    "lets user to make a choice.\n"
    "Now I have a five-tuple consisting of the PlantUML diagram, the current state next state, and "
    "the user input, without robot output. Your task is to generate the robot's output based on the "
    "rules provided.\n"
    "\n"
    "This is the five-tuple need to be filled:\n"
    "{tuple}\n";

const std::string_view kBackwardTemplate =
    "This is a flowchart in PlantUML syntax and the result after adding a loop to itself:\n"
    "\n"
    "{exemplar}\n"
    "\n"
    "Your task is to follow this modification rule ro add a loop to the plantuml that I will give "
    "you next. The following conditions must be met:\n"
    "1. The added loop is logical\n"
    "2. The conditional state of \"repeat while\" cannot be repeated with the any conditional state "
    "that already exists in the original PlantUML\n"
    "3. Ensure that the syntax of PlantUML is correct\n"
    "4. Add is([need to loop]) not([jump out of loop]) statements after repeat while as much as "
    "possible.\n"
    "\n"
    "PlantUML to be modified:\n"
    "{original}\n";

ProviderConfig ProviderConfig::from_json(const nlohmann::json& j) {
  ProviderConfig c;
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.token_env = j.value("token_env", c.token_env);
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.retry_limit = j.value("retry_limit", c.retry_limit);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.cache_dir = j.value("cache_dir", c.cache_dir);
  c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
  return c;
}

ProviderConfig ProviderConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read provider config " + path);
  return from_json(nlohmann::json::parse(in));
}

void ProviderConfig::validate() const {
  if (max_in_flight < 1) throw Error(ErrorCode::Usage, "max_in_flight must be at least 1");
  if (timeout_seconds <= 0) throw Error(ErrorCode::Usage, "timeout_seconds must be positive");
  if (endpoint.empty()) throw Error(ErrorCode::Usage, "endpoint is empty");
  if (model.empty()) throw Error(ErrorCode::Usage, "model is empty");
}

namespace {

constexpr std::string_view kPlantUmlHeader = "PlantUML:";
constexpr std::string_view kCurrentHeader = "Current state:";
constexpr std::string_view kNextHeader = "Next state:";
constexpr std::string_view kUserHeader = "User input:";
constexpr std::string_view kRobotHeader = "Robot output:";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string fill(std::string_view tmpl, std::string_view slot, std::string_view value) {
  return replace_all(std::string(tmpl), slot, value);
}

std::string join_examples(const std::vector<std::string>& examples) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (i) out += "\n\n";
    out += examples[i];
  }
  return out;
}

}  // namespace

std::string render_tuple(const TupleFields& t) {
  std::string out;
  out += kPlantUmlHeader;
  out += '\n';
  out += t.flowchart_text;
  out += '\n';
  out += std::string(kCurrentHeader) + " " + t.current_state + "\n";
  out += std::string(kNextHeader) + " " + t.next_state;
  if (t.user_input) out += "\n" + std::string(kUserHeader) + " " + *t.user_input;
  if (t.robot_output) out += "\n" + std::string(kRobotHeader) + " " + *t.robot_output;
  return out;
}

TupleFields split_tuple(std::string_view block) {
  enum Field { None, Uml, Current, Next, User, Robot };
  const std::pair<std::string_view, Field> headers[] = {{kPlantUmlHeader, Uml},
                                                        {kCurrentHeader, Current},
                                                        {kNextHeader, Next},
                                                        {kUserHeader, User},
                                                        {kRobotHeader, Robot}};
  std::map<Field, std::vector<std::string_view>> lines;
  Field field = None;
  for (auto line : text::split_lines(block)) {
    bool is_header = false;
    for (const auto& [h, f] : headers) {
      if (line.substr(0, h.size()) != h || lines.count(f)) continue;
      field = f;
      std::string_view rest = text::trim(line.substr(h.size()));
      lines[field];
      if (!rest.empty()) lines[field].push_back(rest);
      is_header = true;
      break;
    }
    if (is_header) continue;
    if (field == None) throw Error(ErrorCode::BadResponse, "tuple text before the first field header");
    lines[field].push_back(line);
  }
  for (Field required : {Uml, Current, Next}) {
    if (!lines.count(required)) throw Error(ErrorCode::BadResponse, "tuple is missing a required field");
  }
  const auto joined = [&](Field f) {
    std::string out;
    for (std::size_t i = 0; i < lines[f].size(); ++i) {
      if (i) out += '\n';
      out += lines[f][i];
    }
    return out;
  };
  TupleFields t;
  t.flowchart_text = joined(Uml);
  t.current_state = joined(Current);
  t.next_state = joined(Next);
  if (lines.count(User)) t.user_input = joined(User);
  if (lines.count(Robot)) t.robot_output = joined(Robot);
  return t;
}

PromptBundle build_user_input_prompt(std::string_view flowchart_text, std::string_view current,
                                     std::string_view next, const std::vector<TupleFields>& examples) {
  PromptBundle b;
  for (const auto& e : examples) {
    TupleFields four = e;
    four.robot_output.reset();
    b.examples.push_back(render_tuple(four));
  }
  const TupleFields slot{std::string(flowchart_text), std::string(current), std::string(next), std::nullopt,
                         std::nullopt};
  b.user = fill(fill(kUserInputTemplate, "{examples}", join_examples(b.examples)), "{tuple}", render_tuple(slot));
  return b;
}

PromptBundle build_robot_output_prompt(std::string_view flowchart_text, std::string_view current,
                                       std::string_view next, std::string_view user_input,
                                       const std::vector<TupleFields>& examples) {
  PromptBundle b;
  for (const auto& e : examples) b.examples.push_back(render_tuple(e));
  const TupleFields slot{std::string(flowchart_text), std::string(current), std::string(next),
                         std::string(user_input), std::nullopt};
  b.user =
      fill(fill(kRobotOutputTemplate, "{examples}", join_examples(b.examples)), "{tuple}", render_tuple(slot));
  return b;
}

PromptBundle build_backward_prompt(std::string_view original_plantuml, const LoopExemplar& exemplar) {
  if (text::trim(exemplar.original).empty() || text::trim(exemplar.revised).empty())
    throw Error(ErrorCode::Usage, "loop prompt needs an original/revised exemplar pair");
  PromptBundle b;
  b.examples.push_back("Original PlantUML:\n" + exemplar.original + "\n\nRevised PlantUML:\n" + exemplar.revised);
  b.user = fill(fill(kBackwardTemplate, "{exemplar}", b.examples.front()), "{original}", original_plantuml);
  return b;
}

std::string cache_key(const PromptBundle& bundle, std::string_view model, unsigned variant) {
  const nlohmann::json canonical = {{"model", model},
                                    {"system", bundle.system},
                                    {"user", bundle.user},
                                    {"examples", bundle.examples},
                                    {"variant", variant}};
  const std::string payload = canonical.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(payload.data(), payload.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Io, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

nlohmann::json chat_request(const PromptBundle& bundle, std::string_view model) {
  nlohmann::json messages = nlohmann::json::array();
  if (!bundle.system.empty()) messages.push_back({{"role", "system"}, {"content", bundle.system}});
  messages.push_back({{"role", "user"}, {"content", bundle.user}});
  return {{"model", model}, {"messages", messages}};
}

std::string chat_content(std::string_view response_body) {
  const auto j = nlohmann::json::parse(response_body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::BadResponse, "response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::BadResponse, "response has no choices[0].message.content");
  }
}

LlmClient::LlmClient(ProviderConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (const char* token = std::getenv(config_.token_env.c_str())) token_ = token;
}

LlmClient::Stats LlmClient::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

std::shared_ptr<std::mutex> LlmClient::key_mutex(const std::string& key) {
  std::lock_guard lock(mutex_);
  auto& m = key_mutexes_[key];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

std::optional<std::string> LlmClient::cached(const std::string& key) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++stats_.cache_hits;
      return it->second;
    }
  }
  if (config_.cache_dir.empty()) return std::nullopt;
  std::ifstream in(fs::path(config_.cache_dir) / (key + ".json"));
  if (!in) return std::nullopt;
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("content")) return std::nullopt;
  std::string content = j["content"].get<std::string>();
  std::lock_guard lock(mutex_);
  cache_[key] = content;
  ++stats_.cache_hits;
  return content;
}

void LlmClient::store(const std::string& key, const std::string& value) {
  {
    std::lock_guard lock(mutex_);
    cache_[key] = value;
  }
  if (config_.cache_dir.empty()) return;
  fs::create_directories(config_.cache_dir);
  const fs::path final_path = fs::path(config_.cache_dir) / (key + ".json");
  const fs::path tmp = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << nlohmann::json{{"model", config_.model}, {"content", value}}.dump();
  }
  fs::rename(tmp, final_path);
}

std::string LlmClient::request(const PromptBundle& bundle) {
  const std::string body = chat_request(bundle, config_.model).dump();
  std::map<std::string, std::string> headers{{"Content-Type", "application/json"}};
  if (!token_.empty()) headers["Authorization"] = "Bearer " + token_;
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(config_.timeout_seconds * 1000));

  bool all_timeouts = true;
  std::string last_problem;
  const unsigned attempts = 1 + config_.retry_limit;
  for (unsigned attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0 && config_.backoff_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms) * (1u << (attempt - 1)));

    HttpResponse resp;
    {
      std::unique_lock lock(slots_mutex_);
      slots_cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
      ++in_flight_;
    }
    try {
      resp = transport_->post(config_.endpoint, body, headers, timeout);
    } catch (const std::exception& e) {
      resp.failure = HttpResponse::Failure::Network;
      resp.body = e.what();
    }
    {
      std::lock_guard lock(slots_mutex_);
      --in_flight_;
    }
    slots_cv_.notify_one();
    {
      std::lock_guard lock(mutex_);
      ++stats_.requests;
    }

    if (resp.failure == HttpResponse::Failure::Timeout) {
      last_problem = "timed out";
      continue;
    }
    all_timeouts = false;
    if (resp.failure == HttpResponse::Failure::Network) {
      last_problem = "network error: " + resp.body;
      continue;
    }
    if (resp.status == 401 || resp.status == 403)
      throw Error(ErrorCode::AuthFailure, "authentication rejected (HTTP " + std::to_string(resp.status) + ")");
    if (resp.status == 429 || resp.status >= 500) {
      last_problem = "HTTP " + std::to_string(resp.status);
      continue;
    }
    if (resp.status != 200) throw Error(ErrorCode::BadResponse, "unexpected HTTP " + std::to_string(resp.status));
    return chat_content(resp.body);
  }
  if (all_timeouts)
    throw Error(ErrorCode::Timeout, "all " + std::to_string(attempts) + " attempts timed out");
  throw Error(ErrorCode::RetriesExhausted,
              "gave up after " + std::to_string(attempts) + " attempts (last: " + last_problem + ")");
}

std::string LlmClient::complete(const PromptBundle& bundle, unsigned variant) {
  if (text::trim(bundle.user).empty()) throw Error(ErrorCode::Usage, "prompt has empty user text");
  const std::string key = cache_key(bundle, config_.model, variant);
  const auto km = key_mutex(key);
  std::lock_guard key_lock(*km);
  if (auto hit = cached(key)) return *hit;
  std::string content = request(bundle);
  store(key, content);
  return content;
}

std::string extract_field(std::string_view reply, std::string_view header) {
  std::string_view s = text::trim(reply);
  if (const auto pos = s.find(header); pos != std::string_view::npos) s = text::trim(s.substr(pos + header.size()));
  const auto nl = s.find('\n');
  if (nl != std::string_view::npos) s = text::trim(s.substr(0, nl));
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::string extract_plantuml(std::string_view reply) {
  const auto end = reply.rfind("@enduml");
  if (end == std::string_view::npos) return std::string(reply);
  const auto begin = reply.rfind("@startuml", end);
  if (begin == std::string_view::npos) return std::string(reply);
  return std::string(reply.substr(begin, end + 7 - begin));
}

LlmProvider::LlmProvider(LlmClient& client, std::vector<TupleFields> user_examples,
                         std::vector<TupleFields> robot_examples)
    : client_(client), user_examples_(std::move(user_examples)), robot_examples_(std::move(robot_examples)) {}

std::string LlmProvider::user_input(const synth::TransitionContext& ctx) {
  const auto bundle = build_user_input_prompt(ctx.flowchart_text, ctx.transition.current, ctx.transition.next,
                                              user_examples_);
  return extract_field(client_.complete(bundle), kUserHeader);
}

std::string LlmProvider::robot_output(const synth::TransitionContext& ctx, std::string_view user_input) {
  const auto bundle = build_robot_output_prompt(ctx.flowchart_text, ctx.transition.current,
                                                ctx.transition.next, user_input, robot_examples_);
  return extract_field(client_.complete(bundle), kRobotHeader);
}

plantuml::ActivityAst llm_insert_loop(const plantuml::ActivityAst& ast, LlmClient& client,
                                      const LoopExemplar& exemplar, unsigned attempts) {
  const auto bundle = build_backward_prompt(plantuml::render(ast), exemplar);
  std::string reason = "no attempts made";
  for (unsigned variant = 0; variant < attempts; ++variant) {
    const auto parsed = plantuml::parse(extract_plantuml(client.complete(bundle, variant)));
    if (!parsed.ok()) {
      reason = plantuml::format_diagnostic(parsed.diagnostics.front());
      continue;
    }
    const auto problems = augment::check_loop_revision(ast, *parsed.ast);
    if (problems.empty()) return *parsed.ast;
    reason = problems.front();
  }
  throw Error(ErrorCode::Synthesis, "loop revision rejected after " + std::to_string(attempts) +
                                        " attempt(s): " + reason);
}

}  // namespace flowdial::llm
