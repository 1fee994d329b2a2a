#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "flowdial/graph.hpp"
#include "flowdial/templates.hpp"

// Ground-truth dialogue runtime: maps (state, user input) to the next state of
// a flowchart graph and keeps interactive sessions.
namespace flowdial::engine {

// Keyword lists for the second stage of guard matching. Guards whose
// normalized text appears in affirmative_guards/negative_guards get that
// polarity; an input keyword of a polarity selects the unique guard with it.
struct Lexicon {
  std::vector<std::string> affirmative_guards{"yes", "是", "需要"};
  std::vector<std::string> negative_guards{"no", "否", "不需要"};
  std::vector<std::string> affirmative_keywords{"yes", "是", "需要"};
  std::vector<std::string> negative_keywords{"no", "否", "不需要"};

  static Lexicon from_json(const nlohmann::json& j);
  static Lexicon load(const std::string& path);
  nlohmann::json to_json() const;
};

class GuardMatcher {
 public:
  explicit GuardMatcher(Lexicon lexicon = {});

  // Cascade: (1) a guard's own text inside the input, right-most occurrence
  // wins; (2) lexicon keywords mapped to the yes/no guard; (3) no match.
  std::optional<std::string> try_match(const std::vector<std::string>& guards,
                                       std::string_view user_input) const;

  // Throws UnmatchedGuardError listing the guards when nothing matches.
  std::string match(const std::vector<std::string>& guards, std::string_view user_input) const;

  const Lexicon& lexicon() const { return lexicon_; }

 private:
  Lexicon lexicon_;
};

std::string normalize_for_match(std::string_view s);

// Guards of a decision node in branch order.
std::vector<std::string> guard_options(const graph::StateGraph& graph, graph::NodeId decision);

std::string match_guard(const graph::StateGraph& graph, graph::NodeId decision,
                        std::string_view user_input, const GuardMatcher& matcher = GuardMatcher{});

struct StepResult {
  std::string next_state;  // graph label, or kStopLabel when the flow ends
  graph::NodeId next_id = 0;
  std::string robot_output;
  graph::TransitionKind kind = graph::TransitionKind::Sequential;
  std::optional<std::string> guard;
  bool backward = false;
  bool done = false;

  bool operator==(const StepResult&) const = default;
};

struct HistoryEntry {
  std::string state;
  std::string user_input;
  std::string next;
  bool backward = false;

  bool operator==(const HistoryEntry&) const = default;
};

struct Session {
  std::string session_id;
  std::string flowchart_id;
  graph::NodeId current = 0;
  std::vector<HistoryEntry> history;
  // History indices at which reset() was called.
  std::vector<std::size_t> resets;
  bool done = false;
  unsigned backward_taken = 0;
};

class DialogueEngine {
 public:
  explicit DialogueEngine(std::shared_ptr<const graph::StateGraph> graph,
                          GuardMatcher matcher = GuardMatcher{},
                          synth::TemplateSet templates = {}, unsigned max_backward = 10);

  const graph::StateGraph& graph() const { return *graph_; }
  const GuardMatcher& matcher() const { return matcher_; }
  const synth::TemplateSet& templates() const { return templates_; }

  // Next state from a specific node.
  StepResult next_from(graph::NodeId current, std::string_view user_input) const;

  // Next state from a label. A label shared by several nodes is resolved by
  // trying decision nodes whose guards match first, then state nodes; the
  // candidates must agree or Error(AmbiguousState) is raised.
  StepResult next_state(std::string_view current, std::string_view user_input) const;

  Session start_session(std::string flowchart_id, std::string session_id) const;
  StepResult step(Session& session, std::string_view user_input) const;
  void reset(Session& session) const;

  graph::NodeId initial_node() const;

 private:
  std::shared_ptr<const graph::StateGraph> graph_;
  GuardMatcher matcher_;
  synth::TemplateSet templates_;
  unsigned max_backward_;
};

StepResult oracle_next_state(const graph::StateGraph& graph, std::string_view current,
                             std::string_view user_input, const GuardMatcher& matcher = GuardMatcher{});

// Owns live sessions; steps on one session are serialized, distinct sessions
// proceed independently.
class SessionStore {
 public:
  using Clock = std::chrono::steady_clock;

  struct Entry {
    std::mutex mutex;
    Session session;
    std::shared_ptr<const DialogueEngine> engine;
    std::string robot_output;  // last thing the robot said
    Clock::time_point last_access;
  };

  explicit SessionStore(std::chrono::seconds idle_timeout = std::chrono::seconds(1800))
      : idle_timeout_(idle_timeout) {}

  std::shared_ptr<Entry> create(std::shared_ptr<const DialogueEngine> engine, std::string flowchart_id);
  std::shared_ptr<Entry> find(const std::string& session_id);
  bool erase(const std::string& session_id);
  std::size_t size();
  // Drops sessions idle for longer than the timeout.
  std::size_t purge_idle();

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::chrono::seconds idle_timeout_;
  std::size_t next_id_ = 1;
};

}  // namespace flowdial::engine
