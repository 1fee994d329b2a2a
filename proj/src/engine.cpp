#include "flowdial/engine.hpp"

#include <fstream>
#include <sstream>

#include "flowdial/error.hpp"
#include "flowdial/text.hpp"

namespace flowdial::engine {

using graph::GraphEdge;
using graph::NodeId;
using graph::NodeKind;
using graph::StateGraph;

Lexicon Lexicon::from_json(const nlohmann::json& j) {
  Lexicon lex;
  lex.affirmative_guards = j.value("affirmative_guards", lex.affirmative_guards);
  lex.negative_guards = j.value("negative_guards", lex.negative_guards);
  lex.affirmative_keywords = j.value("affirmative_keywords", lex.affirmative_keywords);
  lex.negative_keywords = j.value("negative_keywords", lex.negative_keywords);
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read lexicon file " + path);
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json Lexicon::to_json() const {
  return {{"affirmative_guards", affirmative_guards},
          {"negative_guards", negative_guards},
          {"affirmative_keywords", affirmative_keywords},
          {"negative_keywords", negative_keywords}};
}

std::string normalize_for_match(std::string_view s) {
  return text::ascii_lower(text::collapse_whitespace(text::nfc(text::trim(s))));
}

namespace {

struct Hit {
  std::size_t end = 0;
  std::size_t length = 0;

  bool better_than(const Hit& other) const {
    return end != other.end ? end > other.end : length > other.length;
  }
};

std::optional<Hit> find_hit(const std::string& haystack, const std::string& needle) {
  const std::size_t end = text::rfind_bounded(haystack, needle);
  if (end == std::string::npos) return std::nullopt;
  return Hit{end, needle.size()};
}

bool contains(const std::vector<std::string>& list, const std::string& normalized) {
  for (const auto& item : list)
    if (normalize_for_match(item) == normalized) return true;
  return false;
}

}  // namespace

GuardMatcher::GuardMatcher(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

std::optional<std::string> GuardMatcher::try_match(const std::vector<std::string>& guards,
                                                   std::string_view user_input) const {
  const std::string input = normalize_for_match(user_input);

  std::optional<Hit> best;
  std::size_t best_guard = 0;
  for (std::size_t i = 0; i < guards.size(); ++i) {
    auto hit = find_hit(input, normalize_for_match(guards[i]));
    if (hit && (!best || hit->better_than(*best))) {
      best = hit;
      best_guard = i;
    }
  }
  if (best) return guards[best_guard];

  std::optional<Hit> keyword;
  bool affirmative = false;
  const auto scan = [&](const std::vector<std::string>& words, bool polarity) {
    for (const auto& w : words) {
      auto hit = find_hit(input, normalize_for_match(w));
      if (hit && (!keyword || hit->better_than(*keyword))) {
        keyword = hit;
        affirmative = polarity;
      }
    }
  };
  scan(lexicon_.affirmative_keywords, true);
  scan(lexicon_.negative_keywords, false);
  if (!keyword) return std::nullopt;

  const auto& polarity_guards = affirmative ? lexicon_.affirmative_guards : lexicon_.negative_guards;
  std::optional<std::string> chosen;
  for (const auto& g : guards) {
    if (contains(polarity_guards, normalize_for_match(g))) {
      if (chosen) return std::nullopt;
      chosen = g;
    }
  }
  return chosen;
}

std::string GuardMatcher::match(const std::vector<std::string>& guards,
                                std::string_view user_input) const {
  if (auto g = try_match(guards, user_input)) return *g;
  std::ostringstream msg;
  msg << "input '" << user_input << "' matches none of the options";
  throw UnmatchedGuardError(msg.str(), guards);
}

std::vector<std::string> guard_options(const StateGraph& graph, NodeId decision) {
  std::vector<std::string> guards;
  for (auto e : graph.out_edges(decision)) guards.push_back(graph.edge(e).guard.value_or(""));
  return guards;
}

std::string match_guard(const StateGraph& graph, NodeId decision, std::string_view user_input,
                        const GuardMatcher& matcher) {
  return matcher.match(guard_options(graph, decision), user_input);
}

DialogueEngine::DialogueEngine(std::shared_ptr<const StateGraph> graph, GuardMatcher matcher,
                               synth::TemplateSet templates, unsigned max_backward)
    : graph_(std::move(graph)),
      matcher_(std::move(matcher)),
      templates_(std::move(templates)),
      max_backward_(max_backward) {}

StepResult DialogueEngine::next_from(NodeId current, std::string_view user_input) const {
  const StateGraph& g = *graph_;
  const auto& node = g.node(current);
  if (node.kind != NodeKind::State && node.kind != NodeKind::Decision)
    throw Error(ErrorCode::UnknownState, "node '" + node.label + "' is not a state or decision");

  const auto& out = g.out_edges(current);
  graph::EdgeId chosen = out.front();
  if (out.size() >= 2) {
    const std::string guard = match_guard(g, current, user_input, matcher_);
    for (auto e : out) {
      if (g.edge(e).guard == guard) {
        chosen = e;
        break;
      }
    }
  }
  const GraphEdge& edge = g.edge(chosen);
  const auto& next = g.node(edge.to);

  StepResult r;
  r.next_id = edge.to;
  r.next_state = next.label;
  r.kind = out.size() >= 2 ? graph::TransitionKind::Decision : graph::TransitionKind::Sequential;
  r.guard = edge.guard;
  r.backward = edge.backward;
  r.done = next.kind == NodeKind::Stop;
  if (r.done) {
    r.robot_output = templates_.robot_finish;
  } else {
    graph::Transition t;
    t.current = node.label;
    t.next = next.label;
    t.guard = edge.guard;
    t.kind = r.kind;
    t.next_is_decision = next.kind == NodeKind::Decision;
    r.robot_output = synth::template_robot_output(t, templates_);
  }
  return r;
}

StepResult DialogueEngine::next_state(std::string_view current, std::string_view user_input) const {
  const StateGraph& g = *graph_;
  const std::string label = text::nfc(text::trim(current));
  const std::vector<NodeId> candidates = g.find(label);
  if (candidates.empty()) throw Error(ErrorCode::UnknownState, "unknown state '" + label + "'");
  if (candidates.size() == 1) return next_from(candidates.front(), user_input);

  const auto agree = [&](const std::vector<StepResult>& results) {
    for (const auto& r : results) {
      if (r.next_state != results.front().next_state)
        throw Error(ErrorCode::AmbiguousState,
                    "state '" + label + "' occurs more than once with different successors");
    }
    return results.front();
  };

  std::vector<StepResult> decided;
  std::vector<std::string> options;
  for (NodeId n : candidates) {
    if (g.node(n).kind != NodeKind::Decision) continue;
    auto guards = guard_options(g, n);
    options.insert(options.end(), guards.begin(), guards.end());
    if (matcher_.try_match(guards, user_input)) decided.push_back(next_from(n, user_input));
  }
  if (!decided.empty()) return agree(decided);

  std::vector<StepResult> states;
  for (NodeId n : candidates) {
    if (g.node(n).kind == NodeKind::State) states.push_back(next_from(n, user_input));
  }
  if (!states.empty()) return agree(states);
  throw UnmatchedGuardError("input '" + std::string(user_input) + "' matches none of the options",
                            options);
}

NodeId DialogueEngine::initial_node() const {
  return graph_->edge(graph_->out_edges(graph_->start()).front()).to;
}

Session DialogueEngine::start_session(std::string flowchart_id, std::string session_id) const {
  Session s;
  s.session_id = std::move(session_id);
  s.flowchart_id = std::move(flowchart_id);
  s.current = initial_node();
  s.done = s.current == graph_->stop();
  return s;
}

StepResult DialogueEngine::step(Session& session, std::string_view user_input) const {
  if (session.done) throw Error(ErrorCode::SessionDone, "session has reached the end of the flow");
  StepResult r = next_from(session.current, user_input);
  if (r.backward && session.backward_taken >= max_backward_)
    throw Error(ErrorCode::LoopLimit,
                "loop taken more than " + std::to_string(max_backward_) + " times in this session");
  if (r.backward) ++session.backward_taken;
  session.history.push_back(
      {graph_->node(session.current).label, std::string(user_input), r.next_state, r.backward});
  session.current = r.next_id;
  session.done = r.done;
  return r;
}

void DialogueEngine::reset(Session& session) const {
  session.resets.push_back(session.history.size());
  session.current = initial_node();
  session.done = session.current == graph_->stop();
  session.backward_taken = 0;
}

StepResult oracle_next_state(const StateGraph& graph, std::string_view current,
                             std::string_view user_input, const GuardMatcher& matcher) {
  // Non-owning view; the engine does not outlive this call.
  DialogueEngine engine(std::shared_ptr<const StateGraph>(&graph, [](const StateGraph*) {}), matcher);
  return engine.next_state(current, user_input);
}

std::shared_ptr<SessionStore::Entry> SessionStore::create(std::shared_ptr<const DialogueEngine> engine,
                                                          std::string flowchart_id) {
  std::lock_guard lock(mutex_);
  auto entry = std::make_shared<Entry>();
  std::string id = "s" + std::to_string(next_id_++);
  entry->session = engine->start_session(std::move(flowchart_id), id);
  entry->engine = std::move(engine);
  entry->last_access = Clock::now();
  sessions_.emplace(id, entry);
  return entry;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return nullptr;
  return it->second;
}

bool SessionStore::erase(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  return sessions_.erase(session_id) > 0;
}

std::size_t SessionStore::size() {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t SessionStore::purge_idle() {
  std::lock_guard lock(mutex_);
  const auto now = Clock::now();
  std::size_t removed = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock entry_lock(it->second->mutex, std::try_to_lock);
    if (entry_lock.owns_lock() && now - it->second->last_access > idle_timeout_) {
      entry_lock.unlock();
      it = sessions_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

}  // namespace flowdial::engine
