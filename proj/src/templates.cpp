#include "flowdial/templates.hpp"

#include <fstream>

#include "flowdial/error.hpp"

namespace flowdial::synth {

TemplateSet TemplateSet::from_json(const nlohmann::json& j) {
  TemplateSet t;
  t.sequential_user = j.value("sequential_user", t.sequential_user);
  t.decision_user = j.value("decision_user", t.decision_user);
  t.robot_state = j.value("robot_state", t.robot_state);
  t.robot_decision = j.value("robot_decision", t.robot_decision);
  t.robot_finish = j.value("robot_finish", t.robot_finish);
  return t;
}

TemplateSet TemplateSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read template file " + path);
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json TemplateSet::to_json() const {
  return {{"sequential_user", sequential_user}, {"decision_user", decision_user},
          {"robot_state", robot_state},         {"robot_decision", robot_decision},
          {"robot_finish", robot_finish}};
}

std::string fill_pattern(std::string_view pattern, std::string_view current, std::string_view next,
                         std::string_view guard) {
  std::string out;
  out.reserve(pattern.size() + current.size() + next.size());
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      const std::size_t close = pattern.find('}', i);
      if (close != std::string_view::npos) {
        const std::string_view name = pattern.substr(i + 1, close - i - 1);
        if (name == "current") {
          out += current;
          i = close + 1;
          continue;
        }
        if (name == "next") {
          out += next;
          i = close + 1;
          continue;
        }
        if (name == "guard") {
          out += guard;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(pattern[i++]);
  }
  return out;
}

std::string template_user_input(const graph::Transition& t, const TemplateSet& templates) {
  const std::string guard = t.guard.value_or("");
  const auto& pattern =
      t.kind == graph::TransitionKind::Decision ? templates.decision_user : templates.sequential_user;
  return fill_pattern(pattern, t.current, t.next, guard);
}

std::string template_robot_output(const graph::Transition& t, const TemplateSet& templates) {
  const auto& pattern = t.next_is_decision ? templates.robot_decision : templates.robot_state;
  std::string out = fill_pattern(pattern, t.current, t.next, t.guard.value_or(""));
  if (out.empty()) out = templates.robot_finish;
  return out;
}

}  // namespace flowdial::synth
