#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "flowdial/graph.hpp"

namespace flowdial::synth {

// Deterministic phrasing for user inputs and robot outputs. Patterns use the
// placeholders {current}, {next} and {guard}.
struct TemplateSet {
  std::string sequential_user = "{current} has been completed.";
  std::string decision_user = "Answer to '{current}': {guard}.";
  std::string robot_state = "Now process {next}.";
  std::string robot_decision = "Please make a choice: {next}";
  std::string robot_finish = "The process is complete.";

  static TemplateSet from_json(const nlohmann::json& j);
  static TemplateSet load(const std::string& path);
  nlohmann::json to_json() const;
};

std::string fill_pattern(std::string_view pattern, std::string_view current, std::string_view next,
                         std::string_view guard);

std::string template_user_input(const graph::Transition& t, const TemplateSet& templates = {});
std::string template_robot_output(const graph::Transition& t, const TemplateSet& templates = {});

}  // namespace flowdial::synth
