#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flowdial/plantuml.hpp"

// Natural-language, state-code and hybrid renderings of a flowchart.
namespace flowdial::formats {

enum class FormatScheme { NL, SC, Hybrid };

std::string_view format_name(FormatScheme scheme);
// Accepts "nl", "sc", "hybrid" (case-insensitive). Throws Error(Usage).
FormatScheme parse_format(std::string_view name);

// Ordered label -> code mapping. States get S1, S2, ...; conditions get C1,
// C2, ...; both counters follow first appearance in the PlantUML text.
class StateCodeDict {
 public:
  // Adds label if new and returns its code. Throws Error(Structural) if the
  // label is already registered under the other prefix.
  const std::string& add(const std::string& label, char prefix);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::optional<std::string> code_of(std::string_view label) const;
  std::optional<std::string> label_of(std::string_view code) const;

  nlohmann::ordered_json to_json() const;
  // Entries are read in document order, which must be first-appearance order.
  static StateCodeDict from_json(const nlohmann::ordered_json& j);

  bool operator==(const StateCodeDict& other) const { return entries_ == other.entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::unordered_map<std::string, std::size_t> by_label_;
  std::unordered_map<std::string, std::size_t> by_code_;
  std::size_t states_ = 0;
  std::size_t conditions_ = 0;
};

StateCodeDict assign_codes(const plantuml::ActivityAst& ast);

struct FormattedFlowchart {
  std::string flowchart_text;
  std::optional<StateCodeDict> dict;
};

FormattedFlowchart to_format(const plantuml::ActivityAst& ast, FormatScheme scheme);

// "S12" -> label via dict, "S12: label" -> "label", anything else passes
// through (trimmed, NFC). Throws Error(Resolution) for an unknown code.
std::string resolve_label(std::string_view token, const StateCodeDict* dict);

// Maps every label of an SC or Hybrid AST back to natural language.
plantuml::ActivityAst resolve_ast(const plantuml::ActivityAst& ast, const StateCodeDict* dict);

}  // namespace flowdial::formats
