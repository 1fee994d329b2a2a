#include "flowdial/formats.hpp"

#include <algorithm>

#include "flowdial/error.hpp"
#include "flowdial/text.hpp"

namespace flowdial::formats {

using plantuml::LabelRole;

std::string_view format_name(FormatScheme scheme) {
  switch (scheme) {
    case FormatScheme::NL: return "nl";
    case FormatScheme::SC: return "sc";
    case FormatScheme::Hybrid: return "hybrid";
  }
  return "nl";
}

FormatScheme parse_format(std::string_view name) {
  const std::string lower = text::ascii_lower(name);
  if (lower == "nl") return FormatScheme::NL;
  if (lower == "sc") return FormatScheme::SC;
  if (lower == "hybrid") return FormatScheme::Hybrid;
  throw Error(ErrorCode::Usage, "unknown format '" + std::string(name) + "' (expected nl|sc|hybrid)");
}

const std::string& StateCodeDict::add(const std::string& label, char prefix) {
  if (auto it = by_label_.find(label); it != by_label_.end()) {
    const std::string& code = entries_[it->second].second;
    if (code.front() != prefix)
      throw Error(ErrorCode::Structural,
                  "label '" + label + "' is used both as a state and as a condition");
    return code;
  }
  const std::size_t n = prefix == 'S' ? ++states_ : ++conditions_;
  std::string code = std::string(1, prefix) + std::to_string(n);
  by_label_.emplace(label, entries_.size());
  by_code_.emplace(code, entries_.size());
  entries_.emplace_back(label, std::move(code));
  return entries_.back().second;
}

std::optional<std::string> StateCodeDict::code_of(std::string_view label) const {
  auto it = by_label_.find(std::string(label));
  if (it == by_label_.end()) return std::nullopt;
  return entries_[it->second].second;
}

std::optional<std::string> StateCodeDict::label_of(std::string_view code) const {
  auto it = by_code_.find(std::string(code));
  if (it == by_code_.end()) return std::nullopt;
  return entries_[it->second].first;
}

nlohmann::ordered_json StateCodeDict::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [label, code] : entries_) j[label] = code;
  return j;
}

StateCodeDict StateCodeDict::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Resolution, "state code dictionary must be a JSON object");
  StateCodeDict dict;
  for (const auto& [label, value] : j.items()) {
    const auto code = value.get<std::string>();
    if (code.size() < 2 || (code[0] != 'S' && code[0] != 'C'))
      throw Error(ErrorCode::Resolution, "malformed state code '" + code + "'");
    if (dict.add(label, code[0]) != code)
      throw Error(ErrorCode::Resolution, "state code dictionary is not gapless at '" + code + "'");
  }
  return dict;
}

StateCodeDict assign_codes(const plantuml::ActivityAst& ast) {
  StateCodeDict dict;
  plantuml::for_each_label(ast, [&](const std::string& label, LabelRole role) {
    dict.add(label, role == LabelRole::Action ? 'S' : 'C');
  });
  return dict;
}

FormattedFlowchart to_format(const plantuml::ActivityAst& ast, FormatScheme scheme) {
  if (scheme == FormatScheme::NL) return {plantuml::render(ast), std::nullopt};
  StateCodeDict dict = assign_codes(ast);
  const auto code = [&](const std::string& label) { return *dict.code_of(label); };
  if (scheme == FormatScheme::SC) {
    auto coded = plantuml::map_labels(ast, [&](const std::string& l, LabelRole) { return code(l); });
    return {plantuml::render(coded), std::move(dict)};
  }
  auto hybrid = plantuml::map_labels(
      ast, [&](const std::string& l, LabelRole) { return code(l) + ": " + l; });
  return {plantuml::render(hybrid), std::nullopt};
}

namespace {

// Length of a leading [SC]<digits> code, 0 if none.
std::size_t code_prefix_length(std::string_view s) {
  if (s.size() < 2 || (s[0] != 'S' && s[0] != 'C')) return 0;
  std::size_t i = 1;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  return i > 1 ? i : 0;
}

}  // namespace

std::string resolve_label(std::string_view token, const StateCodeDict* dict) {
  const std::string normalized = text::nfc(text::trim(token));
  const std::string_view t = normalized;
  const std::size_t n = code_prefix_length(t);
  if (n > 0 && n == t.size()) {
    if (dict) {
      if (auto label = dict->label_of(t)) return *label;
    }
    throw Error(ErrorCode::Resolution, "unknown state code '" + normalized + "'");
  }
  if (n > 0 && t.size() > n + 1 && t[n] == ':' && t[n + 1] == ' ') {
    return std::string(text::trim(t.substr(n + 2)));
  }
  return normalized;
}

plantuml::ActivityAst resolve_ast(const plantuml::ActivityAst& ast, const StateCodeDict* dict) {
  return plantuml::map_labels(
      ast, [&](const std::string& l, LabelRole) { return resolve_label(l, dict); });
}

}  // namespace flowdial::formats
