#include "flowdial/plantuml.hpp"

#include <set>
#include <sstream>

#include "flowdial/text.hpp"

namespace flowdial::plantuml {

bool Branch::operator==(const Branch&) const = default;
bool Repeat::operator==(const Repeat&) const = default;

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::StartUml: return "StartUml";
    case TokenKind::EndUml: return "EndUml";
    case TokenKind::Start: return "Start";
    case TokenKind::Stop: return "Stop";
    case TokenKind::Action: return "Action";
    case TokenKind::IfHeader: return "IfHeader";
    case TokenKind::ElseIfHeader: return "ElseIfHeader";
    case TokenKind::ElseHeader: return "ElseHeader";
    case TokenKind::EndIf: return "EndIf";
    case TokenKind::Repeat: return "Repeat";
    case TokenKind::RepeatWhile: return "RepeatWhile";
    case TokenKind::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

void skip_space(std::string_view& s) { s = text::trim(s); }

// Reads a balanced "( ... )" group from the front of s.
std::optional<std::string> read_paren(std::string_view& s) {
  skip_space(s);
  if (s.empty() || s.front() != '(') return std::nullopt;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') {
      ++depth;
    } else if (s[i] == ')') {
      if (--depth == 0) {
        std::string inner = text::nfc(text::trim(s.substr(1, i - 1)));
        s.remove_prefix(i + 1);
        skip_space(s);
        return inner;
      }
    }
  }
  return std::nullopt;
}

bool consume_word(std::string_view& s, std::string_view word) {
  if (!text::starts_with_word(s, word)) return false;
  s.remove_prefix(word.size());
  skip_space(s);
  return true;
}

// "(cond) then [(guard)]"
bool read_conditional(std::string_view rest, Token& tok) {
  auto cond = read_paren(rest);
  if (!cond) return false;
  if (!consume_word(rest, "then")) return false;
  if (!rest.empty()) {
    auto guard = read_paren(rest);
    if (!guard || !rest.empty()) return false;
    tok.guard = *guard;
  }
  tok.condition = *cond;
  return true;
}

Token classify(std::string_view line, std::size_t line_no) {
  Token tok;
  tok.line_no = line_no;
  tok.text = std::string(line);
  std::string_view rest = line;

  if (line.size() >= 2 && line.front() == ':' && line.back() == ';') {
    tok.kind = TokenKind::Action;
    tok.text = text::nfc(text::trim(line.substr(1, line.size() - 2)));
    return tok;
  }
  if (consume_word(rest, "@startuml")) {
    tok.kind = TokenKind::StartUml;
    return tok;
  }
  if (line == "@enduml") {
    tok.kind = TokenKind::EndUml;
    return tok;
  }
  if (line == "start") {
    tok.kind = TokenKind::Start;
    return tok;
  }
  if (line == "stop") {
    tok.kind = TokenKind::Stop;
    return tok;
  }
  if (line == "endif" || line == "end if") {
    tok.kind = TokenKind::EndIf;
    return tok;
  }
  if (line == "repeat") {
    tok.kind = TokenKind::Repeat;
    return tok;
  }
  rest = line;
  if (consume_word(rest, "if")) {
    if (read_conditional(rest, tok)) tok.kind = TokenKind::IfHeader;
    return tok;
  }
  rest = line;
  if (consume_word(rest, "elseif") || (consume_word(rest, "else") && consume_word(rest, "if"))) {
    if (read_conditional(rest, tok)) tok.kind = TokenKind::ElseIfHeader;
    return tok;
  }
  rest = line;
  if (consume_word(rest, "else")) {
    if (rest.empty()) {
      tok.kind = TokenKind::ElseHeader;
    } else if (auto guard = read_paren(rest); guard && rest.empty()) {
      tok.kind = TokenKind::ElseHeader;
      tok.guard = *guard;
    }
    return tok;
  }
  rest = line;
  if (consume_word(rest, "repeat") && consume_word(rest, "while")) {
    auto cond = read_paren(rest);
    if (!cond) return tok;
    if (consume_word(rest, "is")) {
      auto g = read_paren(rest);
      if (!g) return tok;
      tok.guard = *g;
    }
    if (consume_word(rest, "not")) {
      auto g = read_paren(rest);
      if (!g) return tok;
      tok.exit_guard = *g;
    }
    if (!rest.empty()) return tok;
    tok.condition = *cond;
    tok.kind = TokenKind::RepeatWhile;
    return tok;
  }
  return tok;
}

bool is_block_terminator(TokenKind kind) {
  switch (kind) {
    case TokenKind::Action:
    case TokenKind::IfHeader:
    case TokenKind::Repeat:
      return false;
    default:
      return true;
  }
}

void error(std::vector<Diagnostic>& diagnostics, std::size_t line, std::string message) {
  diagnostics.push_back({Severity::Error, std::move(message), line});
}

std::optional<Repeat> parse_repeat(TokenCursor& cursor, std::vector<Diagnostic>& diagnostics) {
  const Token& head = cursor.next();
  auto body = parse_sequential(cursor, diagnostics);
  if (!body) return std::nullopt;
  if (cursor.at_end() || cursor.peek().kind != TokenKind::RepeatWhile) {
    error(diagnostics, head.line_no,
          "unclosed 'repeat' opened at line " + std::to_string(head.line_no));
    return std::nullopt;
  }
  const Token& tail = cursor.next();
  if (body->empty()) {
    error(diagnostics, head.line_no, "empty 'repeat' body");
    return std::nullopt;
  }
  Repeat rep;
  rep.body = std::move(*body);
  rep.condition = tail.condition;
  if (!tail.guard.empty()) rep.loop_guard = tail.guard;
  if (!tail.exit_guard.empty()) rep.exit_guard = tail.exit_guard;
  if (rep.condition.empty()) {
    error(diagnostics, tail.line_no, "empty 'repeat while' condition");
    return std::nullopt;
  }
  if (rep.loop_guard == rep.exit_guard) {
    error(diagnostics, tail.line_no, "'repeat while' loop and exit guards are identical");
    return std::nullopt;
  }
  return rep;
}

const char* unexpected_message(TokenKind kind) {
  switch (kind) {
    case TokenKind::EndIf: return "'endif' without matching 'if'";
    case TokenKind::ElseHeader: return "'else' without matching 'if'";
    case TokenKind::ElseIfHeader: return "'elseif' without matching 'if'";
    case TokenKind::RepeatWhile: return "'repeat while' without matching 'repeat'";
    case TokenKind::Start: return "unexpected 'start'";
    case TokenKind::StartUml: return "unexpected '@startuml'";
    case TokenKind::EndUml: return "unexpected '@enduml'";
    case TokenKind::Stop: return "unexpected 'stop'";
    default: return "unexpected line";
  }
}

}  // namespace

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
  std::ostringstream out;
  if (!file.empty()) out << file << ':';
  out << d.line_no << ": " << (d.severity == Severity::Error ? "error" : "warning") << ": "
      << d.message;
  return out.str();
}

std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> tokens;
  std::size_t line_no = 0;
  for (std::string_view raw : text::split_lines(source)) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    tokens.push_back(classify(line, line_no));
  }
  return tokens;
}

std::optional<Block> parse_sequential(TokenCursor& cursor, std::vector<Diagnostic>& diagnostics) {
  Block block;
  while (!cursor.at_end()) {
    const Token& tok = cursor.peek();
    if (is_block_terminator(tok.kind)) break;
    switch (tok.kind) {
      case TokenKind::Action:
        if (tok.text.empty()) {
          error(diagnostics, tok.line_no, "empty action label");
          return std::nullopt;
        }
        block.push_back(Node{Action{tok.text}});
        cursor.next();
        break;
      case TokenKind::IfHeader: {
        auto decision = parse_decision(cursor, diagnostics);
        if (!decision) return std::nullopt;
        block.push_back(Node{std::move(*decision)});
        break;
      }
      case TokenKind::Repeat: {
        auto rep = parse_repeat(cursor, diagnostics);
        if (!rep) return std::nullopt;
        block.push_back(Node{std::move(*rep)});
        break;
      }
      default:
        break;
    }
  }
  return block;
}

std::optional<Decision> parse_decision(TokenCursor& cursor, std::vector<Diagnostic>& diagnostics) {
  const Token& head = cursor.next();
  const std::size_t if_line = head.line_no;
  Decision decision;
  decision.condition = head.condition;
  if (decision.condition.empty()) {
    error(diagnostics, if_line, "empty 'if' condition");
    return std::nullopt;
  }

  auto first = parse_sequential(cursor, diagnostics);
  if (!first) return std::nullopt;
  decision.branches.push_back(
      Branch{head.guard.empty() ? std::string(kDefaultThenGuard) : head.guard, {}, std::move(*first)});

  bool saw_else = false;
  const auto unclosed = [&] {
    error(diagnostics, if_line, "unclosed 'if' opened at line " + std::to_string(if_line));
  };
  for (;;) {
    if (cursor.at_end()) {
      unclosed();
      return std::nullopt;
    }
    const Token& tok = cursor.peek();
    if (tok.kind == TokenKind::EndIf) {
      cursor.next();
      break;
    }
    if (tok.kind == TokenKind::ElseIfHeader && !saw_else) {
      // Chains of elseif are flattened into sibling branches of one decision.
      cursor.next();
      auto body = parse_sequential(cursor, diagnostics);
      if (!body) return std::nullopt;
      decision.branches.push_back(
          Branch{tok.guard.empty() ? tok.condition : tok.guard, tok.condition, std::move(*body)});
      continue;
    }
    if (tok.kind == TokenKind::ElseHeader && !saw_else) {
      cursor.next();
      saw_else = true;
      auto body = parse_sequential(cursor, diagnostics);
      if (!body) return std::nullopt;
      decision.branches.push_back(Branch{
          tok.guard.empty() ? std::string(kImplicitElseGuard) : tok.guard, {}, std::move(*body)});
      continue;
    }
    if (tok.kind == TokenKind::ElseHeader || tok.kind == TokenKind::ElseIfHeader) {
      error(diagnostics, tok.line_no, "'else' branch already given for 'if' at line " +
                                          std::to_string(if_line));
      return std::nullopt;
    }
    unclosed();
    return std::nullopt;
  }

  if (!saw_else) decision.branches.push_back(Branch{std::string(kImplicitElseGuard), {}, {}});

  std::set<std::string> guards;
  for (const Branch& b : decision.branches) {
    if (!guards.insert(b.guard).second) {
      error(diagnostics, if_line, "duplicate guard '" + b.guard + "' in 'if' at line " +
                                      std::to_string(if_line));
      return std::nullopt;
    }
  }
  return decision;
}

ParseResult parse(std::string_view source) {
  ParseResult result;
  const std::vector<Token> tokens = tokenize(source);
  auto& diags = result.diagnostics;

  for (const Token& tok : tokens) {
    if (tok.kind == TokenKind::Unknown)
      error(diags, tok.line_no, "unsupported or malformed line: " + tok.text);
  }
  if (!diags.empty()) return result;

  TokenCursor cursor(tokens);
  if (cursor.at_end() || cursor.peek().kind != TokenKind::StartUml) {
    error(diags, cursor.at_end() ? 1 : cursor.peek().line_no, "missing @startuml");
    return result;
  }
  cursor.next();
  if (cursor.at_end() || cursor.peek().kind != TokenKind::Start) {
    error(diags, cursor.at_end() ? cursor.last_line() : cursor.peek().line_no,
          "expected 'start'");
    return result;
  }
  cursor.next();

  auto body = parse_sequential(cursor, diags);
  if (!body) return result;

  if (cursor.at_end()) {
    error(diags, cursor.last_line(), "expected 'stop'");
    return result;
  }
  if (cursor.peek().kind != TokenKind::Stop) {
    error(diags, cursor.peek().line_no, unexpected_message(cursor.peek().kind));
    return result;
  }
  cursor.next();
  if (cursor.at_end()) {
    error(diags, cursor.last_line(), "missing @enduml");
    return result;
  }
  if (cursor.peek().kind != TokenKind::EndUml) {
    error(diags, cursor.peek().line_no, "expected '@enduml' after 'stop'");
    return result;
  }
  cursor.next();
  if (!cursor.at_end()) {
    error(diags, cursor.peek().line_no, "content after @enduml");
    return result;
  }
  result.ast = ActivityAst{std::move(*body)};
  return result;
}

namespace {

void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void render_block(std::string& out, const Block& block, int depth) {
  for (const Node& node : block) {
    if (const auto* a = std::get_if<Action>(&node.value)) {
      indent(out, depth);
      out += ':' + a->label + ";\n";
    } else if (const auto* d = std::get_if<Decision>(&node.value)) {
      for (std::size_t i = 0; i < d->branches.size(); ++i) {
        const Branch& b = d->branches[i];
        indent(out, depth);
        if (i == 0) {
          out += "if (" + d->condition + ") then (" + b.guard + ")\n";
        } else if (!b.condition.empty()) {
          out += "elseif (" + b.condition + ") then (" + b.guard + ")\n";
        } else {
          out += "else (" + b.guard + ")\n";
        }
        render_block(out, b.body, depth + 1);
      }
      indent(out, depth);
      out += "endif\n";
    } else if (const auto* r = std::get_if<Repeat>(&node.value)) {
      indent(out, depth);
      out += "repeat\n";
      render_block(out, r->body, depth + 1);
      indent(out, depth);
      out += "repeat while (" + r->condition + ") is (" + r->loop_guard + ") not (" +
             r->exit_guard + ")\n";
    }
  }
}

void check_block(const Block& block, std::vector<Diagnostic>& diags) {
  for (const Node& node : block) {
    if (const auto* a = std::get_if<Action>(&node.value)) {
      if (text::trim(a->label).empty()) error(diags, 0, "empty action label");
    } else if (const auto* d = std::get_if<Decision>(&node.value)) {
      if (d->condition.empty()) error(diags, 0, "empty decision condition");
      if (d->branches.size() < 2) error(diags, 0, "decision '" + d->condition + "' has fewer than 2 branches");
      std::set<std::string> guards;
      for (std::size_t i = 0; i < d->branches.size(); ++i) {
        const Branch& b = d->branches[i];
        if (b.guard.empty()) error(diags, 0, "empty guard in decision '" + d->condition + "'");
        if (!guards.insert(b.guard).second)
          error(diags, 0, "duplicate guard '" + b.guard + "' in decision '" + d->condition + "'");
        const bool middle = i > 0 && i + 1 < d->branches.size();
        if (i == 0 && !b.condition.empty())
          error(diags, 0, "first branch of '" + d->condition + "' carries an elseif condition");
        if (middle && b.condition.empty())
          error(diags, 0, "'else' branch of '" + d->condition + "' is not last");
        if (i + 1 == d->branches.size() && i > 0 && !b.condition.empty())
          error(diags, 0, "decision '" + d->condition + "' has no final 'else' branch");
        check_block(b.body, diags);
      }
    } else if (const auto* r = std::get_if<Repeat>(&node.value)) {
      if (r->body.empty()) error(diags, 0, "empty repeat body");
      if (r->condition.empty()) error(diags, 0, "empty repeat condition");
      if (r->loop_guard.empty() || r->exit_guard.empty() || r->loop_guard == r->exit_guard)
        error(diags, 0, "invalid repeat guards for '" + r->condition + "'");
      check_block(r->body, diags);
    }
  }
}

Block map_block(const Block& block,
                const std::function<std::string(const std::string&, LabelRole)>& fn) {
  Block out;
  out.reserve(block.size());
  for (const Node& node : block) {
    if (const auto* a = std::get_if<Action>(&node.value)) {
      out.push_back(Node{Action{fn(a->label, LabelRole::Action)}});
    } else if (const auto* d = std::get_if<Decision>(&node.value)) {
      Decision copy;
      copy.condition = fn(d->condition, LabelRole::Condition);
      for (const Branch& b : d->branches) {
        copy.branches.push_back(
            Branch{b.guard, b.condition.empty() ? std::string{} : fn(b.condition, LabelRole::Condition),
                   map_block(b.body, fn)});
      }
      out.push_back(Node{std::move(copy)});
    } else if (const auto* r = std::get_if<Repeat>(&node.value)) {
      Repeat copy;
      copy.body = map_block(r->body, fn);
      copy.condition = fn(r->condition, LabelRole::Condition);
      copy.loop_guard = r->loop_guard;
      copy.exit_guard = r->exit_guard;
      out.push_back(Node{std::move(copy)});
    }
  }
  return out;
}

void visit_block(const Block& block, const std::function<void(const std::string&, LabelRole)>& fn) {
  for (const Node& node : block) {
    if (const auto* a = std::get_if<Action>(&node.value)) {
      fn(a->label, LabelRole::Action);
    } else if (const auto* d = std::get_if<Decision>(&node.value)) {
      fn(d->condition, LabelRole::Condition);
      for (const Branch& b : d->branches) {
        if (!b.condition.empty()) fn(b.condition, LabelRole::Condition);
        visit_block(b.body, fn);
      }
    } else if (const auto* r = std::get_if<Repeat>(&node.value)) {
      visit_block(r->body, fn);
      fn(r->condition, LabelRole::Condition);
    }
  }
}

void count_block(const Block& block, AstCounts& counts) {
  for (const Node& node : block) {
    if (std::holds_alternative<Action>(node.value)) {
      ++counts.actions;
    } else if (const auto* d = std::get_if<Decision>(&node.value)) {
      ++counts.decisions;
      for (const Branch& b : d->branches) count_block(b.body, counts);
    } else if (const auto* r = std::get_if<Repeat>(&node.value)) {
      ++counts.repeats;
      count_block(r->body, counts);
    }
  }
}

}  // namespace

std::string render(const ActivityAst& ast) {
  std::string out = "@startuml\nstart\n";
  render_block(out, ast.body, 0);
  out += "stop\n@enduml";
  return out;
}

std::vector<Diagnostic> validate_syntax(std::string_view source) {
  return parse(source).diagnostics;
}

std::vector<Diagnostic> check_ast(const ActivityAst& ast) {
  std::vector<Diagnostic> diags;
  check_block(ast.body, diags);
  return diags;
}

ActivityAst map_labels(const ActivityAst& ast,
                       const std::function<std::string(const std::string&, LabelRole)>& fn) {
  return ActivityAst{map_block(ast.body, fn)};
}

void for_each_label(const ActivityAst& ast,
                    const std::function<void(const std::string&, LabelRole)>& fn) {
  visit_block(ast.body, fn);
}

AstCounts count_nodes(const ActivityAst& ast) {
  AstCounts counts;
  count_block(ast.body, counts);
  return counts;
}

}  // namespace flowdial::plantuml
