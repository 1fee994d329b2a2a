#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Tokenizer, recursive-descent parser and canonical renderer for the PlantUML
// activity-diagram subset: start/stop, `:label;`, if/elseif/else/endif and
// repeat / repeat while.
namespace flowdial::plantuml {

enum class TokenKind {
  StartUml,
  EndUml,
  Start,
  Stop,
  Action,
  IfHeader,
  ElseIfHeader,
  ElseHeader,
  EndIf,
  Repeat,
  RepeatWhile,
  Unknown,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Unknown;
  // Action label for Action tokens, otherwise the trimmed source line.
  std::string text;
  std::size_t line_no = 0;
  // If/ElseIf/RepeatWhile condition.
  std::string condition;
  // then-guard, else-guard or repeat-while `is` guard; empty when omitted.
  std::string guard;
  // repeat-while `not` guard; empty when omitted.
  std::string exit_guard;

  bool operator==(const Token&) const = default;
};

std::vector<Token> tokenize(std::string_view source);

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  std::size_t line_no = 0;

  bool operator==(const Diagnostic&) const = default;
};

std::string format_diagnostic(const Diagnostic& d, std::string_view file = {});

struct Node;
using Block = std::vector<Node>;

struct Action {
  std::string label;

  bool operator==(const Action&) const = default;
};

struct Branch {
  std::string guard;
  // Set for branches introduced by `elseif (cond)`; empty for the first
  // branch and for `else`.
  std::string condition;
  Block body;

  bool operator==(const Branch&) const;
};

struct Decision {
  std::string condition;
  std::vector<Branch> branches;

  bool operator==(const Decision&) const = default;
};

struct Repeat {
  Block body;
  std::string condition;
  std::string loop_guard = "yes";
  std::string exit_guard = "no";

  bool operator==(const Repeat&) const;
};

struct Node {
  std::variant<Action, Decision, Repeat> value;

  bool operator==(const Node&) const = default;
};

// The body between `start` and `stop`. Start and Stop are implicit: every
// document has exactly one of each, so they are not stored as nodes.
struct ActivityAst {
  Block body;

  bool operator==(const ActivityAst&) const = default;
};

struct ParseResult {
  std::optional<ActivityAst> ast;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return ast.has_value(); }
};

inline constexpr std::string_view kImplicitElseGuard = "no";
inline constexpr std::string_view kDefaultLoopGuard = "yes";
inline constexpr std::string_view kDefaultExitGuard = "no";
inline constexpr std::string_view kDefaultThenGuard = "yes";

ParseResult parse(std::string_view source);

// Entry points of the recursive descent, exposed so callers can parse block
// fragments from an existing token stream. The cursor advances past consumed
// tokens; errors are appended to `diagnostics` and parsing stops at the first.
class TokenCursor {
 public:
  explicit TokenCursor(const std::vector<Token>& tokens) : tokens_(&tokens) {}

  bool at_end() const { return pos_ >= tokens_->size(); }
  const Token& peek() const { return (*tokens_)[pos_]; }
  const Token& next() { return (*tokens_)[pos_++]; }
  std::size_t position() const { return pos_; }
  // Line number of the last token, used for errors at end of input.
  std::size_t last_line() const { return tokens_->empty() ? 0 : tokens_->back().line_no; }

 private:
  const std::vector<Token>* tokens_;
  std::size_t pos_ = 0;
};

std::optional<Block> parse_sequential(TokenCursor& cursor, std::vector<Diagnostic>& diagnostics);
std::optional<Decision> parse_decision(TokenCursor& cursor, std::vector<Diagnostic>& diagnostics);

// Canonical text: fenced by @startuml/@enduml, one node per line, two spaces of
// indentation per nesting level, LF line endings, no trailing newline.
std::string render(const ActivityAst& ast);

std::vector<Diagnostic> validate_syntax(std::string_view source);

// Structural checks on an AST built in code (parsed ASTs always pass).
std::vector<Diagnostic> check_ast(const ActivityAst& ast);

// Returns a copy with every label-bearing field (action labels and
// decision/elseif/repeat conditions) passed through `fn`. Guards are kept.
enum class LabelRole { Action, Condition };
ActivityAst map_labels(const ActivityAst& ast,
                       const std::function<std::string(const std::string&, LabelRole)>& fn);

// Visits every label in textual order.
void for_each_label(const ActivityAst& ast,
                    const std::function<void(const std::string&, LabelRole)>& fn);

struct AstCounts {
  std::size_t actions = 0;
  std::size_t decisions = 0;
  std::size_t repeats = 0;
};

AstCounts count_nodes(const ActivityAst& ast);

}  // namespace flowdial::plantuml
