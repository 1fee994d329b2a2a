#include "flowdial/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <stdexcept>

#include "flowdial/error.hpp"

namespace flowdial {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Structural: return "structural";
    case ErrorCode::PathOverflow: return "path_overflow";
    case ErrorCode::Resolution: return "resolution";
    case ErrorCode::UnknownState: return "unknown_state";
    case ErrorCode::AmbiguousState: return "ambiguous_state";
    case ErrorCode::UnmatchedGuard: return "unmatched_guard";
    case ErrorCode::SessionDone: return "session_done";
    case ErrorCode::LoopLimit: return "loop_limit";
    case ErrorCode::SiteOutOfRange: return "site_out_of_range";
    case ErrorCode::ConditionCollision: return "condition_collision";
    case ErrorCode::Synthesis: return "synthesis";
    case ErrorCode::UnknownFlowchart: return "unknown_flowchart";
    case ErrorCode::DuplicatePrediction: return "duplicate_prediction";
    case ErrorCode::UnknownSample: return "unknown_sample";
    case ErrorCode::Io: return "io";
    case ErrorCode::Usage: return "usage";
    case ErrorCode::RetriesExhausted: return "retries_exhausted";
    case ErrorCode::AuthFailure: return "auth_failure";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::BadResponse: return "bad_response";
  }
  return "unknown";
}

}  // namespace flowdial

namespace flowdial::text {

namespace {

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool is_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Length in bytes of a whitespace sequence at the front of s, 0 if none.
std::size_t leading_space(std::string_view s) {
  if (s.empty()) return 0;
  const auto c = static_cast<unsigned char>(s[0]);
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return 1;
  if (s.size() >= 2 && c == 0xC2 && static_cast<unsigned char>(s[1]) == 0xA0) return 2;
  if (s.size() >= 3 && c == 0xE3 && static_cast<unsigned char>(s[1]) == 0x80 &&
      static_cast<unsigned char>(s[2]) == 0x80)
    return 3;
  if (s.size() >= 3 && c == 0xEF && static_cast<unsigned char>(s[1]) == 0xBB &&
      static_cast<unsigned char>(s[2]) == 0xBF)
    return 3;
  return 0;
}

std::size_t trailing_space(std::string_view s) {
  if (s.empty()) return 0;
  const auto c = static_cast<unsigned char>(s.back());
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return 1;
  if (s.size() >= 2 && leading_space(s.substr(s.size() - 2)) == 2) return 2;
  if (s.size() >= 3 && leading_space(s.substr(s.size() - 3)) == 3) return 3;
  return 0;
}

}  // namespace

std::string nfc(std::string_view s) {
  if (is_ascii(s)) return std::string(s);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  const icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  const icu::UnicodeString out = norm->normalize(in, status);
  if (U_FAILURE(status)) return std::string(s);
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::string_view trim(std::string_view s) {
  while (std::size_t n = leading_space(s)) s.remove_prefix(n);
  while (std::size_t n = trailing_space(s)) s.remove_suffix(n);
  return s;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  while (!s.empty()) {
    if (std::size_t n = leading_space(s)) {
      in_space = true;
      s.remove_prefix(n);
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(s.front());
    s.remove_prefix(1);
  }
  return out;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::size_t codepoint_count(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t nl = s.find('\n', pos);
    std::string_view line =
        s.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (nl == std::string_view::npos) {
      if (!line.empty()) lines.push_back(line);
      break;
    }
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

bool starts_with_word(std::string_view s, std::string_view word) {
  if (s.size() < word.size() || s.substr(0, word.size()) != word) return false;
  return s.size() == word.size() || !is_alnum(s[word.size()]);
}

std::size_t rfind_bounded(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || needle.size() > haystack.size()) return std::string_view::npos;
  const bool check_front = is_alnum(needle.front());
  const bool check_back = is_alnum(needle.back());
  std::size_t pos = haystack.rfind(needle);
  while (pos != std::string_view::npos) {
    const std::size_t end = pos + needle.size();
    const bool front_ok = !check_front || pos == 0 || !is_alnum(haystack[pos - 1]);
    const bool back_ok = !check_back || end == haystack.size() || !is_alnum(haystack[end]);
    if (front_ok && back_ok) return end;
    if (pos == 0) break;
    pos = haystack.rfind(needle, pos - 1);
  }
  return std::string_view::npos;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace flowdial::text
