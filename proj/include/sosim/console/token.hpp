#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sosim/error.hpp"

namespace sosim::console {

/// 1-based line/column of the first character plus the byte range.
struct Span {
  int line = 1;
  int column = 1;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Span covering both a and b (a first).
Span join(const Span& a, const Span& b);

enum class TokenKind { word, number, string, bracket_open, bracket_close, op, end };
std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;  // exact source text
  Span span;
  double number = 0;
};

/// Lex, parse and evaluation errors, all positioned.
class ConsoleError : public Error {
 public:
  ConsoleError(Span span, const std::string& message) : Error(message), span_(span) {}
  const Span& span() const { return span_; }
  /// "line L, column C: message"
  std::string describe() const;

 private:
  Span span_;
};

/// Longest-match lexing; `;` comments run to end of line and are dropped.
/// The last token is always TokenKind::end.
std::vector<Token> tokenize(std::string_view text);

}  // namespace sosim::console
