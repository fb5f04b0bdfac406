#include <cctype>
#include <algorithm>

#include "sosim/console/token.hpp"

namespace sosim::console {

Span join(const Span& a, const Span& b) {
  Span s = a;
  const std::size_t end = std::max(a.offset + a.length, b.offset + b.length);
  s.length = end - a.offset;
  return s;
}

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::word: return "word";
    case TokenKind::number: return "number";
    case TokenKind::string: return "string";
    case TokenKind::bracket_open: return "[";
    case TokenKind::bracket_close: return "]";
    case TokenKind::op: return "operator";
    case TokenKind::end: return "end of input";
  }
  return "?";
}

std::string ConsoleError::describe() const {
  return "line " + std::to_string(span_.line) + ", column " + std::to_string(span_.column) + ": " + what();
}

namespace {

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.kind = TokenKind::end;
    end.span = here(0);
    out.push_back(end);
    return out;
  }

 private:
  Span here(std::size_t length) const { return Span{line_, column_, pos_, length}; }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
      } else {
        break;
      }
    }
  }

  Token make(TokenKind kind, std::size_t length) {
    Token t;
    t.kind = kind;
    t.span = here(length);
    t.text = std::string(text_.substr(pos_, length));
    advance(length);
    return t;
  }

  Token next() {
    const char c = text_[pos_];
    if (is_digit(c)) {
      std::size_t end = pos_;
      while (end < text_.size() && is_digit(text_[end])) ++end;
      if (end + 1 < text_.size() && text_[end] == '.' && is_digit(text_[end + 1])) {
        ++end;
        while (end < text_.size() && is_digit(text_[end])) ++end;
      }
      Token t = make(TokenKind::number, end - pos_);
      t.number = std::stod(t.text);
      return t;
    }
    if (is_letter(c)) {
      std::size_t end = pos_;
      while (end < text_.size() && (is_letter(text_[end]) || is_digit(text_[end]) || text_[end] == '-')) ++end;
      return make(TokenKind::word, end - pos_);
    }
    if (c == '"') {
      std::size_t end = pos_ + 1;
      while (end < text_.size() && text_[end] != '"' && text_[end] != '\n') ++end;
      if (end >= text_.size() || text_[end] != '"') throw ConsoleError(here(1), "unterminated string");
      return make(TokenKind::string, end + 1 - pos_);
    }
    if (c == '[') return make(TokenKind::bracket_open, 1);
    if (c == ']') return make(TokenKind::bracket_close, 1);
    if (pos_ + 1 < text_.size()) {
      const std::string_view two = text_.substr(pos_, 2);
      if (two == "<=" || two == ">=" || two == "!=") return make(TokenKind::op, 2);
    }
    switch (c) {
      case '(': case ')': case '+': case '-': case '*': case '/': case '<': case '>': case '=':
        return make(TokenKind::op, 1);
      default: break;
    }
    const auto uc = static_cast<unsigned char>(c);
    std::string shown = std::isprint(uc) ? std::string(1, c) : "\\x" + std::to_string(uc);
    throw ConsoleError(here(1), "illegal character '" + shown + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace sosim::console
