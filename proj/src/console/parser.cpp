#include <array>
#include <utility>

#include "sosim/colors.hpp"
#include "sosim/console/ast.hpp"

namespace sosim::console {

namespace {

constexpr std::array<std::pair<std::string_view, int>, 14> kCommands{{
    {"fd", 1}, {"forward", 1}, {"bk", 1}, {"back", 1}, {"rt", 1}, {"right", 1}, {"lt", 1},
    {"left", 1}, {"setxy", 2}, {"die", 0}, {"ca", 0}, {"clear-all", 0}, {"create-link-with", 1},
    {"stop", 0},
}};

constexpr std::array<std::pair<std::string_view, int>, 9> kReporters{{
    {"random", 1}, {"random-float", 1}, {"count", 1}, {"one-of", 1}, {"turtle", 1},
    {"abs", 1}, {"min-one-of", 2}, {"max-one-of", 2}, {"sqrt", 1},
}};

constexpr std::array<std::string_view, 10> kReserved{"ask", "set", "let", "with", "in-radius",
                                                     "and", "or", "not", "crt", "create-turtles"};

bool reserved(std::string_view w) {
  for (auto r : kReserved)
    if (r == w) return true;
  return is_create_word(w) || command_arity(w) >= 0;
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  Program program() {
    Program p;
    while (peek().kind != TokenKind::end) {
      if (peek().kind == TokenKind::bracket_close) fail(peek(), "unexpected ]");
      p.push_back(statement());
    }
    return p;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& take() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  const Token& previous() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }

  [[noreturn]] void fail(const Token& at, const std::string& message) const { throw ConsoleError(at.span, message); }

  static std::string describe(const Token& t) {
    return t.kind == TokenKind::end ? "end of input" : "'" + t.text + "'";
  }

  bool at_word(std::string_view w) const { return peek().kind == TokenKind::word && peek().text == w; }
  bool at_op(std::string_view o) const { return peek().kind == TokenKind::op && peek().text == o; }

  const Token& expect(TokenKind kind, std::string_view what) {
    if (peek().kind != kind) fail(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
    return take();
  }

  std::vector<Stmt> block(Span& span) {
    const Token& open = expect(TokenKind::bracket_open, "[");
    std::vector<Stmt> body;
    while (peek().kind != TokenKind::bracket_close) {
      if (peek().kind == TokenKind::end) fail(peek(), "expected ]");
      body.push_back(statement());
    }
    const Token& close = take();
    span = join(open.span, close.span);
    return body;
  }

  Stmt statement() {
    const Token& first = peek();
    Stmt s;
    s.span = first.span;
    if (first.kind == TokenKind::word) {
      const std::string& w = first.text;
      if (w == "ask") {
        take();
        s.kind = StmtKind::ask;
        s.name = w;
        s.args.push_back(expression());
        Span body_span;
        s.body = block(body_span);
        s.has_block = true;
        s.span = join(first.span, body_span);
        return s;
      }
      if (w == "set" || w == "let") {
        take();
        s.kind = w == "set" ? StmtKind::set : StmtKind::let;
        const Token& target = expect(TokenKind::word, "a variable name");
        if (reserved(target.text) || colors::by_name(target.text)) fail(target, "cannot assign to " + target.text);
        s.name = target.text;
        s.args.push_back(expression());
        s.span = join(first.span, s.args.back().span);
        return s;
      }
      if (is_create_word(w)) {
        take();
        s.kind = StmtKind::create;
        s.name = w;
        s.args.push_back(expression());
        s.span = join(first.span, s.args.back().span);
        if (peek().kind == TokenKind::bracket_open) {
          Span body_span;
          s.body = block(body_span);
          s.has_block = true;
          s.span = join(first.span, body_span);
        }
        return s;
      }
      if (const int arity = command_arity(w); arity >= 0) {
        take();
        s.kind = StmtKind::command;
        s.name = w;
        for (int i = 0; i < arity; ++i) s.args.push_back(expression());
        if (!s.args.empty()) s.span = join(first.span, s.args.back().span);
        return s;
      }
    }
    s.kind = StmtKind::report;
    s.args.push_back(expression());
    s.span = s.args.back().span;
    return s;
  }

  Expr binary(Expr lhs, const Token& op, Expr rhs) {
    Expr e;
    e.kind = ExprKind::binary;
    e.name = op.text;
    e.span = join(lhs.span, rhs.span);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  Expr expression() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (at_word("or")) {
      const Token& op = take();
      lhs = binary(std::move(lhs), op, and_expr());
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = comparison();
    while (at_word("and")) {
      const Token& op = take();
      lhs = binary(std::move(lhs), op, comparison());
    }
    return lhs;
  }

  Expr comparison() {
    Expr lhs = additive();
    while (at_op("<") || at_op(">") || at_op("<=") || at_op(">=") || at_op("=") || at_op("!=")) {
      const Token& op = take();
      lhs = binary(std::move(lhs), op, additive());
    }
    return lhs;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (at_op("+") || at_op("-")) {
      const Token& op = take();
      lhs = binary(std::move(lhs), op, multiplicative());
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (at_op("*") || at_op("/")) {
      const Token& op = take();
      lhs = binary(std::move(lhs), op, unary());
    }
    return lhs;
  }

  Expr unary() {
    if (at_op("-") || at_word("not")) {
      const Token& op = take();
      Expr operand = unary();
      Expr e;
      e.kind = ExprKind::unary;
      e.name = op.text;
      e.span = join(op.span, operand.span);
      e.args.push_back(std::move(operand));
      return e;
    }
    return postfix();
  }

  Expr bracketed() {
    expect(TokenKind::bracket_open, "[");
    Expr e = expression();
    if (peek().kind != TokenKind::bracket_close) fail(peek(), "expected ], found " + describe(peek()));
    take();
    return e;
  }

  Expr postfix() {
    Expr e = primary();
    while (peek().kind == TokenKind::word && is_infix_set_op(peek().text)) {
      const Token& op = take();
      Expr call;
      call.kind = ExprKind::call;
      call.name = op.text;
      call.args.push_back(std::move(e));
      call.args.push_back(op.text == "with" ? bracketed() : unary());
      call.span = join(call.args.front().span, previous().span);
      e = std::move(call);
    }
    return e;
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::number: {
        take();
        Expr e;
        e.kind = ExprKind::number;
        e.number = t.number;
        e.span = t.span;
        return e;
      }
      case TokenKind::string: fail(t, "string values are not supported");
      case TokenKind::op:
        if (t.text == "(") {
          const Token& open = take();
          Expr e = expression();
          if (!at_op(")")) fail(peek(), "expected ), found " + describe(peek()));
          const Token& close = take();
          e.span = join(open.span, close.span);
          return e;
        }
        fail(t, "expected an expression, found " + describe(t));
      case TokenKind::word: break;
      default: fail(t, "expected an expression, found " + describe(t));
    }
    if (reserved(t.text)) fail(t, "expected an expression, found " + describe(t));
    take();
    if (auto c = colors::by_name(t.text)) {
      Expr e;
      e.kind = ExprKind::number;
      e.number = *c;
      e.span = t.span;
      return e;
    }
    const int arity = reporter_arity(t.text);
    Expr e;
    e.name = t.text;
    e.span = t.span;
    if (arity < 0) {
      e.kind = ExprKind::word;
      return e;
    }
    e.kind = ExprKind::call;
    for (int i = 0; i < arity; ++i)
      e.args.push_back(reporter_arg_bracketed(t.text, static_cast<std::size_t>(i)) ? bracketed() : unary());
    e.span = join(t.span, previous().span);
    return e;
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
};

}  // namespace

int command_arity(std::string_view word) {
  for (const auto& [w, n] : kCommands)
    if (w == word) return n;
  return -1;
}

int reporter_arity(std::string_view word) {
  for (const auto& [w, n] : kReporters)
    if (w == word) return n;
  return -1;
}

bool reporter_arg_bracketed(std::string_view word, std::size_t i) {
  return (word == "min-one-of" || word == "max-one-of") && i == 1;
}

bool is_infix_set_op(std::string_view word) { return word == "with" || word == "in-radius"; }

bool is_create_word(std::string_view word) {
  return word == "crt" || (word.starts_with("create-") && word != "create-link-with" && word.size() > 7);
}

bool same_shape(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name || a.args.size() != b.args.size()) return false;
  if (a.kind == ExprKind::number && a.number != b.number) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_shape(a.args[i], b.args[i])) return false;
  return true;
}

bool same_shape(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.name != b.name || a.has_block != b.has_block || a.args.size() != b.args.size())
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!same_shape(a.args[i], b.args[i])) return false;
  return same_shape(a.body, b.body);
}

bool same_shape(const Program& a, const Program& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_shape(a[i], b[i])) return false;
  return true;
}

Program parse(const std::vector<Token>& tokens) { return Parser(tokens).program(); }

Program parse(std::string_view text) { return parse(tokenize(text)); }

}  // namespace sosim::console
