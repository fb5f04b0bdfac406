#pragma once

#include <string>
#include <vector>

#include "sosim/console/token.hpp"

namespace sosim::console {

enum class ExprKind {
  number,  // literal (color names resolve to their number)
  word,    // variable, zero-argument reporter or agentset name
  binary,  // name = operator, args = {lhs, rhs}
  unary,   // name = "-" or "not", args = {operand}
  call,    // reporter with arguments, e.g. random, count, with, in-radius
};

struct Expr {
  ExprKind kind = ExprKind::number;
  Span span;
  double number = 0;
  std::string name;
  std::vector<Expr> args;
};

enum class StmtKind {
  ask,      // args = {agentset}, body
  set,      // name = lvalue, args = {value}
  let,      // name = local, args = {value}
  create,   // name = crt / create-<breeds>, args = {count}, optional body
  command,  // name = primitive (fd, rt, setxy, die, ...), args
  report,   // bare expression
};

struct Stmt {
  StmtKind kind = StmtKind::report;
  Span span;
  std::string name;
  std::vector<Expr> args;
  std::vector<Stmt> body;
  bool has_block = false;
};

using Program = std::vector<Stmt>;

/// Structural equality, ignoring spans.
bool same_shape(const Expr& a, const Expr& b);
bool same_shape(const Stmt& a, const Stmt& b);
bool same_shape(const Program& a, const Program& b);

/// Throws ConsoleError citing the position and what was expected.
Program parse(const std::vector<Token>& tokens);
Program parse(std::string_view text);

/// Canonical source: compound expressions fully parenthesized, so that
/// parse(print(p)) has the same shape as p.
std::string print(const Program& program);
std::string print(const Expr& expr);

/// Argument count of a command primitive, or -1 when `word` is not one.
int command_arity(std::string_view word);
/// Argument count of a prefix reporter, or -1.
int reporter_arity(std::string_view word);
/// Whether argument i of reporter `word` is written as `[ expr ]`.
bool reporter_arg_bracketed(std::string_view word, std::size_t i);
/// `with` and `in-radius`: `<agentset> with [expr]`, `<agentset> in-radius r`.
bool is_infix_set_op(std::string_view word);
bool is_create_word(std::string_view word);

}  // namespace sosim::console
