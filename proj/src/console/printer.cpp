#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "sosim/console/ast.hpp"

namespace sosim::console {

namespace {

std::string number_text(double v) {
  char buf[40];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  std::string s = buf;
  // The lexer has no exponent form; fall back to plain decimals.
  if (s.find_first_of("eE") != std::string::npos) {
    std::snprintf(buf, sizeof buf, "%.17f", v);
    s = buf;
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

void print_expr(const Expr& e, std::string& out);

void print_block(const std::vector<Stmt>& body, std::string& out);

void print_stmt(const Stmt& s, std::string& out) {
  switch (s.kind) {
    case StmtKind::ask:
      out += "ask ";
      print_expr(s.args[0], out);
      out += ' ';
      print_block(s.body, out);
      return;
    case StmtKind::set:
    case StmtKind::let:
      out += s.kind == StmtKind::set ? "set " : "let ";
      out += s.name;
      out += ' ';
      print_expr(s.args[0], out);
      return;
    case StmtKind::create:
      out += s.name;
      out += ' ';
      print_expr(s.args[0], out);
      if (s.has_block) {
        out += ' ';
        print_block(s.body, out);
      }
      return;
    case StmtKind::command:
      out += s.name;
      for (const auto& a : s.args) {
        out += ' ';
        print_expr(a, out);
      }
      return;
    case StmtKind::report: print_expr(s.args[0], out); return;
  }
}

void print_block(const std::vector<Stmt>& body, std::string& out) {
  out += '[';
  for (const auto& s : body) {
    out += ' ';
    print_stmt(s, out);
  }
  out += " ]";
}

void print_expr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::number: {
      if (e.number < 0) {
        out += "(- " + number_text(-e.number) + ")";
      } else {
        out += number_text(e.number);
      }
      return;
    }
    case ExprKind::word: out += e.name; return;
    case ExprKind::binary:
      out += '(';
      print_expr(e.args[0], out);
      out += ' ' + e.name + ' ';
      print_expr(e.args[1], out);
      out += ')';
      return;
    case ExprKind::unary:
      out += '(' + e.name + ' ';
      print_expr(e.args[0], out);
      out += ')';
      return;
    case ExprKind::call:
      out += '(';
      if (is_infix_set_op(e.name)) {
        print_expr(e.args[0], out);
        out += ' ' + e.name + ' ';
        if (e.name == "with") {
          out += "[ ";
          print_expr(e.args[1], out);
          out += " ]";
        } else {
          print_expr(e.args[1], out);
        }
      } else {
        out += e.name;
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          out += ' ';
          if (reporter_arg_bracketed(e.name, i)) {
            out += "[ ";
            print_expr(e.args[i], out);
            out += " ]";
          } else {
            print_expr(e.args[i], out);
          }
        }
      }
      out += ')';
      return;
  }
}

}  // namespace

std::string print(const Expr& expr) {
  std::string out;
  print_expr(expr, out);
  return out;
}

std::string print(const Program& program) {
  std::string out;
  for (const auto& s : program) {
    if (!out.empty()) out += ' ';
    print_stmt(s, out);
  }
  return out;
}

}  // namespace sosim::console
