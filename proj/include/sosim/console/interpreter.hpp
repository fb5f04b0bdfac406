#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sosim/console/ast.hpp"
#include "sosim/world.hpp"

namespace sosim::console {

struct AgentRef {
  bool patch = false;
  std::size_t index = 0;  // agent id or patch index
  bool operator==(const AgentRef&) const = default;
};

struct AgentSetValue {
  bool patches = false;
  std::vector<std::size_t> members;  // agent ids or patch indices, ascending
  /// A whole breed / all turtles / all patches, which only the observer may ask.
  bool everything = false;
};

using Value = std::variant<std::monostate, double, bool, AgentRef, AgentSetValue>;

std::string to_display(const World& world, const Value& v);

/// Evaluates console programs against a World in observer context. Asks go
/// through sosim::ask, so they shuffle with world.rng().
class Interpreter {
 public:
  explicit Interpreter(World& world) : world_(world) {}

  /// Parses and runs; returns the value of the last bare expression, if any.
  Value run(std::string_view text);
  Value run(const Program& program);
  /// run() rendered for a console; empty when nothing was reported.
  std::string execute(std::string_view text);

 private:
  struct Context;
  struct Scope;

  void exec_block(const std::vector<Stmt>& body, Context& ctx, Value& last);
  void exec(const Stmt& s, Context& ctx, Value& last);
  void exec_ask(const Stmt& s, Context& ctx);
  void exec_create(const Stmt& s, Context& ctx);
  void exec_command(const Stmt& s, Context& ctx);
  void exec_set(const Stmt& s, Context& ctx, double value);

  Value eval(const Expr& e, Context& ctx);
  Value eval_word(const Expr& e, Context& ctx);
  Value eval_call(const Expr& e, Context& ctx);
  Value eval_binary(const Expr& e, Context& ctx);
  double number(const Expr& e, Context& ctx);
  bool truth(const Expr& e, Context& ctx);
  AgentSetValue agentset(const Expr& e, Context& ctx);

  World& world_;
};

}  // namespace sosim::console
