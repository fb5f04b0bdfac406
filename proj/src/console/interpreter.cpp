#include "sosim/console/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "sosim/agentset.hpp"

namespace sosim::console {

namespace {

struct AgentDied {};
struct StopBlock {};

std::string number_display(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_display(const World& world, const Value& v) {
  struct Visitor {
    const World& world;
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double d) const { return number_display(d); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const AgentRef& r) const {
      if (r.patch) {
        const auto& p = world.patches()[r.index];
        return "(patch " + std::to_string(p.pxcor) + " " + std::to_string(p.pycor) + ")";
      }
      const auto id = static_cast<AgentId>(r.index);
      return "(" + (world.alive(id) ? world.agent(id).breed : std::string("dead")) + " " + std::to_string(r.index) + ")";
    }
    std::string operator()(const AgentSetValue& s) const {
      return "(agentset, " + std::to_string(s.members.size()) + (s.patches ? " patches)" : " turtles)");
    }
  };
  return std::visit(Visitor{world}, v);
}

struct Interpreter::Scope {
  std::map<std::string, double, std::less<>> vars;
};

struct Interpreter::Context {
  enum class Mode { observer, turtle, patch } mode = Mode::observer;
  std::size_t index = 0;  // agent id or patch index
  std::vector<Scope>* scopes = nullptr;

  bool is_turtle() const { return mode == Mode::turtle; }
  bool is_patch() const { return mode == Mode::patch; }
  AgentId id() const { return static_cast<AgentId>(index); }

  const double* local(std::string_view name) const {
    for (auto it = scopes->rbegin(); it != scopes->rend(); ++it) {
      auto f = it->vars.find(name);
      if (f != it->vars.end()) return &f->second;
    }
    return nullptr;
  }
  double* local(std::string_view name) {
    return const_cast<double*>(static_cast<const Context*>(this)->local(name));
  }
};

Value Interpreter::run(std::string_view text) { return run(parse(text)); }

Value Interpreter::run(const Program& program) {
  std::vector<Scope> scopes(1);
  Context ctx;
  ctx.scopes = &scopes;
  Value last;
  try {
    exec_block(program, ctx, last);
  } catch (const StopBlock&) {
  }
  return last;
}

std::string Interpreter::execute(std::string_view text) { return to_display(world_, run(text)); }

void Interpreter::exec_block(const std::vector<Stmt>& body, Context& ctx, Value& last) {
  for (const auto& s : body) exec(s, ctx, last);
}

void Interpreter::exec(const Stmt& s, Context& ctx, Value& last) {
  switch (s.kind) {
    case StmtKind::ask: exec_ask(s, ctx); return;
    case StmtKind::create: exec_create(s, ctx); return;
    case StmtKind::command: exec_command(s, ctx); return;
    case StmtKind::set: exec_set(s, ctx, number(s.args[0], ctx)); return;
    case StmtKind::let: {
      const double v = number(s.args[0], ctx);
      if (ctx.scopes->back().vars.contains(s.name)) throw ConsoleError(s.span, s.name + " is already defined");
      ctx.scopes->back().vars[s.name] = v;
      return;
    }
    case StmtKind::report: last = eval(s.args[0], ctx); return;
  }
}

namespace {
/// Runs a block for one agent; an error inside it is kept with its span
/// because sosim::ask rewraps exceptions.
template <class F>
void guarded(std::optional<ConsoleError>& inner, F&& body) {
  try {
    body();
  } catch (const ConsoleError& e) {
    inner = e;
    throw;
  }
}
}  // namespace

void Interpreter::exec_ask(const Stmt& s, Context& ctx) {
  const Value target = eval(s.args[0], ctx);
  AgentSetValue set;
  if (const auto* r = std::get_if<AgentRef>(&target)) {
    set.patches = r->patch;
    set.members = {r->index};
  } else if (const auto* as = std::get_if<AgentSetValue>(&target)) {
    set = *as;
  } else {
    throw ConsoleError(s.args[0].span, "ask expects an agent or agentset");
  }
  if (set.everything && ctx.mode != Context::Mode::observer)
    throw ConsoleError(s.args[0].span, "only the observer can ask all turtles or all patches");

  std::optional<ConsoleError> inner;
  auto run_for = [&](Context::Mode mode, std::size_t index) {
    std::vector<Scope> scopes = *ctx.scopes;
    scopes.emplace_back();
    Context sub{mode, index, &scopes};
    Value ignored;
    guarded(inner, [&] {
      try {
        exec_block(s.body, sub, ignored);
      } catch (const AgentDied&) {
      } catch (const StopBlock&) {
      }
    });
  };

  if (set.patches) {
    std::vector<std::size_t> order = set.members;
    world_.rng().shuffle(std::span<std::size_t>(order));
    for (std::size_t p : order) {
      try {
        run_for(Context::Mode::patch, p);
      } catch (const ConsoleError& e) {
        const auto& patch = world_.patches()[p];
        throw ConsoleError(e.span(), "patch " + std::to_string(patch.pxcor) + " " + std::to_string(patch.pycor) + ": " +
                                         e.what());
      }
    }
    return;
  }
  AgentSet ids;
  for (std::size_t m : set.members) ids.push_back(static_cast<AgentId>(m));
  try {
    sosim::ask(world_, ids, [&](World&, AgentId id) { run_for(Context::Mode::turtle, id); });
  } catch (const AskError& e) {
    if (inner) throw ConsoleError(inner->span(), e.what());
    throw ConsoleError(s.span, e.what());
  }
}

void Interpreter::exec_create(const Stmt& s, Context& ctx) {
  if (ctx.mode != Context::Mode::observer) throw ConsoleError(s.span, s.name + " needs the observer context");
  const double count = number(s.args[0], ctx);
  if (count < 0) throw ConsoleError(s.args[0].span, "cannot create a negative number of agents");
  std::string breed = "node";
  if (s.name != "crt" && s.name != "create-turtles") {
    const auto plural = std::string_view(s.name).substr(7);
    auto b = world_.breed_for_plural(plural);
    if (!b) throw ConsoleError(s.span, "unknown breed " + std::string(plural));
    breed = *b;
  }
  std::vector<AgentId> ids;
  try {
    ids = world_.create_agents(breed, static_cast<std::size_t>(count));
  } catch (const Error& e) {
    throw ConsoleError(s.span, e.what());
  }
  if (!s.has_block) return;
  for (AgentId id : ids) {
    if (!world_.alive(id)) continue;
    std::vector<Scope> scopes = *ctx.scopes;
    scopes.emplace_back();
    Context sub{Context::Mode::turtle, id, &scopes};
    Value ignored;
    try {
      exec_block(s.body, sub, ignored);
    } catch (const AgentDied&) {
    } catch (const StopBlock&) {
    } catch (const ConsoleError& e) {
      throw ConsoleError(e.span(), "agent " + std::to_string(id) + ": " + e.what());
    }
  }
}

void Interpreter::exec_command(const Stmt& s, Context& ctx) {
  const std::string& n = s.name;
  if (n == "stop") throw StopBlock{};
  if (n == "ca" || n == "clear-all") {
    if (ctx.mode != Context::Mode::observer) throw ConsoleError(s.span, n + " needs the observer context");
    world_.clear_all();
    return;
  }
  if (!ctx.is_turtle()) throw ConsoleError(s.span, n + " needs a turtle context");
  const AgentId id = ctx.id();
  if (n == "fd" || n == "forward") {
    world_.move_forward(id, number(s.args[0], ctx));
  } else if (n == "bk" || n == "back") {
    world_.move_forward(id, -number(s.args[0], ctx));
  } else if (n == "rt" || n == "right") {
    world_.turn(id, number(s.args[0], ctx));
  } else if (n == "lt" || n == "left") {
    world_.turn(id, -number(s.args[0], ctx));
  } else if (n == "setxy") {
    const double x = number(s.args[0], ctx);
    const double y = number(s.args[1], ctx);
    world_.set_position(id, {x, y});
  } else if (n == "die") {
    world_.kill(id);
    throw AgentDied{};
  } else if (n == "create-link-with") {
    const Value other = eval(s.args[0], ctx);
    const auto* r = std::get_if<AgentRef>(&other);
    if (r == nullptr || r->patch) throw ConsoleError(s.args[0].span, "create-link-with expects a turtle");
    if (!world_.alive(static_cast<AgentId>(r->index))) throw ConsoleError(s.args[0].span, "that turtle is dead");
    world_.create_link(id, static_cast<AgentId>(r->index));
  } else {
    throw ConsoleError(s.span, "unknown command " + n);
  }
}

void Interpreter::exec_set(const Stmt& s, Context& ctx, double value) {
  const std::string& n = s.name;
  if (double* local = ctx.local(n)) {
    *local = value;
    return;
  }
  if (n == "who" || n == "pxcor" || n == "pycor" || n == "ticks")
    throw ConsoleError(s.span, n + " is read-only");
  if (ctx.is_turtle()) {
    const AgentId id = ctx.id();
    auto& a = world_.agent(id);
    if (n == "color") return world_.set_color(id, value);
    if (n == "heading") return world_.set_heading(id, value);
    if (n == "xcor") return world_.set_position(id, {value, a.pos.y});
    if (n == "ycor") return world_.set_position(id, {a.pos.x, value});
    if (n == "pcolor") return world_.set_pcolor(world_.patch_under(a.pos), value);
    if (a.has_var(n) || !world_.has_global(n)) return a.set_var(n, value);
    return world_.set_global(n, value);
  }
  if (ctx.is_patch()) {
    auto& p = world_.patches()[ctx.index];
    if (n == "pcolor") return world_.set_pcolor(p, value);
    if (n == "color" || n == "heading" || n == "xcor" || n == "ycor")
      throw ConsoleError(s.span, n + " needs a turtle context");
    if (p.vars.contains(n) || !world_.has_global(n)) {
      p.vars[n] = value;
      return;
    }
    return world_.set_global(n, value);
  }
  if (n == "color" || n == "heading" || n == "xcor" || n == "ycor")
    throw ConsoleError(s.span, n + " needs a turtle context");
  if (n == "pcolor") throw ConsoleError(s.span, "pcolor needs a turtle or patch context");
  world_.set_global(n, value);
}

double Interpreter::number(const Expr& e, Context& ctx) {
  const Value v = eval(e, ctx);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw ConsoleError(e.span, "expected a number");
}

bool Interpreter::truth(const Expr& e, Context& ctx) {
  const Value v = eval(e, ctx);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw ConsoleError(e.span, "expected true or false");
}

AgentSetValue Interpreter::agentset(const Expr& e, Context& ctx) {
  Value v = eval(e, ctx);
  AgentSetValue out;
  if (auto* s = std::get_if<AgentSetValue>(&v)) {
    out = std::move(*s);
  } else if (const auto* r = std::get_if<AgentRef>(&v)) {
    out = AgentSetValue{r->patch, {r->index}, false};
  } else {
    throw ConsoleError(e.span, "expected an agentset");
  }
  if (!out.patches)
    std::erase_if(out.members, [&](std::size_t m) { return !world_.alive(static_cast<AgentId>(m)); });
  return out;
}

Value Interpreter::eval(const Expr& e, Context& ctx) {
  switch (e.kind) {
    case ExprKind::number: return e.number;
    case ExprKind::word: return eval_word(e, ctx);
    case ExprKind::call: return eval_call(e, ctx);
    case ExprKind::binary: return eval_binary(e, ctx);
    case ExprKind::unary:
      if (e.name == "not") return !truth(e.args[0], ctx);
      return -number(e.args[0], ctx);
  }
  return std::monostate{};
}

Value Interpreter::eval_word(const Expr& e, Context& ctx) {
  const std::string& n = e.name;
  if (const double* local = ctx.local(n)) return *local;
  if (n == "true") return true;
  if (n == "false") return false;
  if (n == "ticks") return static_cast<double>(world_.tick());
  auto& rng = world_.rng();
  if (n == "random-pxcor") return static_cast<double>(rng.between(world_.min_pxcor(), world_.max_pxcor()));
  if (n == "random-pycor") return static_cast<double>(rng.between(world_.min_pycor(), world_.max_pycor()));
  if (n == "random-xcor") return rng.uniform(world_.min_x(), world_.max_x());
  if (n == "random-ycor") return rng.uniform(world_.min_y(), world_.max_y());
  if (n == "turtles") {
    AgentSetValue s{false, {}, true};
    for (AgentId id : all_agents(world_)) s.members.push_back(id);
    return s;
  }
  if (n == "patches") {
    AgentSetValue s{true, {}, true};
    s.members.resize(world_.patches().size());
    for (std::size_t i = 0; i < s.members.size(); ++i) s.members[i] = i;
    return s;
  }
  if (auto breed = world_.breed_for_plural(n)) {
    AgentSetValue s{false, {}, true};
    for (AgentId id : all_agents(world_, *breed)) s.members.push_back(id);
    return s;
  }
  if (ctx.is_turtle()) {
    const auto& a = world_.agent(ctx.id());
    if (n == "who") return static_cast<double>(a.id);
    if (n == "xcor") return a.pos.x;
    if (n == "ycor") return a.pos.y;
    if (n == "heading") return a.heading;
    if (n == "color") return a.color;
    if (n == "pcolor" || n == "pxcor" || n == "pycor") {
      const auto& p = world_.patch_under(a.pos);
      return n == "pcolor" ? p.pcolor : static_cast<double>(n == "pxcor" ? p.pxcor : p.pycor);
    }
    if (n == "link-neighbors") {
      AgentSetValue s{false, {}, false};
      for (AgentId id : link_neighbors(world_, a.id)) s.members.push_back(id);
      return s;
    }
    if (auto it = a.vars.find(n); it != a.vars.end()) return it->second;
  } else if (ctx.is_patch()) {
    const auto& p = world_.patches()[ctx.index];
    if (n == "pcolor") return p.pcolor;
    if (n == "pxcor") return static_cast<double>(p.pxcor);
    if (n == "pycor") return static_cast<double>(p.pycor);
    if (auto it = p.vars.find(n); it != p.vars.end()) return it->second;
  }
  if (world_.has_global(n)) return world_.global(n);
  if (n == "who" || n == "xcor" || n == "ycor" || n == "heading" || n == "color" || n == "link-neighbors")
    throw ConsoleError(e.span, n + " needs a turtle context");
  if (n == "pcolor" || n == "pxcor" || n == "pycor")
    throw ConsoleError(e.span, n + " needs a turtle or patch context");
  throw ConsoleError(e.span, "unknown variable " + n);
}

Value Interpreter::eval_call(const Expr& e, Context& ctx) {
  const std::string& n = e.name;
  if (n == "random") {
    const double bound = std::trunc(number(e.args[0], ctx));
    if (bound == 0) return 0.0;
    const auto draw = static_cast<double>(world_.rng().below(static_cast<std::uint64_t>(std::abs(bound))));
    return bound < 0 ? -draw : draw;
  }
  if (n == "random-float") return world_.rng().uniform() * number(e.args[0], ctx);
  if (n == "abs") return std::abs(number(e.args[0], ctx));
  if (n == "sqrt") {
    const double v = number(e.args[0], ctx);
    if (v < 0) throw ConsoleError(e.span, "sqrt of a negative number");
    return std::sqrt(v);
  }
  if (n == "count") return static_cast<double>(agentset(e.args[0], ctx).members.size());
  if (n == "turtle") {
    const double who = number(e.args[0], ctx);
    if (who < 0 || who != std::floor(who) || !world_.alive(static_cast<AgentId>(who)))
      throw ConsoleError(e.span, "no turtle with who number " + number_display(who));
    return AgentRef{false, static_cast<std::size_t>(who)};
  }
  if (n == "one-of") {
    const auto s = agentset(e.args[0], ctx);
    if (s.members.empty()) throw ConsoleError(e.span, "one-of: empty agentset");
    return AgentRef{s.patches, s.members[world_.rng().below(s.members.size())]};
  }

  auto member_context = [&](const AgentSetValue& s, std::size_t m, std::vector<Scope>& scopes) {
    scopes = *ctx.scopes;
    scopes.emplace_back();
    return Context{s.patches ? Context::Mode::patch : Context::Mode::turtle, m, &scopes};
  };

  if (n == "min-one-of" || n == "max-one-of") {
    const auto s = agentset(e.args[0], ctx);
    if (s.patches) throw ConsoleError(e.args[0].span, n + " expects turtles");
    if (s.members.empty()) throw ConsoleError(e.span, n + ": empty agentset");
    const double sign = n == "min-one-of" ? 1.0 : -1.0;
    AgentSet ids;
    for (std::size_t m : s.members) ids.push_back(static_cast<AgentId>(m));
    const AgentId best = min_one_of(world_, ids, [&](const Agent& a) {
      std::vector<Scope> scopes;
      Context sub = member_context(s, a.id, scopes);
      return sign * number(e.args[1], sub);
    });
    return AgentRef{false, best};
  }
  if (n == "with") {
    auto s = agentset(e.args[0], ctx);
    AgentSetValue out{s.patches, {}, false};
    for (std::size_t m : s.members) {
      std::vector<Scope> scopes;
      Context sub = member_context(s, m, scopes);
      if (truth(e.args[1], sub)) out.members.push_back(m);
    }
    return out;
  }
  if (n == "in-radius") {
    auto s = agentset(e.args[0], ctx);
    const double r = number(e.args[1], ctx);
    if (r < 0) throw ConsoleError(e.args[1].span, "in-radius: radius must be non-negative");
    Vec2 center;
    if (ctx.is_turtle()) {
      center = world_.agent(ctx.id()).pos;
    } else if (ctx.is_patch()) {
      const auto& p = world_.patches()[ctx.index];
      center = {world_.min_x() + (p.pxcor - world_.min_pxcor()) + 0.5, world_.min_y() + (p.pycor - world_.min_pycor()) + 0.5};
    } else {
      throw ConsoleError(e.span, "in-radius needs a turtle or patch context");
    }
    AgentSetValue out{s.patches, {}, false};
    for (std::size_t m : s.members) {
      Vec2 at;
      if (s.patches) {
        const auto& p = world_.patches()[m];
        at = {world_.min_x() + (p.pxcor - world_.min_pxcor()) + 0.5, world_.min_y() + (p.pycor - world_.min_pycor()) + 0.5};
      } else {
        at = world_.agent(static_cast<AgentId>(m)).pos;
      }
      if (world_.distance(center, at) <= r) out.members.push_back(m);
    }
    return out;
  }
  throw ConsoleError(e.span, "unknown reporter " + n);
}

Value Interpreter::eval_binary(const Expr& e, Context& ctx) {
  const std::string& op = e.name;
  if (op == "and") return truth(e.args[0], ctx) && truth(e.args[1], ctx);
  if (op == "or") return truth(e.args[0], ctx) || truth(e.args[1], ctx);
  if (op == "=" || op == "!=") {
    const Value a = eval(e.args[0], ctx);
    const Value b = eval(e.args[1], ctx);
    bool equal;
    if (std::holds_alternative<double>(a) && std::holds_alternative<double>(b)) {
      equal = std::get<double>(a) == std::get<double>(b);
    } else if (std::holds_alternative<bool>(a) && std::holds_alternative<bool>(b)) {
      equal = std::get<bool>(a) == std::get<bool>(b);
    } else if (std::holds_alternative<AgentRef>(a) && std::holds_alternative<AgentRef>(b)) {
      equal = std::get<AgentRef>(a) == std::get<AgentRef>(b);
    } else {
      throw ConsoleError(e.span, "cannot compare these values");
    }
    return op == "=" ? equal : !equal;
  }
  const double a = number(e.args[0], ctx);
  const double b = number(e.args[1], ctx);
  if (op == "+") return a + b;
  if (op == "-") return a - b;
  if (op == "*") return a * b;
  if (op == "/") {
    if (b == 0) throw ConsoleError(e.span, "division by zero");
    return a / b;
  }
  if (op == "<") return a < b;
  if (op == ">") return a > b;
  if (op == "<=") return a <= b;
  if (op == ">=") return a >= b;
  throw ConsoleError(e.span, "unknown operator " + op);
}

}  // namespace sosim::console
