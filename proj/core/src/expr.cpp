#include "skalg/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace skalg {

namespace detail {

struct Node {
  enum Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
  double value = 0.0;
  std::string name;
  Func func = Func::Sin;
  std::vector<std::shared_ptr<const Node>> args;
};

using NodePtr = std::shared_ptr<const Node>;

struct ExprAccess {
  static Expr make(NodePtr n) { return Expr(std::move(n)); }
  static const NodePtr& ptr(const Expr& e) { return e.root_; }
};

}  // namespace detail

using detail::Node;
using detail::NodePtr;

namespace {

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Number;
  n->value = v;
  return n;
}

NodePtr make_variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Variable;
  n->name = std::move(name);
  return n;
}

NodePtr make_node(Node::Kind kind, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

NodePtr make_call(Func f, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Call;
  n->func = f;
  n->args = std::move(args);
  return n;
}

struct FuncInfo {
  std::string_view name;
  Func func;
  std::size_t arity;
};

constexpr FuncInfo kFunctions[] = {
    {"sin", Func::Sin, 1},   {"cos", Func::Cos, 1},   {"tan", Func::Tan, 1},
    {"exp", Func::Exp, 1},   {"ln", Func::Ln, 1},     {"sqrt", Func::Sqrt, 1},
    {"abs", Func::Abs, 1},   {"atan2", Func::Atan2, 2},
};

const FuncInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::string_view function_name(Func f) {
  for (const auto& info : kFunctions) {
    if (info.func == f) return info.name;
  }
  return "?";
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) {
      fail("unexpected character '" + std::string(1, src_[pos_]) + "'", "operator or end of input");
    }
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what, const std::string& expected) const {
    throw ParseError("syntax error at offset " + std::to_string(pos_) + ": " + what +
                         " (expected " + expected + ")",
                     pos_, expected);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Node::Add, {lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make_node(Node::Sub, {lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Node::Mul, {lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make_node(Node::Div, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_node(Node::Neg, {parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_node(Node::Pow, {base, parse_unary()});
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input", "operand");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) fail("unbalanced parenthesis", "')'");
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'", "operand");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    bool digits = false;
    while (pos_ < src_.size() && is_digit(src_[pos_])) {
      ++pos_;
      digits = true;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) {
        ++pos_;
        digits = true;
      }
    }
    if (!digits) {
      pos_ = start;
      fail("malformed number", "digit");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && is_digit(src_[p])) {
        while (p < src_.size() && is_digit(src_[p])) ++p;
        pos_ = p;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    return make_number(std::strtod(text.c_str(), nullptr));
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      const FuncInfo* info = find_function(name);
      if (info == nullptr) {
        pos_ = start;
        fail("unknown function '" + name + "'", "one of sin, cos, tan, exp, ln, sqrt, abs, atan2");
      }
      ++pos_;
      std::vector<NodePtr> args;
      args.push_back(parse_expr());
      while (accept(',')) args.push_back(parse_expr());
      if (!accept(')')) fail("unbalanced parenthesis in call to " + name, "')' or ','");
      if (args.size() != info->arity) {
        fail(name + " takes " + std::to_string(info->arity) + " argument(s), got " +
                 std::to_string(args.size()),
             std::to_string(info->arity) + " argument(s)");
      }
      return make_call(info->func, std::move(args));
    }
    return make_variable(std::move(name));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// Printing precedences: higher binds tighter.
int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Add:
    case Node::Sub:
      return 1;
    case Node::Mul:
    case Node::Div:
      return 2;
    case Node::Neg:
      return 3;
    case Node::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& n, int min_prec, std::string& out) {
  if (precedence(n) < min_prec) {
    out += '(';
    print_node(n, out);
    out += ')';
  } else {
    print_node(n, out);
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Number:
      out += format_number(n.value);
      return;
    case Node::Variable:
      out += n.name;
      return;
    case Node::Neg:
      out += '-';
      print_child(*n.args[0], 3, out);
      return;
    case Node::Add:
    case Node::Sub:
      print_child(*n.args[0], 1, out);
      out += n.kind == Node::Add ? " + " : " - ";
      print_child(*n.args[1], 2, out);
      return;
    case Node::Mul:
    case Node::Div:
      print_child(*n.args[0], 2, out);
      out += n.kind == Node::Mul ? "*" : "/";
      print_child(*n.args[1], 3, out);
      return;
    case Node::Pow:
      print_child(*n.args[0], 5, out);
      out += '^';
      print_child(*n.args[1], 3, out);
      return;
    case Node::Call:
      out += function_name(n.func);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i != 0) out += ", ";
        print_node(*n.args[i], out);
      }
      out += ')';
      return;
  }
}

void collect(const Node& n, std::set<std::string>& vars) {
  if (n.kind == Node::Variable) vars.insert(n.name);
  for (const auto& a : n.args) collect(*a, vars);
}

bool equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case Node::Number:
      return a.value == b.value;
    case Node::Variable:
      return a.name == b.name;
    case Node::Call:
      if (a.func != b.func) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("domain error: non-finite result in ") + what);
  return v;
}

double apply_binary(Node::Kind kind, double l, double r) {
  switch (kind) {
    case Node::Add:
      return checked(l + r, "addition");
    case Node::Sub:
      return checked(l - r, "subtraction");
    case Node::Mul:
      return checked(l * r, "multiplication");
    case Node::Div:
      if (r == 0.0) throw EvalError("domain error: division by zero");
      return checked(l / r, "division");
    case Node::Pow:
      return checked(std::pow(l, r), "power");
    default:
      throw EvalError("internal: not a binary operator");
  }
}

double apply_func(Func f, double a, double b) {
  switch (f) {
    case Func::Sin:
      return std::sin(a);
    case Func::Cos:
      return std::cos(a);
    case Func::Tan:
      return checked(std::tan(a), "tan");
    case Func::Exp:
      return checked(std::exp(a), "exp");
    case Func::Ln:
      if (!(a > 0.0)) throw EvalError("domain error: ln of non-positive value");
      return std::log(a);
    case Func::Sqrt:
      if (a < 0.0) throw EvalError("domain error: sqrt of negative value");
      return std::sqrt(a);
    case Func::Abs:
      return std::abs(a);
    case Func::Atan2:
      return std::atan2(a, b);
  }
  return 0.0;
}

double eval_node(const Node& n, const Bindings& b) {
  switch (n.kind) {
    case Node::Number:
      return n.value;
    case Node::Variable: {
      auto it = b.find(n.name);
      if (it == b.end()) throw EvalError("unbound variable '" + n.name + "'");
      return it->second;
    }
    case Node::Neg:
      return -eval_node(*n.args[0], b);
    case Node::Call: {
      const double a = eval_node(*n.args[0], b);
      const double c = n.args.size() > 1 ? eval_node(*n.args[1], b) : 0.0;
      return apply_func(n.func, a, c);
    }
    default:
      return apply_binary(n.kind, eval_node(*n.args[0], b), eval_node(*n.args[1], b));
  }
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t offset, std::string expected)
    : std::runtime_error(message), offset_(offset), expected_(std::move(expected)) {}

Expr::Expr() : root_(make_number(0.0)) {}

Expr Expr::number(double value) { return Expr(make_number(value)); }

Expr Expr::variable(std::string name) { return Expr(make_variable(std::move(name))); }

Expr Expr::parse(std::string_view source) { return Expr(Parser(source).parse_all()); }

std::string Expr::to_string() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

std::set<std::string> Expr::free_variables() const {
  std::set<std::string> vars;
  collect(*root_, vars);
  return vars;
}

bool Expr::structurally_equal(const Expr& other) const { return equal(*root_, *other.root_); }

bool Expr::is_constant() const { return root_->kind == Node::Number; }

Expr parse(std::string_view source) { return Expr::parse(source); }

std::string print(const Expr& e) { return e.to_string(); }

double eval(const Expr& e, const Bindings& b) { return eval_node(e.root(), b); }

double partial(const Expr& e, std::string_view var, const Bindings& b, double step) {
  if (!(step > 0.0)) throw EvalError("partial: step must be positive");
  auto it = b.find(var);
  if (it == b.end()) throw EvalError("partial: variable '" + std::string(var) + "' is not bound");
  Bindings shifted = b;
  auto& slot = shifted.find(var)->second;
  const double x = it->second;
  slot = x + step;
  const double hi = eval(e, shifted);
  slot = x - step;
  const double lo = eval(e, shifted);
  return (hi - lo) / (2.0 * step);
}

// ---------------------------------------------------------------------------
// BoundExpr

BoundExpr::BoundExpr(const Expr& e, std::span<const std::string> slots, const Bindings& constants)
    : source_(e) {
  root_ = lower(e.root(), slots, constants);
}

int BoundExpr::lower(const Node& n, std::span<const std::string> slots, const Bindings& constants) {
  Op op{};
  switch (n.kind) {
    case Node::Number:
      op.kind = Op::Const;
      op.value = n.value;
      break;
    case Node::Variable: {
      bool found = false;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i] == n.name) {
          op.kind = Op::Slot;
          op.slot = i;
          found = true;
          break;
        }
      }
      if (!found) {
        auto it = constants.find(n.name);
        if (it == constants.end()) throw EvalError("unbound variable '" + n.name + "'");
        op.kind = Op::Const;
        op.value = it->second;
      }
      break;
    }
    case Node::Neg:
      op.kind = Op::Neg;
      op.lhs = lower(*n.args[0], slots, constants);
      break;
    case Node::Call:
      op.kind = Op::Call;
      op.func = n.func;
      op.lhs = lower(*n.args[0], slots, constants);
      if (n.args.size() > 1) op.rhs = lower(*n.args[1], slots, constants);
      break;
    default:
      op.kind = static_cast<Op::Kind>(Op::Add + (n.kind - Node::Add));
      op.lhs = lower(*n.args[0], slots, constants);
      op.rhs = lower(*n.args[1], slots, constants);
      break;
  }
  ops_.push_back(op);
  return static_cast<int>(ops_.size()) - 1;
}

double BoundExpr::run(int index, std::span<const double> values) const {
  const Op& op = ops_[static_cast<std::size_t>(index)];
  switch (op.kind) {
    case Op::Const:
      return op.value;
    case Op::Slot:
      return values[op.slot];
    case Op::Neg:
      return -run(op.lhs, values);
    case Op::Call: {
      const double a = run(op.lhs, values);
      const double b = op.rhs >= 0 ? run(op.rhs, values) : 0.0;
      return apply_func(op.func, a, b);
    }
    case Op::Add:
      return apply_binary(Node::Add, run(op.lhs, values), run(op.rhs, values));
    case Op::Sub:
      return apply_binary(Node::Sub, run(op.lhs, values), run(op.rhs, values));
    case Op::Mul:
      return apply_binary(Node::Mul, run(op.lhs, values), run(op.rhs, values));
    case Op::Div:
      return apply_binary(Node::Div, run(op.lhs, values), run(op.rhs, values));
    case Op::Pow:
      return apply_binary(Node::Pow, run(op.lhs, values), run(op.rhs, values));
  }
  return 0.0;
}

double BoundExpr::operator()(std::span<const double> values) const {
  if (root_ < 0) return 0.0;
  return run(root_, values);
}

bool BoundExpr::is_constant() const {
  if (root_ < 0) return true;
  for (const auto& op : ops_) {
    if (op.kind == Op::Slot) return false;
  }
  return true;
}

}  // namespace skalg
