#pragma once

// Scalar expression language used for every coordinate function in a system
// description: anchors, structure functions, metrics, potentials, forces,
// candidate sections and reparametrization functions.
//
// Grammar (standard precedence, `^` right-associative and binding tighter
// than unary minus):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | identifier | identifier '(' args ')' | '(' expr ')'
//
// Identifiers match [A-Za-z_][A-Za-z0-9_]*. Functions: sin cos tan exp ln
// sqrt abs atan2.

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skalg {

using Bindings = std::map<std::string, double, std::less<>>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset, std::string expected);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Func { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs, Atan2 };

namespace detail {
struct Node;
struct ExprAccess;
}

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr();  // the literal 0

  static Expr number(double value);
  static Expr variable(std::string name);

  /// Parses `source`; throws ParseError with the byte offset of the failure.
  static Expr parse(std::string_view source);

  /// Canonical text form; `parse(e.to_string())` is structurally equal to `e`.
  std::string to_string() const;

  std::set<std::string> free_variables() const;

  bool structurally_equal(const Expr& other) const;

  /// True for a literal with no variables.
  bool is_constant() const;

  const detail::Node& root() const { return *root_; }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const detail::Node> root_;

  friend struct detail::ExprAccess;
};

Expr parse(std::string_view source);
std::string print(const Expr& e);

/// Tree-walk evaluation. Throws EvalError on an unbound variable or a domain
/// error (division by zero, ln/sqrt outside their domain, non-finite result).
double eval(const Expr& e, const Bindings& b);

/// Central difference (e(v+step) - e(v-step)) / (2 step) with respect to `var`.
double partial(const Expr& e, std::string_view var, const Bindings& b, double step);

/// Expression with variables resolved to slot indices and constants folded
/// in. Evaluation is still a tree walk; only name lookup is hoisted.
class BoundExpr {
 public:
  BoundExpr() = default;

  /// Variables listed in `slots` become positional inputs; every other free
  /// variable must be present in `constants`.
  BoundExpr(const Expr& e, std::span<const std::string> slots, const Bindings& constants);

  double operator()(std::span<const double> values) const;

  bool is_constant() const;
  const Expr& source() const { return source_; }

 private:
  struct Op {
    enum Kind : unsigned char { Const, Slot, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    Func func = Func::Sin;
    int lhs = -1;
    int rhs = -1;
    double value = 0.0;
    std::size_t slot = 0;
  };

  int lower(const detail::Node& n, std::span<const std::string> slots, const Bindings& constants);
  double run(int index, std::span<const double> values) const;

  std::vector<Op> ops_;
  int root_ = -1;
  Expr source_;
};

}  // namespace skalg
