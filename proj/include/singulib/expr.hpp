#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "singulib/error.hpp"
#include "singulib/jet.hpp"

namespace singulib {

enum class NodeKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Exp, Log };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable AST node. `value` holds the constant for Constant nodes and the
/// exponent for Pow nodes. `offset` is the source position of the node.
struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;
  NodePtr lhs;
  NodePtr rhs;
  std::size_t offset = 0;
};

/// Exponent function a(s) of a nonlinearity f = e^{a(s)}.
///
/// Grammar (whitespace insignificant):
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := "-" factor | atom ("^" number)?
///   atom   := number | "s" | "exp(" expr ")" | "log(" expr ")" | "(" expr ")"
/// The leading unary minus and a signed number after "^" are accepted as
/// conveniences; unary minus is stored as (0 - x).
class Expression {
 public:
  Expression() = default;
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  const NodePtr& root() const { return root_; }
  bool empty() const { return root_ == nullptr; }

  /// Canonical text form; parse(print()) reproduces the AST.
  std::string print() const;

  /// True if the tree contains a log node (domain then requires s > 0).
  bool contains_log() const;

 private:
  NodePtr root_;
};

/// Throws ParseError carrying the byte offset of the failure.
Expression parse(std::string_view source);

/// Structural equality (offsets ignored).
bool same_tree(const Expression& a, const Expression& b);

struct EvalError {
  ErrorKind kind = ErrorKind::Domain;
  std::size_t offset = 0;
  std::string message;
};

/// Derivatives d^0..d^order of the expression at s. Failures (log of a
/// non-positive value, division by zero, overflow) are returned as values.
std::variant<Jet, EvalError> try_eval_jet(const Expression& expr, double s, int order);

/// As try_eval_jet but throws singulib::Error on failure.
Jet eval_jet(const Expression& expr, double s, int order);

/// Unchecked scalar evaluation for hot loops; may return inf or nan.
double eval(const Expression& expr, double s);
long double eval(const Expression& expr, long double s);

}  // namespace singulib
