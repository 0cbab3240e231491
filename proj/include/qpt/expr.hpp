#pragma once

#include <memory>
#include <string>

namespace qpt::expr {

// Infix expression over one free variable `lambda`, used for parameter
// curves. Grammar, tightest first: unary minus, `^` (right-associative),
// `* /`, `+ -`. Functions: sin cos tan sqrt exp abs; constants pi and e.
struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class NodeKind { Number, Lambda, Pi, Euler, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Tan, Sqrt, Exp, Abs };

struct Node {
  NodeKind kind;
  double value = 0.0;            // Number
  Func func = Func::Sin;         // Call
  NodePtr a, b;                  // operands
};

class Expression {
 public:
  Expression() = default;
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  bool empty() const { return root_ == nullptr; }
  const NodePtr& root() const { return root_; }

  double evaluate(double lambda) const;  // throws ExpressionError on domain faults
  std::string to_string() const;         // re-parses to a structurally equal tree

 private:
  NodePtr root_;
};

// Throws SyntaxError (message carries the byte offset) or UnknownIdentifier.
Expression parse_expression(const std::string& text);

bool tree_equal(const NodePtr& a, const NodePtr& b);

}  // namespace qpt::expr
