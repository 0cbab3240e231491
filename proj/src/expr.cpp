#include "qpt/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "qpt/error.hpp"

namespace qpt::expr {

namespace {

NodePtr make(NodeKind kind, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Number;
  n->value = v;
  return n;
}

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::SyntaxError, what + " at byte " + std::to_string(pos));
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (eat('+')) {
        lhs = make(NodeKind::Add, lhs, parse_product());
      } else if (eat('-')) {
        lhs = make(NodeKind::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_power();
    for (;;) {
      if (eat('*')) {
        lhs = make(NodeKind::Mul, lhs, parse_power());
      } else if (eat('/')) {
        lhs = make(NodeKind::Div, lhs, parse_power());
      } else {
        return lhs;
      }
    }
  }

  // Right-associative; unary minus binds tighter, so -2^2 == (-2)^2.
  NodePtr parse_power() {
    NodePtr base = parse_unary();
    if (eat('^')) return make(NodeKind::Pow, base, parse_power());
    return base;
  }

  NodePtr parse_unary() {
    if (eat('-')) return make(NodeKind::Neg, parse_unary());
    return parse_atom();
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    if (pos == start || (pos == start + 1 && text[start] == '.')) fail("malformed number");
    // Exponent part only when it is complete; otherwise the 'e' belongs to
    // whatever follows and the parser will reject it there.
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      std::size_t p = pos + 1;
      if (p < text.size() && (text[p] == '+' || text[p] == '-')) ++p;
      if (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) {
        ++p;
        while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
        pos = p;
      }
    }
    const std::string tok = text.substr(start, pos - start);
    return make_number(std::strtod(tok.c_str(), nullptr));
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    const std::string name = text.substr(start, pos - start);
    if (name == "lambda") return make(NodeKind::Lambda);
    if (name == "pi") return make(NodeKind::Pi);
    if (name == "e") return make(NodeKind::Euler);

    Func f;
    if (name == "sin") f = Func::Sin;
    else if (name == "cos") f = Func::Cos;
    else if (name == "tan") f = Func::Tan;
    else if (name == "sqrt") f = Func::Sqrt;
    else if (name == "exp") f = Func::Exp;
    else if (name == "abs") f = Func::Abs;
    else {
      pos = start;
      throw Error(ErrorKind::UnknownIdentifier,
                  "'" + name + "' at byte " + std::to_string(start));
    }
    if (!eat('(')) fail("expected '(' after function name");
    NodePtr arg = parse_sum();
    if (!eat(')')) fail("expected ')'");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Call;
    n->func = f;
    n->a = std::move(arg);
    return n;
  }
};

double eval_node(const Node& n, double lambda) {
  switch (n.kind) {
    case NodeKind::Number: return n.value;
    case NodeKind::Lambda: return lambda;
    case NodeKind::Pi: return std::numbers::pi;
    case NodeKind::Euler: return std::numbers::e;
    case NodeKind::Neg: return -eval_node(*n.a, lambda);
    case NodeKind::Add: return eval_node(*n.a, lambda) + eval_node(*n.b, lambda);
    case NodeKind::Sub: return eval_node(*n.a, lambda) - eval_node(*n.b, lambda);
    case NodeKind::Mul: return eval_node(*n.a, lambda) * eval_node(*n.b, lambda);
    case NodeKind::Div: {
      const double num = eval_node(*n.a, lambda);
      const double den = eval_node(*n.b, lambda);
      if (den == 0.0) throw Error(ErrorKind::ExpressionError, "division by zero");
      return num / den;
    }
    case NodeKind::Pow:
      return std::pow(eval_node(*n.a, lambda), eval_node(*n.b, lambda));
    case NodeKind::Call: {
      const double x = eval_node(*n.a, lambda);
      switch (n.func) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Tan: return std::tan(x);
        case Func::Sqrt:
          if (x < 0.0) throw Error(ErrorKind::ExpressionError, "sqrt of negative value");
          return std::sqrt(x);
        case Func::Exp: return std::exp(x);
        case Func::Abs: return std::abs(x);
      }
      break;
    }
  }
  throw Error(ErrorKind::ExpressionError, "corrupt expression tree");
}

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Sqrt: return "sqrt";
    case Func::Exp: return "exp";
    case Func::Abs: return "abs";
  }
  return "?";
}

// Precedence levels used by the printer; higher binds tighter.
int level(const Node& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 10;
    case NodeKind::Mul:
    case NodeKind::Div: return 20;
    case NodeKind::Pow: return 30;
    case NodeKind::Neg: return 40;
    default: return 50;
  }
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int min_level, std::string& out) {
  const bool parens = level(child) < min_level;
  if (parens) out += '(';
  print_node(child, out);
  if (parens) out += ')';
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case NodeKind::Lambda: out += "lambda"; return;
    case NodeKind::Pi: out += "pi"; return;
    case NodeKind::Euler: out += "e"; return;
    case NodeKind::Neg:
      out += '-';
      print_child(*n.a, 40, out);
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
      print_child(*n.a, 10, out);
      out += (n.kind == NodeKind::Add) ? " + " : " - ";
      print_child(*n.b, 11, out);
      return;
    case NodeKind::Mul:
    case NodeKind::Div:
      print_child(*n.a, 20, out);
      out += (n.kind == NodeKind::Mul) ? "*" : "/";
      print_child(*n.b, 21, out);
      return;
    case NodeKind::Pow:
      print_child(*n.a, 31, out);  // left operand of ^ needs parens when it is itself a pow
      out += '^';
      print_child(*n.b, 30, out);
      return;
    case NodeKind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.a, out);
      out += ')';
      return;
  }
}

}  // namespace

double Expression::evaluate(double lambda) const {
  if (!root_) throw Error(ErrorKind::ExpressionError, "empty expression");
  const double v = eval_node(*root_, lambda);
  if (!std::isfinite(v)) throw Error(ErrorKind::ExpressionError, "non-finite result");
  return v;
}

std::string Expression::to_string() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, out);
  return out;
}

Expression parse_expression(const std::string& text) {
  Parser p(text);
  NodePtr root = p.parse_sum();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return Expression(std::move(root));
}

bool tree_equal(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Number:
      // Bit-level equality: the printer emits %.17g which round-trips doubles.
      return a->value == b->value;
    case NodeKind::Call:
      if (a->func != b->func) return false;
      return tree_equal(a->a, b->a);
    default:
      return tree_equal(a->a, b->a) && tree_equal(a->b, b->b);
  }
}

}  // namespace qpt::expr
