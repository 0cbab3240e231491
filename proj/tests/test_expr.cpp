#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qpt/error.hpp"
#include "qpt/expr.hpp"

using namespace qpt;
using namespace qpt::expr;

TEST_CASE("expression: grammar examples") {
  CHECK(parse_expression("0.5 + 0.5*lambda").evaluate(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(parse_expression("sin(pi/3)*lambda").evaluate(2.0) ==
        doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  // ^ is right-associative
  CHECK(parse_expression("2^3^2").evaluate(0.0) == doctest::Approx(512.0).epsilon(1e-15));
}

TEST_CASE("expression: precedence contract") {
  // unary minus binds tighter than ^
  CHECK(parse_expression("-2^2").evaluate(0.0) == doctest::Approx(4.0));
  CHECK(parse_expression("-(2^2)").evaluate(0.0) == doctest::Approx(-4.0));
  CHECK(parse_expression("2^-2").evaluate(0.0) == doctest::Approx(0.25));
  CHECK(parse_expression("1 - 2 - 3").evaluate(0.0) == doctest::Approx(-4.0));
  CHECK(parse_expression("2 + 3*4").evaluate(0.0) == doctest::Approx(14.0));
  CHECK(parse_expression("abs(-3) + exp(0) + cos(0) + tan(0)").evaluate(0.0) ==
        doctest::Approx(5.0));
  CHECK(parse_expression("e").evaluate(0.0) == doctest::Approx(std::numbers::e));
  CHECK(parse_expression("2e3").evaluate(0.0) == doctest::Approx(2000.0));
}

TEST_CASE("expression: errors carry kinds and positions") {
  try {
    parse_expression("1 + ");
    FAIL("expected SyntaxError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SyntaxError);
  }
  try {
    parse_expression("2 * foo(3)");
    FAIL("expected UnknownIdentifier");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownIdentifier);
    CHECK(std::string(e.what()).find("byte 4") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expression("(1 + 2"), Error);
  CHECK_THROWS_AS(parse_expression("1 2"), Error);
  CHECK_THROWS_AS(parse_expression("sin 3"), Error);

  try {
    parse_expression("1/lambda").evaluate(0.0);
    FAIL("expected ExpressionError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ExpressionError);
  }
  CHECK_THROWS_AS(parse_expression("sqrt(-1)").evaluate(0.0), Error);
  CHECK_THROWS_AS(parse_expression("exp(10000)").evaluate(0.0), Error);  // non-finite
}

namespace {

// Independent reference evaluator walking the same tree.
double ref_eval(const Node& n, double lam) {
  switch (n.kind) {
    case NodeKind::Number: return n.value;
    case NodeKind::Lambda: return lam;
    case NodeKind::Pi: return std::numbers::pi;
    case NodeKind::Euler: return std::numbers::e;
    case NodeKind::Neg: return -ref_eval(*n.a, lam);
    case NodeKind::Add: return ref_eval(*n.a, lam) + ref_eval(*n.b, lam);
    case NodeKind::Sub: return ref_eval(*n.a, lam) - ref_eval(*n.b, lam);
    case NodeKind::Mul: return ref_eval(*n.a, lam) * ref_eval(*n.b, lam);
    case NodeKind::Div: return ref_eval(*n.a, lam) / ref_eval(*n.b, lam);
    case NodeKind::Pow: return std::pow(ref_eval(*n.a, lam), ref_eval(*n.b, lam));
    case NodeKind::Call: {
      const double x = ref_eval(*n.a, lam);
      switch (n.func) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Tan: return std::tan(x);
        case Func::Sqrt: return std::sqrt(x);
        case Func::Exp: return std::exp(x);
        case Func::Abs: return std::abs(x);
      }
    }
  }
  return 0.0;
}

NodePtr random_tree(std::mt19937& rng, int depth) {
  auto leaf = [&]() -> NodePtr {
    auto n = std::make_shared<Node>();
    switch (rng() % 4) {
      case 0: n->kind = NodeKind::Lambda; break;
      case 1: n->kind = NodeKind::Pi; break;
      case 2: n->kind = NodeKind::Euler; break;
      default: {
        n->kind = NodeKind::Number;
        // non-negative literals only; negative values come from Neg nodes
        n->value = static_cast<double>(rng() % 1000) / 64.0;
        break;
      }
    }
    return n;
  };
  if (depth <= 0) return leaf();
  auto n = std::make_shared<Node>();
  switch (rng() % 8) {
    case 0: n->kind = NodeKind::Add; break;
    case 1: n->kind = NodeKind::Sub; break;
    case 2: n->kind = NodeKind::Mul; break;
    case 3: n->kind = NodeKind::Div; break;
    case 4: n->kind = NodeKind::Pow; break;
    case 5: n->kind = NodeKind::Neg; break;
    default:
      n->kind = NodeKind::Call;
      n->func = static_cast<Func>(rng() % 6);
      break;
  }
  n->a = random_tree(rng, depth - 1);
  if (n->kind != NodeKind::Neg && n->kind != NodeKind::Call) {
    n->b = random_tree(rng, depth - 1);
  }
  return n;
}

}  // namespace

TEST_CASE("expression: print/parse round trip is tree-identical, eval matches reference") {
  std::mt19937 rng(31337);
  int evaluated = 0;
  for (int i = 0; i < 1000; ++i) {
    const Expression ex(random_tree(rng, 1 + static_cast<int>(rng() % 4)));
    const std::string printed = ex.to_string();
    const Expression back = parse_expression(printed);
    REQUIRE_MESSAGE(tree_equal(ex.root(), back.root()), "round trip failed for: ", printed);

    const double lam = 0.25 + static_cast<double>(rng() % 100) / 50.0;
    double got = 0.0;
    try {
      got = ex.evaluate(lam);
    } catch (const Error&) {
      continue;  // domain fault (div by zero, sqrt of negative, overflow)
    }
    // If the production evaluator saw no domain fault, the reference walks
    // the identical arithmetic.
    const double want = ref_eval(*ex.root(), lam);
    const double tol = 1e-12 * std::max(1.0, std::abs(want));
    CHECK(std::abs(got - want) <= tol);
    ++evaluated;
  }
  CHECK(evaluated > 500);  // most random trees stay in-domain
}
