#include "jdi/expression.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <numbers>

#include "jdi/error.hpp"

namespace jdi {
namespace detail {

enum class Op { number, variable, constant_pi, constant_e, negate, add, sub, mul, div, pow, call };
enum class Fn { exp, log, sqrt, sin, cos, tanh, abs };

struct Node {
  Op op = Op::number;
  double value = 0.0;
  Variable var = Variable::x;
  Fn fn = Fn::exp;
  std::shared_ptr<const Node> lhs, rhs;
};

}  // namespace detail

namespace {

using detail::Fn;
using detail::Node;
using detail::Op;
using NodePtr = std::shared_ptr<const Node>;

constexpr std::string_view fn_name(Fn f) {
  switch (f) {
    case Fn::exp: return "exp";
    case Fn::log: return "log";
    case Fn::sqrt: return "sqrt";
    case Fn::sin: return "sin";
    case Fn::cos: return "cos";
    case Fn::tanh: return "tanh";
    case Fn::abs: return "abs";
  }
  return "?";
}

NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr run() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail(fmt::format("unexpected '{}'", s_[pos_]));
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static bool digit(char c) { return c >= '0' && c <= '9'; }
  static bool alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = make(Op::add, n, term());
      else if (accept('-')) n = make(Op::sub, n, term());
      else return n;
    }
  }
  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) n = make(Op::mul, n, unary());
      else if (accept('/')) n = make(Op::div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Op::negate, unary());
    return power();
  }
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (digit(c) || c == '.') return number();
    if (alpha(c)) return identifier();
    fail(fmt::format("unexpected '{}'", c));
  }
  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t k = pos_ + 1;
      if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < s_.size() && digit(s_[k])) {
        pos_ = k;
        while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    auto n = std::make_shared<Node>();
    n->op = Op::number;
    n->value = v;
    return n;
  }
  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (alpha(s_[pos_]) || digit(s_[pos_]))) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);
    auto n = std::make_shared<Node>();
    if (id == "x" || id == "t" || id == "xi") {
      n->op = Op::variable;
      n->var = id == "x" ? Variable::x : id == "t" ? Variable::t : Variable::xi;
      return n;
    }
    if (id == "pi") {
      n->op = Op::constant_pi;
      return n;
    }
    if (id == "e") {
      n->op = Op::constant_e;
      return n;
    }
    static constexpr Fn fns[] = {Fn::exp, Fn::log, Fn::sqrt, Fn::sin, Fn::cos, Fn::tanh, Fn::abs};
    for (Fn f : fns) {
      if (id != fn_name(f)) continue;
      if (!accept('(')) fail(fmt::format("function '{}' expects one argument", id));
      skip();
      if (pos_ < s_.size() && s_[pos_] == ')') fail(fmt::format("function '{}' expects one argument, got none", id));
      n->op = Op::call;
      n->fn = f;
      n->lhs = expr();
      if (accept(',')) fail(fmt::format("function '{}' expects one argument, got more", id));
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    pos_ = start;
    fail(fmt::format("unknown identifier '{}'", id));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvaluationError(fmt::format("{} produced a non-finite value", what));
  return v;
}

double eval(const Node& n, const EvalPoint& p) {
  switch (n.op) {
    case Op::number: return n.value;
    case Op::variable: return n.var == Variable::x ? p.x : n.var == Variable::t ? p.t : p.xi;
    case Op::constant_pi: return std::numbers::pi;
    case Op::constant_e: return std::numbers::e;
    case Op::negate: return -eval(*n.lhs, p);
    case Op::add: return checked(eval(*n.lhs, p) + eval(*n.rhs, p), "addition");
    case Op::sub: return checked(eval(*n.lhs, p) - eval(*n.rhs, p), "subtraction");
    case Op::mul: return checked(eval(*n.lhs, p) * eval(*n.rhs, p), "multiplication");
    case Op::div: {
      const double num = eval(*n.lhs, p);
      const double den = eval(*n.rhs, p);
      if (den == 0.0) throw EvaluationError("division by zero");
      return checked(num / den, "division");
    }
    case Op::pow: {
      const double b = eval(*n.lhs, p);
      const double x = eval(*n.rhs, p);
      if (b == 0.0 && x < 0.0) throw EvaluationError("zero raised to a negative power");
      if (b < 0.0 && x != std::floor(x)) throw EvaluationError("negative base with non-integer exponent");
      return checked(std::pow(b, x), "power");
    }
    case Op::call: {
      const double a = eval(*n.lhs, p);
      switch (n.fn) {
        case Fn::exp: return checked(std::exp(a), "exp");
        case Fn::log:
          if (!(a > 0.0)) throw EvaluationError(fmt::format("log of non-positive value {}", a));
          return std::log(a);
        case Fn::sqrt:
          if (a < 0.0) throw EvaluationError(fmt::format("sqrt of negative value {}", a));
          return std::sqrt(a);
        case Fn::sin: return checked(std::sin(a), "sin");
        case Fn::cos: return checked(std::cos(a), "cos");
        case Fn::tanh: return std::tanh(a);
        case Fn::abs: return std::fabs(a);
      }
    }
  }
  return 0.0;
}

void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::number: out += fmt::format("{}", n.value); return;
    case Op::variable: out += n.var == Variable::x ? "x" : n.var == Variable::t ? "t" : "xi"; return;
    case Op::constant_pi: out += "pi"; return;
    case Op::constant_e: out += "e"; return;
    case Op::negate:
      out += "(-";
      print(*n.lhs, out);
      out += ')';
      return;
    case Op::call:
      out += fn_name(n.fn);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    default: break;
  }
  const char sym = n.op == Op::add ? '+' : n.op == Op::sub ? '-' : n.op == Op::mul ? '*' : n.op == Op::div ? '/' : '^';
  out += '(';
  print(*n.lhs, out);
  out += sym;
  print(*n.rhs, out);
  out += ')';
}

unsigned deps(const Node& n) {
  if (n.op == Op::variable) return 1u << static_cast<unsigned>(n.var);
  unsigned d = 0;
  if (n.lhs) d |= deps(*n.lhs);
  if (n.rhs) d |= deps(*n.rhs);
  return d;
}

bool equal(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::number:
      // bitwise so that -0 and 0 stay distinct
      return std::signbit(a.value) == std::signbit(b.value) && a.value == b.value;
    case Op::variable: return a.var == b.var;
    case Op::call: return a.fn == b.fn && equal(*a.lhs, *b.lhs);
    default: break;
  }
  if (!a.lhs != !b.lhs || !a.rhs != !b.rhs) return false;
  return (!a.lhs || equal(*a.lhs, *b.lhs)) && (!a.rhs || equal(*a.rhs, *b.rhs));
}

NodePtr zero_node() {
  static const NodePtr z = std::make_shared<Node>();
  return z;
}

}  // namespace

ScalarField::ScalarField() : ScalarField(zero_node(), "0") {}

ScalarField::ScalarField(std::shared_ptr<const detail::Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)), deps_(deps(*root_)) {
  // variable-free trees are folded once; a domain error in a constant surfaces at evaluation
  if (deps_ == 0) {
    try {
      constant_ = eval(*root_, {});
    } catch (const EvaluationError&) {
    }
  }
}

ScalarField ScalarField::parse(std::string_view text) {
  Parser p(text);
  return ScalarField(p.run(), std::string(text));
}

ScalarField ScalarField::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::number;
  n->value = value;
  return ScalarField(n, fmt::format("{}", value));
}

double ScalarField::evaluate(const EvalPoint& p) const {
  if (constant_) return *constant_;
  return eval(*root_, p);
}

std::string ScalarField::unparse() const {
  std::string out;
  print(*root_, out);
  return out;
}

bool ScalarField::depends_on(Variable v) const { return (deps_ >> static_cast<unsigned>(v)) & 1u; }

bool ScalarField::operator==(const ScalarField& other) const { return equal(*root_, *other.root_); }

}  // namespace jdi
