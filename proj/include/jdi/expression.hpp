#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace jdi {

enum class Variable { x, t, xi };

struct EvalPoint {
  double x = 0.0;
  double t = 0.0;
  double xi = 0.0;
};

namespace detail {
struct Node;
}

/// A parsed coefficient expression over x, t (and xi, which models reject).
///
/// Grammar: numbers, the variables x t xi, the constants pi e, binary + - * / ^,
/// unary minus, and the functions exp log sqrt sin cos tanh abs. '^' binds tighter
/// than unary minus and associates to the right.
class ScalarField {
 public:
  ScalarField();  // the zero field

  static ScalarField parse(std::string_view text);
  static ScalarField constant(double value);

  double evaluate(const EvalPoint& p) const;
  double operator()(double x, double t) const {
    if (constant_) return *constant_;
    return evaluate({x, t, 0.0});
  }

  /// Fully parenthesised text that parses back to an equal tree.
  std::string unparse() const;
  const std::string& source() const noexcept { return source_; }

  bool depends_on(Variable v) const;
  bool depends_on_x() const { return depends_on(Variable::x); }
  bool depends_on_t() const { return depends_on(Variable::t); }

  /// Set when the tree has no variables; the folded value.
  const std::optional<double>& constant_value() const noexcept { return constant_; }
  bool is_zero() const { return constant_ && *constant_ == 0.0; }

  bool operator==(const ScalarField& other) const;

 private:
  explicit ScalarField(std::shared_ptr<const detail::Node> root, std::string source);

  std::shared_ptr<const detail::Node> root_;
  std::string source_;
  std::optional<double> constant_;
  unsigned deps_ = 0;
};

}  // namespace jdi
