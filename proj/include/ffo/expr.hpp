#ifndef FFO_EXPR_HPP
#define FFO_EXPR_HPP

#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ffo {

struct ParseError : std::runtime_error {
  std::size_t offset;  // byte offset into the source string
  ParseError(const std::string& msg, std::size_t off)
      : std::runtime_error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

struct EvalError : std::runtime_error {
  double t;
  EvalError(const std::string& msg, double t_)
      : std::runtime_error(msg + " (at t = " + std::to_string(t_) + ")"), t(t_) {}
};

// Immutable closed-form expression in the single variable t.
//
// Grammar:
//   expr   := term {("+"|"-") term}
//   term   := factor {("*"|"/") factor}
//   factor := "-" factor | atom ["^" factor]
//   atom   := number | "t" | "i" | "pi" | ident "(" expr ")" | "(" expr ")"
//
// "^" requires a constant exponent (checked at parse time) so that
// differentiation stays closed-form; unary minus binds below "^" so that
// -t^2 reads -(t^2). Functions: sin cos tan sinh cosh tanh exp ln sqrt,
// with principal branches for ln and sqrt.
class Expr {
 public:
  Expr() = default;

  static Expr parse(std::string_view src);

  std::complex<double> eval(double t) const;
  Expr derivative() const;
  std::string str() const;

  bool is_constant() const;  // no occurrence of t
  bool valid() const { return root_ != nullptr; }

  struct Node;
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  const std::shared_ptr<const Node>& root() const { return root_; }

 private:
  std::shared_ptr<const Node> root_;
};

struct RealityReport {
  bool pass = false;
  double worst_imag = 0.0;  // max |Im eval| over the grid
  double worst_t = 0.0;
  double tol = 0.0;
};

// Checks that e evaluates real (|Im| <= tol) across the grid.
RealityReport validate_real(const Expr& e, std::span<const double> grid, double tol);

}  // namespace ffo

#endif
