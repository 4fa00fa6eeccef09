#include "ffo/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace ffo {

using cplx = std::complex<double>;

enum class Func { sin, cos, tan, sinh, cosh, tanh, exp, ln, sqrt };

static const char* func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::sinh: return "sinh";
    case Func::cosh: return "cosh";
    case Func::tanh: return "tanh";
    case Func::exp: return "exp";
    case Func::ln: return "ln";
    case Func::sqrt: return "sqrt";
  }
  return "?";
}

struct Expr::Node {
  enum class Kind { constant, time_var, negate, add, sub, mul, div, pow, call };
  Kind kind;
  cplx value{};  // constant
  Func func{};   // call
  std::shared_ptr<const Node> a, b;
};

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

namespace {

NodePtr make_node(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_const(cplx v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::constant;
  n->value = v;
  return n;
}

NodePtr make_call(Func f, NodePtr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::call;
  n->func = f;
  n->a = std::move(arg);
  return n;
}

bool is_const(const NodePtr& n, cplx v) {
  return n->kind == Kind::constant && n->value == v;
}

bool subtree_constant(const NodePtr& n) {
  if (n->kind == Kind::time_var) return false;
  if (n->a && !subtree_constant(n->a)) return false;
  if (n->b && !subtree_constant(n->b)) return false;
  return true;
}

// light folding, used when assembling derivatives
NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == Kind::constant && b->kind == Kind::constant)
    return make_const(a->value + b->value);
  return make_node(Kind::add, std::move(a), std::move(b));
}

NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (a->kind == Kind::constant && b->kind == Kind::constant)
    return make_const(a->value - b->value);
  if (is_const(a, 0.0)) return make_node(Kind::negate, std::move(b));
  return make_node(Kind::sub, std::move(a), std::move(b));
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == Kind::constant && b->kind == Kind::constant)
    return make_const(a->value * b->value);
  return make_node(Kind::mul, std::move(a), std::move(b));
}

NodePtr divide(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  if (a->kind == Kind::constant && b->kind == Kind::constant && b->value != cplx{0.0}) {
    cplx v = a->value / b->value;
    if (std::isfinite(v.real()) && std::isfinite(v.imag())) return make_const(v);
  }
  return make_node(Kind::div, std::move(a), std::move(b));
}

NodePtr neg(NodePtr a) {
  if (a->kind == Kind::constant) return make_const(-a->value);
  return make_node(Kind::negate, std::move(a));
}

// ---- tokenizer / recursive descent parser ----

struct Parser {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool eof() {
    skip_ws();
    return pos >= src.size();
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  bool consume(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t off) { throw ParseError(msg, off); }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (consume('+'))
        lhs = make_node(Kind::add, lhs, parse_term());
      else if (consume('-'))
        lhs = make_node(Kind::sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (consume('*'))
        lhs = make_node(Kind::mul, lhs, parse_factor());
      else if (consume('/'))
        lhs = make_node(Kind::div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  NodePtr parse_factor() {
    if (consume('-')) return make_node(Kind::negate, parse_factor());
    NodePtr base = parse_atom();
    skip_ws();
    if (pos < src.size() && src[pos] == '^') {
      const std::size_t caret = pos;
      ++pos;
      NodePtr exponent = parse_factor();
      if (!subtree_constant(exponent))
        fail("non-constant exponent under '^'", caret);
      return make_node(Kind::pow, base, exponent);
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of input", pos);
    const char c = src[pos];

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!consume(')')) fail("expected ')'", pos);
      return inner;
    }

    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos;
      while (pos < src.size() && std::isalnum(static_cast<unsigned char>(src[pos]))) ++pos;
      const std::string_view ident = src.substr(start, pos - start);

      if (ident == "t") return make_node(Kind::time_var);
      if (ident == "i") return make_const(cplx(0.0, 1.0));
      if (ident == "pi") return make_const(cplx(std::numbers::pi, 0.0));

      skip_ws();
      if (pos < src.size() && src[pos] == '(') {
        ++pos;
        NodePtr arg = parse_expr();
        if (!consume(')')) fail("expected ')'", pos);
        static const std::pair<std::string_view, Func> table[] = {
            {"sin", Func::sin},   {"cos", Func::cos},   {"tan", Func::tan},
            {"sinh", Func::sinh}, {"cosh", Func::cosh}, {"tanh", Func::tanh},
            {"exp", Func::exp},   {"ln", Func::ln},     {"sqrt", Func::sqrt}};
        for (const auto& [name, f] : table)
          if (ident == name) return make_call(f, arg);
        fail("unknown function '" + std::string(ident) + "'", start);
      }
      fail("unknown identifier '" + std::string(ident) + "'", start);
    }

    fail(std::string("unexpected character '") + c + "'", pos);
  }

  NodePtr parse_number() {
    const std::size_t start = pos;
    while (pos < src.size() && (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.'))
      ++pos;
    // optional exponent part
    if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
      std::size_t p = pos + 1;
      if (p < src.size() && (src[p] == '+' || src[p] == '-')) ++p;
      if (p < src.size() && std::isdigit(static_cast<unsigned char>(src[p]))) {
        ++p;
        while (p < src.size() && std::isdigit(static_cast<unsigned char>(src[p]))) ++p;
        pos = p;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(src.data() + start, src.data() + pos, v);
    if (res.ec != std::errc{} || res.ptr != src.data() + pos)
      fail("malformed number", start);
    return make_const(cplx(v, 0.0));
  }
};

// ---- evaluation ----

cplx eval_node(const Node& n, double t) {
  switch (n.kind) {
    case Kind::constant: return n.value;
    case Kind::time_var: return cplx(t, 0.0);
    case Kind::negate: return -eval_node(*n.a, t);
    case Kind::add: return eval_node(*n.a, t) + eval_node(*n.b, t);
    case Kind::sub: return eval_node(*n.a, t) - eval_node(*n.b, t);
    case Kind::mul: return eval_node(*n.a, t) * eval_node(*n.b, t);
    case Kind::div: {
      const cplx num = eval_node(*n.a, t);
      const cplx den = eval_node(*n.b, t);
      if (den == cplx{0.0}) throw EvalError("division by zero", t);
      return num / den;
    }
    case Kind::pow: {
      const cplx base = eval_node(*n.a, t);
      const cplx expo = eval_node(*n.b, t);
      if (base == cplx{0.0} && expo.real() <= 0.0 && expo != cplx{0.0})
        throw EvalError("zero base with non-positive exponent", t);
      return std::pow(base, expo);
    }
    case Kind::call: {
      const cplx u = eval_node(*n.a, t);
      switch (n.func) {
        case Func::sin: return std::sin(u);
        case Func::cos: return std::cos(u);
        case Func::tan: {
          const cplx c = std::cos(u);
          if (c == cplx{0.0}) throw EvalError("tan at pole", t);
          return std::sin(u) / c;
        }
        case Func::sinh: return std::sinh(u);
        case Func::cosh: return std::cosh(u);
        case Func::tanh: return std::tanh(u);
        case Func::exp: return std::exp(u);
        case Func::ln:
          if (u == cplx{0.0}) throw EvalError("ln(0)", t);
          return std::log(u);
        case Func::sqrt:
          if (u == cplx{0.0}) throw EvalError("sqrt at branch point", t);
          return std::sqrt(u);
      }
      break;
    }
  }
  throw EvalError("corrupt expression node", t);
}

// ---- differentiation ----

NodePtr diff_node(const NodePtr& n);

NodePtr diff_call(const NodePtr& n) {
  const NodePtr& u = n->a;
  NodePtr du = diff_node(u);
  switch (n->func) {
    case Func::sin: return mul(make_call(Func::cos, u), du);
    case Func::cos: return neg(mul(make_call(Func::sin, u), du));
    case Func::tan: {
      NodePtr c = make_call(Func::cos, u);
      return divide(du, mul(c, c));
    }
    case Func::sinh: return mul(make_call(Func::cosh, u), du);
    case Func::cosh: return mul(make_call(Func::sinh, u), du);
    case Func::tanh: {
      NodePtr c = make_call(Func::cosh, u);
      return divide(du, mul(c, c));
    }
    case Func::exp: return mul(make_call(Func::exp, u), du);
    case Func::ln: return divide(du, u);
    case Func::sqrt: return divide(du, mul(make_const(2.0), make_call(Func::sqrt, u)));
  }
  throw std::logic_error("unhandled function in derivative");
}

NodePtr diff_node(const NodePtr& n) {
  switch (n->kind) {
    case Kind::constant: return make_const(0.0);
    case Kind::time_var: return make_const(1.0);
    case Kind::negate: return neg(diff_node(n->a));
    case Kind::add: return add(diff_node(n->a), diff_node(n->b));
    case Kind::sub: return sub(diff_node(n->a), diff_node(n->b));
    case Kind::mul: return add(mul(diff_node(n->a), n->b), mul(n->a, diff_node(n->b)));
    case Kind::div: {
      NodePtr num = sub(mul(diff_node(n->a), n->b), mul(n->a, diff_node(n->b)));
      return divide(num, mul(n->b, n->b));
    }
    case Kind::pow: {
      // exponent is constant by parse-time validation
      if (!subtree_constant(n->b))
        throw std::logic_error("non-constant exponent reached differentiation");
      NodePtr c = n->b;
      NodePtr cm1 = sub(c, make_const(1.0));
      return mul(mul(c, make_node(Kind::pow, n->a, cm1)), diff_node(n->a));
    }
    case Kind::call: return diff_call(n);
  }
  throw std::logic_error("corrupt expression node in derivative");
}

// ---- printing ----
// precedence: add/sub = 1, mul/div = 2, negate = 3, pow = 4, atoms = 5

int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::add:
    case Kind::sub: return 1;
    case Kind::mul:
    case Kind::div: return 2;
    case Kind::negate: return 3;
    case Kind::pow: return 4;
    default: return 5;
  }
}

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string print_const(cplx v) {
  if (v.imag() == 0.0) return fmt_double(v.real());
  if (v.real() == 0.0 && v.imag() == 1.0) return "i";
  std::string s = "(" + fmt_double(v.real());
  if (v.imag() >= 0.0)
    s += "+" + fmt_double(v.imag()) + "*i)";
  else
    s += "-" + fmt_double(-v.imag()) + "*i)";
  return s;
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    print_node(child, out);
    out += ')';
  } else {
    print_node(child, out);
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::constant: out += print_const(n.value); return;
    case Kind::time_var: out += 't'; return;
    case Kind::negate:
      out += '-';
      print_child(*n.a, 3, out);
      return;
    case Kind::add:
      print_child(*n.a, 1, out);
      out += '+';
      print_child(*n.b, 2, out);
      return;
    case Kind::sub:
      print_child(*n.a, 1, out);
      out += '-';
      print_child(*n.b, 2, out);
      return;
    case Kind::mul:
      print_child(*n.a, 2, out);
      out += '*';
      print_child(*n.b, 3, out);
      return;
    case Kind::div:
      print_child(*n.a, 2, out);
      out += '/';
      print_child(*n.b, 3, out);
      return;
    case Kind::pow:
      print_child(*n.a, 5, out);
      out += '^';
      print_child(*n.b, 3, out);
      return;
    case Kind::call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.a, out);
      out += ')';
      return;
  }
}

}  // namespace

Expr Expr::parse(std::string_view src) {
  Parser p{src};
  if (p.eof()) throw ParseError("empty expression", 0);
  NodePtr root = p.parse_expr();
  if (!p.eof()) p.fail("trailing input", p.pos);
  return Expr(std::move(root));
}

cplx Expr::eval(double t) const {
  if (!root_) throw EvalError("empty expression", t);
  return eval_node(*root_, t);
}

Expr Expr::derivative() const {
  if (!root_) throw std::logic_error("derivative of empty expression");
  return Expr(diff_node(root_));
}

bool Expr::is_constant() const { return root_ && subtree_constant(root_); }

std::string Expr::str() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, out);
  return out;
}

RealityReport validate_real(const Expr& e, std::span<const double> grid, double tol) {
  RealityReport rep;
  rep.tol = tol;
  if (grid.empty()) throw std::invalid_argument("validate_real: empty grid");
  for (double t : grid) {
    const double im = std::abs(e.eval(t).imag());
    if (im > rep.worst_imag) {
      rep.worst_imag = im;
      rep.worst_t = t;
    }
  }
  rep.pass = rep.worst_imag <= tol;
  return rep;
}

}  // namespace ffo
