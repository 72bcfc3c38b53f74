#include "lpm/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

namespace lpm::expr {

namespace {

enum class Kind {
  Number,
  TimeVar,
  StateVar,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Call,
};

enum class Func { Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs };

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Tanh: return "tanh";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
  }
  return "?";
}

}  // namespace

struct Expr::Node {
  Kind kind;
  double number = 0.0;
  int index = 0;  // StateVar: zero-based
  Func func = Func::Sin;
  std::size_t pos = 0;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(Kind kind, std::size_t pos, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->pos = pos;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, int dim, const Constants& constants)
      : src_(src), dim_(dim), constants_(constants) {}

  NodePtr run() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size())
      throw SyntaxError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  int dim_;
  const Constants& constants_;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  // expr := term (('+'|'-') term)*
  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      std::size_t at = pos_;
      if (eat('+')) {
        auto n = make_node(Kind::Add, at, lhs, parse_term());
        lhs = n;
      } else if (eat('-')) {
        auto n = make_node(Kind::Sub, at, lhs, parse_term());
        lhs = n;
      } else {
        return lhs;
      }
    }
  }

  // term := unary (('*'|'/') unary)*
  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      std::size_t at = pos_;
      if (eat('*')) {
        lhs = make_node(Kind::Mul, at, lhs, parse_unary());
      } else if (eat('/')) {
        lhs = make_node(Kind::Div, at, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  // unary := '-' unary | power
  NodePtr parse_unary() {
    std::size_t at = pos_;
    if (eat('-')) return make_node(Kind::Neg, at, parse_unary());
    return parse_power();
  }

  // power := atom ('^' unary)?   (right-associative, binds above unary minus)
  NodePtr parse_power() {
    NodePtr base = parse_atom();
    std::size_t at = pos_;
    if (eat('^')) return make_node(Kind::Pow, at, base, parse_unary());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!eat(')')) throw SyntaxError("expected ')'", pos_);
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' belongs to something else; not part of the number
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    if (text == ".") throw SyntaxError("malformed number", start);
    auto n = make_node(Kind::Number, start);
    const_cast<Expr::Node&>(*n).number = std::strtod(text.c_str(), nullptr);
    return n;
  }

  NodePtr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);

    if (name == "t") return make_node(Kind::TimeVar, start);

    if (name.size() >= 2 && name[0] == 'u') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits) {
        long idx = std::strtol(std::string(name.substr(1)).c_str(), nullptr, 10);
        if (idx < 1 || idx > dim_)
          throw IndexOutOfRange("state index u" + std::to_string(idx) +
                                    " out of range for dimension " + std::to_string(dim_),
                                start);
        auto n = make_node(Kind::StateVar, start);
        const_cast<Expr::Node&>(*n).index = static_cast<int>(idx - 1);
        return n;
      }
    }

    static const std::pair<std::string_view, Func> kFuncs[] = {
        {"sin", Func::Sin},   {"cos", Func::Cos}, {"tan", Func::Tan}, {"tanh", Func::Tanh},
        {"exp", Func::Exp},   {"log", Func::Log}, {"sqrt", Func::Sqrt}, {"abs", Func::Abs}};
    for (auto& [fname, f] : kFuncs) {
      if (name == fname) {
        if (!eat('(')) throw SyntaxError("expected '(' after function name", pos_);
        NodePtr arg = parse_expr();
        if (!eat(')')) throw SyntaxError("expected ')'", pos_);
        auto n = make_node(Kind::Call, start, arg);
        const_cast<Expr::Node&>(*n).func = f;
        return n;
      }
    }

    if (auto it = constants_.find(name); it != constants_.end()) {
      auto n = make_node(Kind::Number, start);
      const_cast<Expr::Node&>(*n).number = it->second;
      return n;
    }
    throw UnknownIdentifier("unknown identifier '" + std::string(name) + "'", start);
  }
};

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e15; }

double pow_checked(double a, double b, std::size_t pos) {
  if (is_integer(b)) {
    if (a == 0.0 && b < 0.0) throw EvalDomainError("0 raised to a negative power", pos);
    return std::pow(a, b);
  }
  if (a <= 0.0)
    throw EvalDomainError("non-integer power of a non-positive base", pos);
  return std::pow(a, b);
}

double eval_node(const Expr::Node& n, double t, const Eigen::VectorXd& u) {
  switch (n.kind) {
    case Kind::Number: return n.number;
    case Kind::TimeVar: return t;
    case Kind::StateVar: return u[n.index];
    case Kind::Neg: return -eval_node(*n.lhs, t, u);
    case Kind::Add: return eval_node(*n.lhs, t, u) + eval_node(*n.rhs, t, u);
    case Kind::Sub: return eval_node(*n.lhs, t, u) - eval_node(*n.rhs, t, u);
    case Kind::Mul: return eval_node(*n.lhs, t, u) * eval_node(*n.rhs, t, u);
    case Kind::Div: {
      double a = eval_node(*n.lhs, t, u);
      double b = eval_node(*n.rhs, t, u);
      if (b == 0.0) throw EvalDomainError("division by zero", n.pos);
      return a / b;
    }
    case Kind::Pow:
      return pow_checked(eval_node(*n.lhs, t, u), eval_node(*n.rhs, t, u), n.pos);
    case Kind::Call: {
      double a = eval_node(*n.lhs, t, u);
      switch (n.func) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Tan: return std::tan(a);
        case Func::Tanh: return std::tanh(a);
        case Func::Exp: return std::exp(a);
        case Func::Log:
          if (a <= 0.0) throw EvalDomainError("log of a non-positive argument", n.pos);
          return std::log(a);
        case Func::Sqrt:
          if (a < 0.0) throw EvalDomainError("sqrt of a negative argument", n.pos);
          return std::sqrt(a);
        case Func::Abs: return std::abs(a);
      }
      break;
    }
  }
  throw EvalDomainError("corrupt expression tree", n.pos);
}

struct Dual {
  double v;
  Eigen::VectorXd g;
};

Dual grad_node(const Expr::Node& n, double t, const Eigen::VectorXd& u) {
  const auto dim = u.size();
  switch (n.kind) {
    case Kind::Number: return {n.number, Eigen::VectorXd::Zero(dim)};
    case Kind::TimeVar: return {t, Eigen::VectorXd::Zero(dim)};
    case Kind::StateVar: {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
      g[n.index] = 1.0;
      return {u[n.index], std::move(g)};
    }
    case Kind::Neg: {
      Dual a = grad_node(*n.lhs, t, u);
      return {-a.v, -a.g};
    }
    case Kind::Add: {
      Dual a = grad_node(*n.lhs, t, u), b = grad_node(*n.rhs, t, u);
      return {a.v + b.v, a.g + b.g};
    }
    case Kind::Sub: {
      Dual a = grad_node(*n.lhs, t, u), b = grad_node(*n.rhs, t, u);
      return {a.v - b.v, a.g - b.g};
    }
    case Kind::Mul: {
      Dual a = grad_node(*n.lhs, t, u), b = grad_node(*n.rhs, t, u);
      return {a.v * b.v, a.v * b.g + b.v * a.g};
    }
    case Kind::Div: {
      Dual a = grad_node(*n.lhs, t, u), b = grad_node(*n.rhs, t, u);
      if (b.v == 0.0) throw EvalDomainError("division by zero", n.pos);
      return {a.v / b.v, (a.g - (a.v / b.v) * b.g) / b.v};
    }
    case Kind::Pow: {
      Dual a = grad_node(*n.lhs, t, u), b = grad_node(*n.rhs, t, u);
      double v = pow_checked(a.v, b.v, n.pos);
      if (b.g.isZero(0.0) && is_integer(b.v)) {
        // integer exponent: d(a^m) = m a^{m-1} da, valid for any base
        double m = b.v;
        double dbase = (m == 0.0) ? 0.0 : m * pow_checked(a.v, m - 1.0, n.pos);
        return {v, dbase * a.g};
      }
      if (a.v <= 0.0)
        throw EvalDomainError("non-integer power of a non-positive base", n.pos);
      return {v, v * (b.g * std::log(a.v) + (b.v / a.v) * a.g)};
    }
    case Kind::Call: {
      Dual a = grad_node(*n.lhs, t, u);
      double v = 0.0, d = 0.0;
      switch (n.func) {
        case Func::Sin: v = std::sin(a.v); d = std::cos(a.v); break;
        case Func::Cos: v = std::cos(a.v); d = -std::sin(a.v); break;
        case Func::Tan: {
          v = std::tan(a.v);
          double c = std::cos(a.v);
          d = 1.0 / (c * c);
          break;
        }
        case Func::Tanh: {
          v = std::tanh(a.v);
          d = 1.0 - v * v;
          break;
        }
        case Func::Exp: v = std::exp(a.v); d = v; break;
        case Func::Log:
          if (a.v <= 0.0) throw EvalDomainError("log of a non-positive argument", n.pos);
          v = std::log(a.v);
          d = 1.0 / a.v;
          break;
        case Func::Sqrt:
          if (a.v < 0.0) throw EvalDomainError("sqrt of a negative argument", n.pos);
          if (a.v == 0.0) throw NotDifferentiable("sqrt not differentiable at 0", n.pos);
          v = std::sqrt(a.v);
          d = 0.5 / v;
          break;
        case Func::Abs:
          if (a.v == 0.0) throw NotDifferentiable("abs not differentiable at 0", n.pos);
          v = std::abs(a.v);
          d = a.v > 0.0 ? 1.0 : -1.0;
          break;
      }
      return {v, d * a.g};
    }
  }
  throw EvalDomainError("corrupt expression tree", n.pos);
}

void print_node(const Expr::Node& n, std::string& out) {
  char buf[64];
  switch (n.kind) {
    case Kind::Number:
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      out += buf;
      return;
    case Kind::TimeVar: out += 't'; return;
    case Kind::StateVar:
      out += 'u';
      out += std::to_string(n.index + 1);
      return;
    case Kind::Neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div:
    case Kind::Pow: {
      char op = n.kind == Kind::Add   ? '+'
                : n.kind == Kind::Sub ? '-'
                : n.kind == Kind::Mul ? '*'
                : n.kind == Kind::Div ? '/'
                                      : '^';
      out += '(';
      print_node(*n.lhs, out);
      out += op;
      print_node(*n.rhs, out);
      out += ')';
      return;
    }
    case Kind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
  }
}

}  // namespace

Expr Expr::parse(std::string_view src, int dim, const Constants& constants) {
  Expr e;
  e.root_ = Parser(src, dim, constants).run();
  e.dim_ = dim;
  e.src_ = std::string(src);
  return e;
}

double Expr::eval(double t, const Eigen::VectorXd& u) const {
  double v = eval_node(*root_, t, u);
  if (!std::isfinite(v)) throw EvalDomainError("evaluation produced a non-finite value", root_->pos);
  return v;
}

double Expr::eval_grad(double t, const Eigen::VectorXd& u, Eigen::VectorXd& grad) const {
  Dual d = grad_node(*root_, t, u);
  if (!std::isfinite(d.v) || !d.g.allFinite())
    throw EvalDomainError("derivative evaluation produced a non-finite value", root_->pos);
  grad = std::move(d.g);
  return d.v;
}

std::string Expr::to_string() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expr::is_zero_literal() const {
  return root_ && root_->kind == Kind::Number && root_->number == 0.0;
}

}  // namespace lpm::expr
