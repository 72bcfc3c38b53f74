#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lpm::expr {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position(position) {}
  std::size_t position;
};

class SyntaxError : public ParseError {
 public:
  using ParseError::ParseError;
};

class UnknownIdentifier : public ParseError {
 public:
  using ParseError::ParseError;
};

class IndexOutOfRange : public ParseError {
 public:
  using ParseError::ParseError;
};

class EvalDomainError : public std::runtime_error {
 public:
  EvalDomainError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position(position) {}
  std::size_t position;
};

class NotDifferentiable : public EvalDomainError {
 public:
  using EvalDomainError::EvalDomainError;
};

using Constants = std::map<std::string, double, std::less<>>;

/// Immutable scalar expression over the variables t, u1..un plus named
/// constants resolved at parse time. Evaluation and forward-mode
/// differentiation are pure, so a parsed Expr may be shared across threads.
class Expr {
 public:
  Expr() = default;

  /// Parses `src` against the fixed grammar. `dim` bounds the state indices
  /// u1..u<dim>. Named constants are substituted as literals.
  static Expr parse(std::string_view src, int dim, const Constants& constants = {});

  double eval(double t, const Eigen::VectorXd& u) const;

  /// Forward-mode sweep; returns the value and fills grad with ∂/∂u_j.
  double eval_grad(double t, const Eigen::VectorXd& u, Eigen::VectorXd& grad) const;

  /// Fully parenthesized canonical form; parse(to_string()) evaluates
  /// bit-identically.
  std::string to_string() const;

  /// Original source text as given to parse().
  const std::string& source() const { return src_; }

  int dimension() const { return dim_; }
  bool valid() const { return root_ != nullptr; }

  /// True when the tree is a literal 0 (used for default matrix entries).
  bool is_zero_literal() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  int dim_ = 0;
  std::string src_;
};

}  // namespace lpm::expr
