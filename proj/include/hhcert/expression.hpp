#pragma once

// Expression language for user-supplied functions f(x, y).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | variable | function '(' args ')' | '(' expr ')'
//
// Precedence, tightest first: ^, unary minus, * /, + -. "-x^2" is -(x^2);
// "x^y^z" is x^(y^z). Functions: exp log sin cos sqrt abs (one argument) and
// pow (two). Numbers are decimal with optional fraction and exponent.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hhcert::funcspace {

enum class NodeKind { Number, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Call };

enum class Function { Exp, Log, Sin, Cos, Sqrt, Abs, Pow };

std::string_view to_string(Function fn);

/// Which identifiers name variables. Bivariate accepts x and y; univariate
/// accepts t (or x) as its single variable.
enum class VariableSet { Bivariate, Univariate };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;
  int variable = 0;  // 0 = x (or t), 1 = y
  Function function = Function::Exp;
  std::vector<ExprPtr> children;
};

/// Immutable expression tree.
class Expression {
 public:
  /// Throws ParseError (with byte offset and expected tokens) or
  /// UnknownIdentifierError.
  static Expression parse(std::string_view src,
                          VariableSet vars = VariableSet::Bivariate);

  static Expression number(double v);
  static Expression variable(int index, VariableSet vars = VariableSet::Bivariate);
  static Expression negate(const Expression& e);
  static Expression binary(NodeKind kind, const Expression& lhs, const Expression& rhs);
  static Expression call(Function fn, std::vector<Expression> args);

  /// Domain violations (log or sqrt of a negative, division by zero, any
  /// non-finite intermediate) throw DomainError naming the subexpression.
  double evaluate(double x, double y = 0.0) const;

  /// Minimal-parenthesis rendering; parse(to_string()) == *this.
  std::string to_string() const;

  const ExprNode& root() const noexcept { return *root_; }
  VariableSet variables() const noexcept { return vars_; }
  bool uses_function(Function fn) const;
  bool uses_variable(int index) const;

  friend bool operator==(const Expression& lhs, const Expression& rhs);

 private:
  Expression(ExprPtr root, VariableSet vars) : root_(std::move(root)), vars_(vars) {}
  ExprPtr root_;
  VariableSet vars_;
};

bool structurally_equal(const ExprNode& lhs, const ExprNode& rhs);

}  // namespace hhcert::funcspace
