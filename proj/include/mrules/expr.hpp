#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mrules {

enum class BinaryOp { kAdd, kSub, kMul, kDiv, kPow };
enum class Function { kSin, kCos, kExp, kLog, kSqrt, kAbs, kMin, kMax };

std::string_view to_string(BinaryOp op);
std::string_view to_string(Function fn);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

namespace ast {
struct Literal {
  double value;
};
/// Index into the variable list the expression was parsed against.
struct Variable {
  std::size_t index;
};
struct Negate {
  ExprPtr operand;
};
struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct Call {
  Function fn;
  std::vector<ExprPtr> args;
};
}  // namespace ast

struct ExprNode {
  std::variant<ast::Literal, ast::Variable, ast::Negate, ast::Binary,
               ast::Call>
      value;
};

/// Immutable parsed expression bound to an ordered variable list.
/// Copies share the tree; evaluation is pure and thread-safe.
class Expression {
 public:
  Expression(ExprPtr root, std::vector<std::string> variables);

  const ExprNode& root() const { return *root_; }
  const ExprPtr& root_ptr() const { return root_; }
  const std::vector<std::string>& variables() const { return variables_; }

  /// `point[i]` is the value of `variables()[i]`.
  double evaluate(std::span<const double> point) const;
  double evaluate(const std::map<std::string, double>& assignment) const;

  /// Names in order of first appearance, no duplicates.
  std::vector<std::string> free_variables() const;

  /// Fully parenthesized text that reparses to an identical tree.
  std::string to_string() const;

  /// Structural equality of trees plus identical variable lists.
  friend bool operator==(const Expression& a, const Expression& b);

 private:
  ExprPtr root_;
  std::vector<std::string> variables_;
};

Expression parse(std::string_view source, std::vector<std::string> variables);

bool structurally_equal(const ExprNode& a, const ExprNode& b);

}  // namespace mrules
