#include "mrules/expr.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <charconv>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "mrules/error.hpp"

namespace mrules {

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kMul: return "*";
    case BinaryOp::kDiv: return "/";
    case BinaryOp::kPow: return "^";
  }
  return "?";
}

std::string_view to_string(Function fn) {
  switch (fn) {
    case Function::kSin: return "sin";
    case Function::kCos: return "cos";
    case Function::kExp: return "exp";
    case Function::kLog: return "log";
    case Function::kSqrt: return "sqrt";
    case Function::kAbs: return "abs";
    case Function::kMin: return "min";
    case Function::kMax: return "max";
  }
  return "?";
}

namespace {

struct FunctionInfo {
  std::string_view name;
  Function fn;
  std::size_t min_args;
  std::size_t max_args;
};

constexpr FunctionInfo kFunctions[] = {
    {"sin", Function::kSin, 1, 1},   {"cos", Function::kCos, 1, 1},
    {"exp", Function::kExp, 1, 1},   {"log", Function::kLog, 1, 1},
    {"sqrt", Function::kSqrt, 1, 1}, {"abs", Function::kAbs, 1, 1},
    {"min", Function::kMin, 1, 64},  {"max", Function::kMax, 1, 64},
};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

ExprPtr make(auto node) {
  return std::make_shared<const ExprNode>(ExprNode{std::move(node)});
}

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars)
      : src_(src), vars_(vars) {}

  ExprPtr parse() {
    skip_space();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "empty expression");
    ExprPtr e = parse_expr();
    skip_space();
    if (pos_ != src_.size())
      throw SyntaxError(pos_, "unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c))
      throw SyntaxError(pos_, std::string("expected '") + c + "'");
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make(ast::Binary{BinaryOp::kAdd, lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make(ast::Binary{BinaryOp::kSub, lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = make(ast::Binary{BinaryOp::kMul, lhs, parse_factor()});
      } else if (accept('/')) {
        lhs = make(ast::Binary{BinaryOp::kDiv, lhs, parse_factor()});
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_factor() {
    if (accept('-')) return make(ast::Negate{parse_factor()});
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (accept('^')) return make(ast::Binary{BinaryOp::kPow, base, parse_factor()});
    return base;
  }

  ExprPtr parse_atom() {
    skip_space();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_identifier();
    if (accept('(')) {
      ExprPtr inner = parse_expr();
      expect(')');
      return inner;
    }
    throw SyntaxError(pos_, "unexpected '" + std::string(1, c) + "'");
  }

  ExprPtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = mark;
      }
    }
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_)
      throw SyntaxError(start, "malformed number");
    return make(ast::Literal{value});
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));

    skip_space();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      const FunctionInfo* info = find_function(name);
      if (info == nullptr) throw UnknownFunction(name);
      ++pos_;
      std::vector<ExprPtr> args;
      args.push_back(parse_expr());
      while (accept(',')) args.push_back(parse_expr());
      expect(')');
      if (args.size() < info->min_args || args.size() > info->max_args)
        throw SyntaxError(start, "wrong number of arguments to " + name);
      return make(ast::Call{info->fn, std::move(args)});
    }

    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) throw UnknownVariable(name);
    return make(ast::Variable{static_cast<std::size_t>(it - vars_.begin())});
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

double checked(double result, std::string_view op, double operand) {
  if (!std::isfinite(result)) throw DomainFault(std::string(op), operand);
  return result;
}

double eval_node(const ExprNode& node, std::span<const double> x) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ast::Literal>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, ast::Variable>) {
          return x[n.index];
        } else if constexpr (std::is_same_v<T, ast::Negate>) {
          return -eval_node(*n.operand, x);
        } else if constexpr (std::is_same_v<T, ast::Binary>) {
          const double a = eval_node(*n.lhs, x);
          const double b = eval_node(*n.rhs, x);
          switch (n.op) {
            case BinaryOp::kAdd: return checked(a + b, "+", a);
            case BinaryOp::kSub: return checked(a - b, "-", a);
            case BinaryOp::kMul: return checked(a * b, "*", a);
            case BinaryOp::kDiv:
              if (b == 0.0) throw DomainFault("/", b);
              return checked(a / b, "/", b);
            case BinaryOp::kPow: return checked(std::pow(a, b), "^", a);
          }
          return 0.0;
        } else {
          const double a = eval_node(*n.args.front(), x);
          switch (n.fn) {
            case Function::kSin: return std::sin(a);
            case Function::kCos: return std::cos(a);
            case Function::kExp: return checked(std::exp(a), "exp", a);
            case Function::kLog:
              if (!(a > 0.0)) throw DomainFault("log", a);
              return std::log(a);
            case Function::kSqrt:
              if (a < 0.0) throw DomainFault("sqrt", a);
              return std::sqrt(a);
            case Function::kAbs: return std::abs(a);
            case Function::kMin:
            case Function::kMax: {
              double acc = a;
              for (std::size_t i = 1; i < n.args.size(); ++i) {
                const double v = eval_node(*n.args[i], x);
                acc = n.fn == Function::kMin ? std::min(acc, v) : std::max(acc, v);
              }
              return acc;
            }
          }
          return 0.0;
        }
      },
      node.value);
}

void collect_vars(const ExprNode& node, std::vector<std::size_t>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ast::Variable>) {
          if (std::find(out.begin(), out.end(), n.index) == out.end())
            out.push_back(n.index);
        } else if constexpr (std::is_same_v<T, ast::Negate>) {
          collect_vars(*n.operand, out);
        } else if constexpr (std::is_same_v<T, ast::Binary>) {
          collect_vars(*n.lhs, out);
          collect_vars(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, ast::Call>) {
          for (const auto& a : n.args) collect_vars(*a, out);
        }
      },
      node.value);
}

void print_node(const ExprNode& node, const std::vector<std::string>& vars,
                std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ast::Literal>) {
          char buf[64];
          auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
          out.append(buf, ptr);
        } else if constexpr (std::is_same_v<T, ast::Variable>) {
          out += vars[n.index];
        } else if constexpr (std::is_same_v<T, ast::Negate>) {
          out += "(-";
          print_node(*n.operand, vars, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, ast::Binary>) {
          out += "(";
          print_node(*n.lhs, vars, out);
          out += " ";
          out += to_string(n.op);
          out += " ";
          print_node(*n.rhs, vars, out);
          out += ")";
        } else {
          out += to_string(n.fn);
          out += "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i > 0) out += ", ";
            print_node(*n.args[i], vars, out);
          }
          out += ")";
        }
      },
      node.value);
}

}  // namespace

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.value.index() != b.value.index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b.value);
        if constexpr (std::is_same_v<T, ast::Literal>) {
          return std::bit_cast<std::uint64_t>(na.value) ==
                 std::bit_cast<std::uint64_t>(nb.value);
        } else if constexpr (std::is_same_v<T, ast::Variable>) {
          return na.index == nb.index;
        } else if constexpr (std::is_same_v<T, ast::Negate>) {
          return structurally_equal(*na.operand, *nb.operand);
        } else if constexpr (std::is_same_v<T, ast::Binary>) {
          return na.op == nb.op && structurally_equal(*na.lhs, *nb.lhs) &&
                 structurally_equal(*na.rhs, *nb.rhs);
        } else {
          if (na.fn != nb.fn || na.args.size() != nb.args.size()) return false;
          for (std::size_t i = 0; i < na.args.size(); ++i)
            if (!structurally_equal(*na.args[i], *nb.args[i])) return false;
          return true;
        }
      },
      a.value);
}

Expression::Expression(ExprPtr root, std::vector<std::string> variables)
    : root_(std::move(root)), variables_(std::move(variables)) {}

double Expression::evaluate(std::span<const double> point) const {
  if (point.size() != variables_.size())
    throw DimensionMismatch("expression expects " +
                            std::to_string(variables_.size()) + " values, got " +
                            std::to_string(point.size()));
  return eval_node(*root_, point);
}

double Expression::evaluate(
    const std::map<std::string, double>& assignment) const {
  std::vector<std::size_t> used;
  collect_vars(*root_, used);
  std::vector<double> point(variables_.size(), 0.0);
  for (std::size_t idx : used) {
    auto it = assignment.find(variables_[idx]);
    if (it == assignment.end()) throw UnknownVariable(variables_[idx]);
    point[idx] = it->second;
  }
  return eval_node(*root_, point);
}

std::vector<std::string> Expression::free_variables() const {
  std::vector<std::size_t> used;
  collect_vars(*root_, used);
  std::vector<std::string> names;
  names.reserve(used.size());
  for (std::size_t idx : used) names.push_back(variables_[idx]);
  return names;
}

std::string Expression::to_string() const {
  std::string out;
  print_node(*root_, variables_, out);
  return out;
}

bool operator==(const Expression& a, const Expression& b) {
  return a.variables_ == b.variables_ && structurally_equal(*a.root_, *b.root_);
}

Expression parse(std::string_view source, std::vector<std::string> variables) {
  std::unordered_set<std::string> seen;
  for (const auto& v : variables)
    if (!seen.insert(v).second)
      throw InputError("duplicate variable name '" + v + "'");
  ExprPtr root = Parser(source, variables).parse();
  return Expression(std::move(root), std::move(variables));
}

}  // namespace mrules
