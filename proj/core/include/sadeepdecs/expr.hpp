#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sadeepdecs {

using Valuation = std::map<std::string, double, std::less<>>;

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable arithmetic expression over named parameters: literals,
/// parameter references, `+`, `-` and `*`. Copies share the tree.
class ParamExpr {
 public:
  enum class Kind { Literal, Param, Add, Sub, Mul };

  ParamExpr();  // literal 0
  static ParamExpr literal(double value);
  static ParamExpr param(std::string name);
  friend ParamExpr operator+(const ParamExpr& a, const ParamExpr& b);
  friend ParamExpr operator-(const ParamExpr& a, const ParamExpr& b);
  friend ParamExpr operator*(const ParamExpr& a, const ParamExpr& b);

  /// Throws ExprError when a referenced parameter has no value.
  double evaluate(const Valuation& values) const;

  void collect_params(std::set<std::string>& out) const;

  Kind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  ParamExpr lhs() const { return ParamExpr(node_->lhs); }
  ParamExpr rhs() const { return ParamExpr(node_->rhs); }

  /// Minimal-parenthesis rendering; parse(to_string()) is structurally equal.
  std::string to_string() const;

  friend bool operator==(const ParamExpr& a, const ParamExpr& b);

 private:
  struct Node {
    Kind kind = Kind::Literal;
    double value = 0.0;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  explicit ParamExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static ParamExpr binary(Kind kind, const ParamExpr& a, const ParamExpr& b);
  static bool equal(const Node* a, const Node* b);

  std::shared_ptr<const Node> node_;
};

/// Parses `text` as a complete expression. Throws ExprError with a
/// column-relative message on malformed input.
ParamExpr parse_expr(std::string_view text);

}  // namespace sadeepdecs
