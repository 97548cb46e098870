#include "sadeepdecs/expr.hpp"

#include <cctype>
#include <cmath>

#include "sadeepdecs/text_io.hpp"

namespace sadeepdecs {

ParamExpr::ParamExpr() : node_(std::make_shared<const Node>()) {}

ParamExpr ParamExpr::literal(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Literal;
  n->value = value;
  return ParamExpr(std::move(n));
}

ParamExpr ParamExpr::param(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Param;
  n->name = std::move(name);
  return ParamExpr(std::move(n));
}

ParamExpr ParamExpr::binary(Kind kind, const ParamExpr& a, const ParamExpr& b) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = a.node_;
  n->rhs = b.node_;
  return ParamExpr(std::move(n));
}

ParamExpr operator+(const ParamExpr& a, const ParamExpr& b) {
  return ParamExpr::binary(ParamExpr::Kind::Add, a, b);
}
ParamExpr operator-(const ParamExpr& a, const ParamExpr& b) {
  return ParamExpr::binary(ParamExpr::Kind::Sub, a, b);
}
ParamExpr operator*(const ParamExpr& a, const ParamExpr& b) {
  return ParamExpr::binary(ParamExpr::Kind::Mul, a, b);
}

double ParamExpr::evaluate(const Valuation& values) const {
  switch (node_->kind) {
    case Kind::Literal:
      return node_->value;
    case Kind::Param: {
      auto it = values.find(node_->name);
      if (it == values.end()) throw ExprError("no value for parameter '" + node_->name + "'");
      return it->second;
    }
    case Kind::Add:
      return lhs().evaluate(values) + rhs().evaluate(values);
    case Kind::Sub:
      return lhs().evaluate(values) - rhs().evaluate(values);
    case Kind::Mul:
      return lhs().evaluate(values) * rhs().evaluate(values);
  }
  return 0.0;
}

void ParamExpr::collect_params(std::set<std::string>& out) const {
  if (node_->kind == Kind::Param) {
    out.insert(node_->name);
  } else if (node_->kind != Kind::Literal) {
    lhs().collect_params(out);
    rhs().collect_params(out);
  }
}

namespace {

int precedence(ParamExpr::Kind k) {
  switch (k) {
    case ParamExpr::Kind::Add:
    case ParamExpr::Kind::Sub:
      return 1;
    case ParamExpr::Kind::Mul:
      return 2;
    default:
      return 3;
  }
}

void render(const ParamExpr& e, std::string& out) {
  using K = ParamExpr::Kind;
  switch (e.kind()) {
    case K::Literal:
      out += format_double(e.value());
      return;
    case K::Param:
      out += e.name();
      return;
    default:
      break;
  }
  const int p = precedence(e.kind());
  const ParamExpr l = e.lhs();
  const ParamExpr r = e.rhs();
  // operators are left-associative, so a same-precedence right child needs parens
  const bool paren_l = precedence(l.kind()) < p;
  const bool paren_r = precedence(r.kind()) <= p;
  if (paren_l) out += '(';
  render(l, out);
  if (paren_l) out += ')';
  out += e.kind() == K::Add ? " + " : e.kind() == K::Sub ? " - " : " * ";
  if (paren_r) out += '(';
  render(r, out);
  if (paren_r) out += ')';
}

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  ParamExpr parse_all() {
    ParamExpr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  ParamExpr parse_sum() {
    ParamExpr e = parse_product();
    while (true) {
      skip_ws();
      if (accept('+')) {
        e = e + parse_product();
      } else if (accept('-')) {
        e = e - parse_product();
      } else {
        return e;
      }
    }
  }

  ParamExpr parse_product() {
    ParamExpr e = parse_atom();
    while (true) {
      skip_ws();
      if (!accept('*')) return e;
      e = e * parse_atom();
    }
  }

  ParamExpr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ParamExpr e = parse_sum();
      skip_ws();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    const bool signed_number = c == '-' && pos_ + 1 < text_.size() &&
                               (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                                text_[pos_ + 1] == '.');
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || signed_number) {
      const std::size_t start = pos_;
      if (signed_number) ++pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
              text_[pos_] == 'e' || text_[pos_] == 'E' ||
              ((text_[pos_] == '-' || text_[pos_] == '+') &&
               (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
        ++pos_;
      try {
        return ParamExpr::literal(parse_double(text_.substr(start, pos_ - start)));
      } catch (const std::invalid_argument&) {
        fail("malformed number '" + std::string(text_.substr(start, pos_ - start)) + "'");
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      return ParamExpr::param(std::string(text_.substr(start, pos_ - start)));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ExprError(what + " at column " + std::to_string(pos_ + 1));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string ParamExpr::to_string() const {
  std::string out;
  render(*this, out);
  return out;
}

bool ParamExpr::equal(const Node* a, const Node* b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::Literal:
      return a->value == b->value;
    case Kind::Param:
      return a->name == b->name;
    default:
      return equal(a->lhs.get(), b->lhs.get()) && equal(a->rhs.get(), b->rhs.get());
  }
}

bool operator==(const ParamExpr& a, const ParamExpr& b) {
  return ParamExpr::equal(a.node_.get(), b.node_.get());
}

ParamExpr parse_expr(std::string_view text) { return ExprParser(text).parse_all(); }

}  // namespace sadeepdecs
