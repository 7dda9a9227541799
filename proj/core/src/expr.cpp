#include "nijkit/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <system_error>

namespace nijkit {

namespace {

bool same_tree(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Constant:
      return a.constant == b.constant;
    case NodeKind::Variable:
      return a.variable == b.variable;
    case NodeKind::Neg:
      return same_tree(*a.lhs, *b.lhs);
    case NodeKind::Pow:
      return a.exponent == b.exponent && same_tree(*a.lhs, *b.lhs);
    case NodeKind::Call:
      return a.builtin == b.builtin && same_tree(*a.lhs, *b.lhs);
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
      return same_tree(*a.lhs, *b.lhs) && same_tree(*a.rhs, *b.rhs);
  }
  return false;
}

std::size_t max_variable(const ExprNode& node, std::size_t current) {
  if (node.kind == NodeKind::Variable) return std::max(current, node.variable + 1);
  if (node.lhs) current = max_variable(*node.lhs, current);
  if (node.rhs) current = max_variable(*node.rhs, current);
  return current;
}

std::optional<Builtin> builtin_from_name(std::string_view name) {
  if (name == "sqrt") return Builtin::Sqrt;
  if (name == "exp") return Builtin::Exp;
  if (name == "sin") return Builtin::Sin;
  if (name == "cos") return Builtin::Cos;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind = Tok::End;
  std::size_t offset = 0;
  std::string_view text;
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    Token t;
    t.offset = pos_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(t);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_')) {
        ++pos_;
      }
      t.kind = Tok::Ident;
      t.text = src_.substr(start, pos_ - start);
      return t;
    }
    ++pos_;
    switch (c) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      default:
        throw ParseError(ParseErrorKind::Lexical, t.offset,
                         std::string("unexpected character '") + c + "'");
    }
    t.text = src_.substr(t.offset, 1);
    return t;
  }

 private:
  Token number(Token t) {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++count;
      }
      return count;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) {
      throw ParseError(ParseErrorKind::Lexical, start, "malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t exp_at = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        throw ParseError(ParseErrorKind::Lexical, exp_at, "malformed exponent in number");
      }
    }
    t.kind = Tok::Number;
    t.text = src_.substr(start, pos_ - start);
    const auto [ptr, ec] =
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size() ||
        !std::isfinite(t.number)) {
      throw ParseError(ParseErrorKind::Lexical, start, "number out of range");
    }
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Parser
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' integer)?
//   atom  := number | ident | ident '(' expr ')' | '(' expr ')'

class Parser {
 public:
  Parser(std::string_view src, std::size_t dim, VariableScheme scheme)
      : lexer_(src), dim_(dim), scheme_(scheme) {
    advance();
  }

  NodePtr parse_all() {
    NodePtr e = expr();
    if (tok_.kind == Tok::RParen) {
      throw ParseError(ParseErrorKind::UnbalancedParentheses, tok_.offset,
                       "unmatched ')'");
    }
    if (tok_.kind != Tok::End) {
      throw ParseError(ParseErrorKind::UnexpectedToken, tok_.offset,
                       "unexpected '" + std::string(tok_.text) + "'");
    }
    return e;
  }

 private:
  void advance() { tok_ = lexer_.next(); }

  NodePtr expr() {
    NodePtr lhs = term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const bool plus = tok_.kind == Tok::Plus;
      advance();
      NodePtr rhs = term();
      lhs = plus ? ast::add(lhs, rhs) : ast::sub(lhs, rhs);
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const bool times = tok_.kind == Tok::Star;
      advance();
      NodePtr rhs = unary();
      lhs = times ? ast::mul(lhs, rhs) : ast::div(lhs, rhs);
    }
    return lhs;
  }

  NodePtr unary() {
    if (tok_.kind == Tok::Minus) {
      advance();
      return ast::neg(unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (tok_.kind != Tok::Caret) return base;
    advance();
    const std::size_t at = tok_.offset;
    bool negative = false;
    if (tok_.kind == Tok::Minus) {
      negative = true;
      advance();
    }
    if (tok_.kind != Tok::Number) {
      throw ParseError(ParseErrorKind::NonIntegerExponent, at,
                       "exponent must be an integer literal (use sqrt for roots)");
    }
    const std::string_view digits = tok_.text;
    const bool integral =
        digits.find_first_not_of("0123456789") == std::string_view::npos;
    if (!integral) {
      throw ParseError(ParseErrorKind::NonIntegerExponent, tok_.offset,
                       "non-integer exponent '" + std::string(digits) +
                           "' (use sqrt for roots)");
    }
    if (tok_.number > kMaxExponent) {
      throw ParseError(ParseErrorKind::ExponentTooLarge, tok_.offset,
                       "exponent magnitude exceeds " + std::to_string(kMaxExponent));
    }
    const int k = static_cast<int>(tok_.number);
    advance();
    return ast::pow(base, negative ? -k : k);
  }

  NodePtr atom() {
    switch (tok_.kind) {
      case Tok::Number: {
        NodePtr c = ast::constant(tok_.number);
        advance();
        return c;
      }
      case Tok::Ident:
        return identifier();
      case Tok::LParen: {
        const std::size_t open = tok_.offset;
        advance();
        NodePtr inner = expr();
        if (tok_.kind != Tok::RParen) {
          throw ParseError(ParseErrorKind::UnbalancedParentheses,
                           tok_.kind == Tok::End ? open : tok_.offset,
                           "missing ')' for '(' at offset " + std::to_string(open));
        }
        advance();
        return inner;
      }
      case Tok::RParen:
        throw ParseError(ParseErrorKind::UnbalancedParentheses, tok_.offset,
                         "unexpected ')'");
      case Tok::End:
        throw ParseError(ParseErrorKind::UnexpectedEnd, tok_.offset,
                         "unexpected end of input");
      default:
        throw ParseError(ParseErrorKind::UnexpectedToken, tok_.offset,
                         "unexpected '" + std::string(tok_.text) + "'");
    }
  }

  NodePtr identifier() {
    const Token id = tok_;
    advance();
    if (auto fn = builtin_from_name(id.text)) {
      if (tok_.kind != Tok::LParen) {
        throw ParseError(ParseErrorKind::UnexpectedToken, tok_.offset,
                         "expected '(' after " + std::string(id.text));
      }
      const std::size_t open = tok_.offset;
      advance();
      NodePtr arg = expr();
      if (tok_.kind != Tok::RParen) {
        throw ParseError(ParseErrorKind::UnbalancedParentheses,
                         tok_.kind == Tok::End ? open : tok_.offset,
                         "missing ')' for '(' at offset " + std::to_string(open));
      }
      advance();
      return ast::call(*fn, arg);
    }
    return ast::variable(variable_index(id));
  }

  std::size_t x_count() const {
    return scheme_ == VariableScheme::WithY ? dim_ - 1 : dim_;
  }

  std::string valid_names() const {
    std::string names;
    for (std::size_t i = 1; i <= x_count(); ++i) {
      if (!names.empty()) names += ", ";
      names += "x" + std::to_string(i);
    }
    if (scheme_ == VariableScheme::WithY) names += names.empty() ? "y" : ", y";
    return names;
  }

  std::size_t variable_index(const Token& id) const {
    const std::string_view name = id.text;
    if (name == "y") {
      if (scheme_ == VariableScheme::WithY) return dim_ - 1;
      throw ParseError(ParseErrorKind::VariableOutOfRange, id.offset,
                       "variable y not available (valid variables: " +
                           valid_names() + ")");
    }
    if (name == "x" && x_count() == 1) return 0;
    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string_view::npos &&
        name[1] != '0') {
      std::size_t index = 0;
      const auto [ptr, ec] =
          std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc() && index >= 1 && index <= x_count()) return index - 1;
      throw ParseError(ParseErrorKind::VariableOutOfRange, id.offset,
                       "variable " + std::string(name) + " out of range for n=" +
                           std::to_string(dim_) + " (valid variables: " +
                           valid_names() + ")");
    }
    throw ParseError(ParseErrorKind::UnknownIdentifier, id.offset,
                     "unknown identifier '" + std::string(name) + "'");
  }

  Lexer lexer_;
  Token tok_;
  std::size_t dim_;
  VariableScheme scheme_;
};

NodePtr make_node(ExprNode node) { return std::make_shared<const ExprNode>(std::move(node)); }

// ---------------------------------------------------------------------------
// Evaluation

template <class T, class Leaf, class Apply>
T fold(const ExprNode& node, const Leaf& leaf, const Apply& apply) {
  switch (node.kind) {
    case NodeKind::Constant:
    case NodeKind::Variable:
      return leaf(node);
    case NodeKind::Add:
      return fold<T>(*node.lhs, leaf, apply) + fold<T>(*node.rhs, leaf, apply);
    case NodeKind::Sub:
      return fold<T>(*node.lhs, leaf, apply) - fold<T>(*node.rhs, leaf, apply);
    case NodeKind::Mul:
      return fold<T>(*node.lhs, leaf, apply) * fold<T>(*node.rhs, leaf, apply);
    case NodeKind::Div:
      return apply.divide(fold<T>(*node.lhs, leaf, apply),
                          fold<T>(*node.rhs, leaf, apply));
    case NodeKind::Neg:
      return -fold<T>(*node.lhs, leaf, apply);
    case NodeKind::Pow:
      return apply.power(fold<T>(*node.lhs, leaf, apply), node.exponent);
    case NodeKind::Call:
      return apply.call(node.builtin, fold<T>(*node.lhs, leaf, apply));
  }
  throw Error("corrupt expression node");
}

struct JetOps {
  Jet2 divide(const Jet2& a, const Jet2& b) const { return a / b; }
  Jet2 power(const Jet2& a, int k) const { return pow(a, k); }
  Jet2 call(Builtin fn, const Jet2& a) const {
    switch (fn) {
      case Builtin::Sqrt: return sqrt(a);
      case Builtin::Exp: return exp(a);
      case Builtin::Sin: return sin(a);
      case Builtin::Cos: return cos(a);
    }
    throw Error("unknown builtin");
  }
};

struct ValueOps {
  double divide(double a, double b) const { return a / b; }
  double power(double a, int k) const {
    if (k < 0) return 1.0 / ipow(a, -k);
    return ipow(a, k);
  }
  double call(Builtin fn, double a) const {
    switch (fn) {
      case Builtin::Sqrt: return std::sqrt(a);
      case Builtin::Exp: return std::exp(a);
      case Builtin::Sin: return std::sin(a);
      case Builtin::Cos: return std::cos(a);
    }
    throw Error("unknown builtin");
  }
};

void check_point(const Expr& e, std::span<const double> p) {
  if (p.size() != e.dim()) {
    throw DimensionError("expression of dimension " + std::to_string(e.dim()) +
                         " evaluated at a point of dimension " +
                         std::to_string(p.size()));
  }
}

void format_node(const ExprNode& node, const Expr& e, std::string& out) {
  auto binary = [&](char op) {
    out += '(';
    format_node(*node.lhs, e, out);
    out += op;
    format_node(*node.rhs, e, out);
    out += ')';
  };
  switch (node.kind) {
    case NodeKind::Constant: {
      char buf[64];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, node.constant);
      out.append(buf, ptr);
      return;
    }
    case NodeKind::Variable:
      if (e.scheme() == VariableScheme::WithY && node.variable + 1 == e.dim()) {
        out += 'y';
      } else {
        out += 'x' + std::to_string(node.variable + 1);
      }
      return;
    case NodeKind::Add: binary('+'); return;
    case NodeKind::Sub: binary('-'); return;
    case NodeKind::Mul: binary('*'); return;
    case NodeKind::Div: binary('/'); return;
    case NodeKind::Neg:
      out += "(-";
      format_node(*node.lhs, e, out);
      out += ')';
      return;
    case NodeKind::Pow:
      out += '(';
      format_node(*node.lhs, e, out);
      out += '^';
      out += std::to_string(node.exponent);
      out += ')';
      return;
    case NodeKind::Call:
      out += builtin_name(node.builtin);
      out += '(';
      format_node(*node.lhs, e, out);
      out += ')';
      return;
  }
}

}  // namespace

Expr::Expr(NodePtr root, std::size_t dim, VariableScheme scheme)
    : root_(std::move(root)), dim_(dim), scheme_(scheme) {
  if (!root_) throw InvalidArgument("empty expression");
  if (max_variable(*root_, 0) > dim_) {
    throw DimensionError("expression references a variable beyond dimension " +
                         std::to_string(dim_));
  }
}

bool operator==(const Expr& a, const Expr& b) {
  return a.dim_ == b.dim_ && a.scheme_ == b.scheme_ && same_tree(*a.root_, *b.root_);
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what)
    : Error("parse error at offset " + std::to_string(offset) + ": " + what),
      kind_(kind),
      offset_(offset) {}

Expr parse(std::string_view text, std::size_t n) {
  if (n < 2) throw InvalidArgument("expressions in x1..x(n-1), y need n >= 2");
  return Expr(Parser(text, n, VariableScheme::WithY).parse_all(), n,
              VariableScheme::WithY);
}

Expr parse_x_only(std::string_view text, std::size_t m) {
  if (m < 1) throw InvalidArgument("expressions in x1..xm need m >= 1");
  return Expr(Parser(text, m, VariableScheme::XOnly).parse_all(), m,
              VariableScheme::XOnly);
}

Jet2 eval(const Expr& e, std::span<const double> p) {
  check_point(e, p);
  const auto leaf = [&](const ExprNode& node) {
    return node.kind == NodeKind::Constant ? Jet2::constant(node.constant, p.size())
                                           : Jet2::coordinate(node.variable, p);
  };
  return fold<Jet2>(e.root(), leaf, JetOps{});
}

double eval_value(const Expr& e, std::span<const double> p) {
  check_point(e, p);
  const auto leaf = [&](const ExprNode& node) {
    return node.kind == NodeKind::Constant ? node.constant : p[node.variable];
  };
  return fold<double>(e.root(), leaf, ValueOps{});
}

std::string format(const Expr& e) {
  std::string out;
  format_node(e.root(), e, out);
  return out;
}

std::string_view builtin_name(Builtin b) noexcept {
  switch (b) {
    case Builtin::Sqrt: return "sqrt";
    case Builtin::Exp: return "exp";
    case Builtin::Sin: return "sin";
    case Builtin::Cos: return "cos";
  }
  return "?";
}

namespace ast {

NodePtr constant(double value) {
  if (!std::isfinite(value) || std::signbit(value)) {
    throw InvalidArgument("literal constants must be finite and non-negative");
  }
  ExprNode n;
  n.kind = NodeKind::Constant;
  n.constant = value;
  return make_node(std::move(n));
}

NodePtr variable(std::size_t index) {
  ExprNode n;
  n.kind = NodeKind::Variable;
  n.variable = index;
  return make_node(std::move(n));
}

namespace {
NodePtr binary(NodeKind kind, NodePtr a, NodePtr b) {
  if (!a || !b) throw InvalidArgument("null operand");
  ExprNode n;
  n.kind = kind;
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return make_node(std::move(n));
}
}  // namespace

NodePtr add(NodePtr a, NodePtr b) { return binary(NodeKind::Add, std::move(a), std::move(b)); }
NodePtr sub(NodePtr a, NodePtr b) { return binary(NodeKind::Sub, std::move(a), std::move(b)); }
NodePtr mul(NodePtr a, NodePtr b) { return binary(NodeKind::Mul, std::move(a), std::move(b)); }
NodePtr div(NodePtr a, NodePtr b) { return binary(NodeKind::Div, std::move(a), std::move(b)); }

NodePtr neg(NodePtr a) {
  if (!a) throw InvalidArgument("null operand");
  ExprNode n;
  n.kind = NodeKind::Neg;
  n.lhs = std::move(a);
  return make_node(std::move(n));
}

NodePtr pow(NodePtr a, int exponent) {
  if (!a) throw InvalidArgument("null operand");
  if (exponent > kMaxExponent || exponent < -kMaxExponent) {
    throw InvalidArgument("exponent magnitude exceeds " + std::to_string(kMaxExponent));
  }
  ExprNode n;
  n.kind = NodeKind::Pow;
  n.exponent = exponent;
  n.lhs = std::move(a);
  return make_node(std::move(n));
}

NodePtr call(Builtin fn, NodePtr a) {
  if (!a) throw InvalidArgument("null operand");
  ExprNode n;
  n.kind = NodeKind::Call;
  n.builtin = fn;
  n.lhs = std::move(a);
  return make_node(std::move(n));
}

}  // namespace ast

}  // namespace nijkit
