#include "hhcert/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hhcert/errors.hpp"

namespace hhcert::funcspace {
namespace {

constexpr int kMaxDepth = 200;

enum class TokenKind { Number, Identifier, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  TokenKind kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

std::string describe(const Token& tok) {
  switch (tok.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::Number: return "number '" + std::string(tok.text) + "'";
    case TokenKind::Identifier: return "identifier '" + std::string(tok.text) + "'";
    default: return "'" + std::string(tok.text) + "'";
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

[[noreturn]] void syntax_error(const Token& got, std::vector<std::string> expected) {
  throw ParseError("syntax error at offset " + std::to_string(got.offset) + ": got " +
                       describe(got) + ", expected one of {" + join(expected) + "}",
                   got.offset, std::move(expected));
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < src.size()) {
    const unsigned char ch = static_cast<unsigned char>(src[i]);
    if (std::isspace(ch)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(ch) || ch == '.') {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      const std::size_t mantissa_end = i;
      if (mantissa_end - start == 1 && src[start] == '.') {
        throw ParseError("malformed number at offset " + std::to_string(start), start,
                         {"digit"});
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
          i = j;
        } else {
          throw ParseError("malformed exponent at offset " + std::to_string(i), j,
                           {"digit"});
        }
      }
      const std::string_view text = src.substr(start, i - start);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw ParseError("numeric literal '" + std::string(text) + "' at offset " +
                             std::to_string(start) + " is not representable",
                         start, {"finite number"});
      }
      tokens.push_back({TokenKind::Number, start, text, value});
      continue;
    }
    if (std::isalpha(ch) || ch == '_') {
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      tokens.push_back({TokenKind::Identifier, start, src.substr(start, i - start)});
      continue;
    }
    TokenKind kind;
    switch (ch) {
      case '+': kind = TokenKind::Plus; break;
      case '-': kind = TokenKind::Minus; break;
      case '*': kind = TokenKind::Star; break;
      case '/': kind = TokenKind::Slash; break;
      case '^': kind = TokenKind::Caret; break;
      case '(': kind = TokenKind::LParen; break;
      case ')': kind = TokenKind::RParen; break;
      case ',': kind = TokenKind::Comma; break;
      default:
        throw ParseError("unexpected character at offset " + std::to_string(start), start,
                         {"number", "identifier", "operator", "parenthesis"});
    }
    ++i;
    tokens.push_back({kind, start, src.substr(start, 1)});
  }
  tokens.push_back({TokenKind::End, src.size(), {}});
  return tokens;
}

// Binding powers. Unary minus parses its operand at kUnaryPower, so only '^'
// (left power 40) can bind inside it.
constexpr int kUnaryPower = 30;

struct InfixPower {
  int left;
  int right;
};

bool infix_power(TokenKind kind, InfixPower& out) {
  switch (kind) {
    case TokenKind::Plus:
    case TokenKind::Minus: out = {10, 11}; return true;
    case TokenKind::Star:
    case TokenKind::Slash: out = {20, 21}; return true;
    case TokenKind::Caret: out = {40, 39}; return true;
    default: return false;
  }
}

NodeKind infix_node(TokenKind kind) {
  switch (kind) {
    case TokenKind::Plus: return NodeKind::Add;
    case TokenKind::Minus: return NodeKind::Subtract;
    case TokenKind::Star: return NodeKind::Multiply;
    case TokenKind::Slash: return NodeKind::Divide;
    default: return NodeKind::Power;
  }
}

bool lookup_function(std::string_view name, Function& fn) {
  static constexpr std::pair<std::string_view, Function> table[] = {
      {"exp", Function::Exp},   {"log", Function::Log}, {"sin", Function::Sin},
      {"cos", Function::Cos},   {"sqrt", Function::Sqrt}, {"abs", Function::Abs},
      {"pow", Function::Pow}};
  for (const auto& [key, value] : table) {
    if (key == name) {
      fn = value;
      return true;
    }
  }
  return false;
}

std::size_t arity(Function fn) { return fn == Function::Pow ? 2 : 1; }

std::shared_ptr<ExprNode> make_node(NodeKind kind, std::vector<ExprPtr> children = {}) {
  auto node = std::make_shared<ExprNode>();
  node->kind = kind;
  node->children = std::move(children);
  return node;
}

class Parser {
 public:
  Parser(std::string_view src, VariableSet vars) : tokens_(tokenize(src)), vars_(vars) {}

  ExprPtr parse_all() {
    ExprPtr e = parse(0, 0);
    if (peek().kind != TokenKind::End) {
      syntax_error(peek(), {"operator", "end of input"});
    }
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  ExprPtr parse(int min_power, int depth) {
    if (depth > kMaxDepth) {
      throw ParseError("expression nested too deeply at offset " +
                           std::to_string(peek().offset),
                       peek().offset, {});
    }
    ExprPtr lhs = parse_prefix(depth);
    for (;;) {
      const Token& op = peek();
      InfixPower power{};
      if (!infix_power(op.kind, power)) {
        if (op.kind == TokenKind::End || op.kind == TokenKind::RParen ||
            op.kind == TokenKind::Comma) {
          return lhs;
        }
        syntax_error(op, {"'+'", "'-'", "'*'", "'/'", "'^'", "')'", "end of input"});
      }
      if (power.left < min_power) return lhs;
      next();
      ExprPtr rhs = parse(power.right, depth + 1);
      lhs = make_node(infix_node(op.kind), {std::move(lhs), std::move(rhs)});
    }
  }

  ExprPtr parse_prefix(int depth) {
    const Token& tok = next();
    switch (tok.kind) {
      case TokenKind::Number: {
        auto node = std::make_shared<ExprNode>();
        node->kind = NodeKind::Number;
        node->number = tok.number;
        return node;
      }
      case TokenKind::Minus:
        return make_node(NodeKind::Negate, {parse(kUnaryPower, depth + 1)});
      case TokenKind::LParen: {
        ExprPtr inner = parse(0, depth + 1);
        if (peek().kind != TokenKind::RParen) syntax_error(peek(), {"')'"});
        next();
        return inner;
      }
      case TokenKind::Identifier:
        return parse_identifier(tok, depth);
      default:
        --pos_;
        syntax_error(tok, {"number", "identifier", "'('", "'-'"});
    }
  }

  ExprPtr parse_identifier(const Token& tok, int depth) {
    const int var = variable_index(tok.text);
    if (var >= 0) {
      auto node = std::make_shared<ExprNode>();
      node->kind = NodeKind::Variable;
      node->variable = var;
      return node;
    }
    Function fn{};
    if (!lookup_function(tok.text, fn)) {
      throw UnknownIdentifierError(std::string(tok.text), tok.offset);
    }
    if (peek().kind != TokenKind::LParen) syntax_error(peek(), {"'('"});
    next();
    std::vector<ExprPtr> args;
    args.push_back(parse(0, depth + 1));
    while (peek().kind == TokenKind::Comma) {
      next();
      args.push_back(parse(0, depth + 1));
    }
    if (peek().kind != TokenKind::RParen) syntax_error(peek(), {"','", "')'"});
    const Token& close = next();
    if (args.size() != arity(fn)) {
      throw ParseError(std::string(to_string(fn)) + " expects " +
                           std::to_string(arity(fn)) + " argument(s), got " +
                           std::to_string(args.size()) + " at offset " +
                           std::to_string(tok.offset),
                       close.offset, {});
    }
    auto node = make_node(NodeKind::Call, std::move(args));
    node->function = fn;
    return node;
  }

  int variable_index(std::string_view name) const {
    if (vars_ == VariableSet::Bivariate) {
      if (name == "x") return 0;
      if (name == "y") return 1;
      return -1;
    }
    return (name == "t" || name == "x") ? 0 : -1;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  VariableSet vars_;
};

// Printing precedence: larger binds tighter.
int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Subtract: return 1;
    case NodeKind::Multiply:
    case NodeKind::Divide: return 2;
    case NodeKind::Negate: return 3;
    case NodeKind::Power: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void render(const ExprNode& n, VariableSet vars, std::string& out);

void render_child(const ExprNode& child, int min_prec, VariableSet vars, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    render(child, vars, out);
    out += ')';
  } else {
    render(child, vars, out);
  }
}

void render(const ExprNode& n, VariableSet vars, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number: out += format_number(n.number); return;
    case NodeKind::Variable:
      out += vars == VariableSet::Univariate ? "t" : (n.variable == 0 ? "x" : "y");
      return;
    case NodeKind::Negate:
      out += '-';
      render_child(*n.children[0], 3, vars, out);
      return;
    case NodeKind::Call:
      out += to_string(n.function);
      out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        render(*n.children[i], vars, out);
      }
      out += ')';
      return;
    case NodeKind::Power:
      render_child(*n.children[0], 5, vars, out);
      out += '^';
      render_child(*n.children[1], 3, vars, out);
      return;
    default: {
      const int p = precedence(n);
      const char* op = n.kind == NodeKind::Add        ? " + "
                       : n.kind == NodeKind::Subtract ? " - "
                       : n.kind == NodeKind::Multiply ? "*"
                                                      : "/";
      render_child(*n.children[0], p, vars, out);
      out += op;
      render_child(*n.children[1], p + 1, vars, out);
    }
  }
}

std::string render(const ExprNode& n, VariableSet vars) {
  std::string s;
  render(n, vars, s);
  return s;
}

[[noreturn]] void domain_failure(const ExprNode& n, VariableSet vars, const std::string& why) {
  throw DomainError(why + " in subexpression '" + render(n, vars) + "'");
}

double eval(const ExprNode& n, VariableSet vars, double x, double y) {
  auto arg = [&](std::size_t i) { return eval(*n.children[i], vars, x, y); };
  double r = 0.0;
  switch (n.kind) {
    case NodeKind::Number: return n.number;
    case NodeKind::Variable: return n.variable == 0 ? x : y;
    case NodeKind::Negate: return -arg(0);
    case NodeKind::Add: r = arg(0) + arg(1); break;
    case NodeKind::Subtract: r = arg(0) - arg(1); break;
    case NodeKind::Multiply: r = arg(0) * arg(1); break;
    case NodeKind::Divide: {
      const double num = arg(0);
      const double den = arg(1);
      if (den == 0.0) domain_failure(n, vars, "division by zero");
      r = num / den;
      break;
    }
    case NodeKind::Power: {
      const double base = arg(0);
      const double ex = arg(1);
      if (base == 0.0 && ex < 0.0) domain_failure(n, vars, "zero raised to a negative power");
      r = std::pow(base, ex);
      if (std::isnan(r)) domain_failure(n, vars, "negative base with non-integer exponent");
      break;
    }
    case NodeKind::Call: {
      const double v = arg(0);
      switch (n.function) {
        case Function::Exp: r = std::exp(v); break;
        case Function::Log:
          if (!(v > 0.0)) domain_failure(n, vars, "logarithm of non-positive value");
          r = std::log(v);
          break;
        case Function::Sin: r = std::sin(v); break;
        case Function::Cos: r = std::cos(v); break;
        case Function::Sqrt:
          if (v < 0.0) domain_failure(n, vars, "square root of negative value");
          r = std::sqrt(v);
          break;
        case Function::Abs: r = std::abs(v); break;
        case Function::Pow: {
          const double ex = arg(1);
          if (v == 0.0 && ex < 0.0) domain_failure(n, vars, "zero raised to a negative power");
          r = std::pow(v, ex);
          if (std::isnan(r)) domain_failure(n, vars, "negative base with non-integer exponent");
          break;
        }
      }
      break;
    }
  }
  if (!std::isfinite(r)) domain_failure(n, vars, "non-finite result");
  return r;
}

bool any_node(const ExprNode& n, const auto& pred) {
  if (pred(n)) return true;
  for (const ExprPtr& c : n.children) {
    if (any_node(*c, pred)) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(Function fn) {
  switch (fn) {
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Sqrt: return "sqrt";
    case Function::Abs: return "abs";
    case Function::Pow: return "pow";
  }
  return "?";
}

Expression Expression::parse(std::string_view src, VariableSet vars) {
  if (src.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ParseError("empty expression", 0, {"number", "identifier", "'('", "'-'"});
  }
  Parser parser(src, vars);
  return Expression(parser.parse_all(), vars);
}

Expression Expression::number(double v) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::Number;
  node->number = v;
  return Expression(node, VariableSet::Bivariate);
}

Expression Expression::variable(int index, VariableSet vars) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::Variable;
  node->variable = index;
  return Expression(node, vars);
}

Expression Expression::negate(const Expression& e) {
  return Expression(make_node(NodeKind::Negate, {e.root_}), e.vars_);
}

Expression Expression::binary(NodeKind kind, const Expression& lhs, const Expression& rhs) {
  return Expression(make_node(kind, {lhs.root_, rhs.root_}), lhs.vars_);
}

Expression Expression::call(Function fn, std::vector<Expression> args) {
  std::vector<ExprPtr> children;
  for (const Expression& a : args) children.push_back(a.root_);
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::Call;
  node->function = fn;
  node->children = std::move(children);
  return Expression(node, args.empty() ? VariableSet::Bivariate : args.front().vars_);
}

double Expression::evaluate(double x, double y) const { return eval(*root_, vars_, x, y); }

std::string Expression::to_string() const { return render(*root_, vars_); }

bool Expression::uses_function(Function fn) const {
  return any_node(*root_, [fn](const ExprNode& n) {
    return n.kind == NodeKind::Call && n.function == fn;
  });
}

bool Expression::uses_variable(int index) const {
  return any_node(*root_, [index](const ExprNode& n) {
    return n.kind == NodeKind::Variable && n.variable == index;
  });
}

bool structurally_equal(const ExprNode& lhs, const ExprNode& rhs) {
  if (lhs.kind != rhs.kind || lhs.children.size() != rhs.children.size()) return false;
  switch (lhs.kind) {
    case NodeKind::Number:
      if (!(lhs.number == rhs.number)) return false;
      break;
    case NodeKind::Variable:
      if (lhs.variable != rhs.variable) return false;
      break;
    case NodeKind::Call:
      if (lhs.function != rhs.function) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < lhs.children.size(); ++i) {
    if (!structurally_equal(*lhs.children[i], *rhs.children[i])) return false;
  }
  return true;
}

bool operator==(const Expression& lhs, const Expression& rhs) {
  return structurally_equal(*lhs.root_, *rhs.root_);
}

}  // namespace hhcert::funcspace
