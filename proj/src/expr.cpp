#include "singulib/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

namespace singulib {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::DivisionByZero: return "division by zero";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Classification: return "classification";
    case ErrorKind::HypothesisViolated: return "hypothesis violated";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

namespace {

NodePtr make_node(NodeKind kind, std::size_t offset, double value = 0.0, NodePtr lhs = nullptr,
                  NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->value = value;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->offset = offset;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    auto root = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) {
      if (src_[pos_] == ')') throw ParseError(pos_, "unbalanced parenthesis");
      throw ParseError(pos_, std::string("unexpected character '") + src_[pos_] + "'");
    }
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  NodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c != '+' && c != '-') break;
      std::size_t at = pos_++;
      auto rhs = parse_term();
      lhs = make_node(c == '+' ? NodeKind::Add : NodeKind::Sub, at, 0.0, lhs, rhs);
    }
    return lhs;
  }

  NodePtr parse_term() {
    auto lhs = parse_factor();
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c != '*' && c != '/') break;
      std::size_t at = pos_++;
      auto rhs = parse_factor();
      lhs = make_node(c == '*' ? NodeKind::Mul : NodeKind::Div, at, 0.0, lhs, rhs);
    }
    return lhs;
  }

  NodePtr parse_factor() {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '-') {
      std::size_t at = pos_++;
      auto operand = parse_factor();
      return make_node(NodeKind::Sub, at, 0.0, make_node(NodeKind::Constant, at, 0.0), operand);
    }
    auto base = parse_atom();
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '^') {
      std::size_t at = pos_++;
      skip_ws();
      std::size_t num_at = pos_;
      bool negative = false;
      if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) {
        negative = src_[pos_] == '-';
        ++pos_;
      }
      if (pos_ >= src_.size() ||
          !(std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
        throw ParseError(num_at, "exponent must be a numeric constant");
      }
      double p = parse_number_literal();
      return make_node(NodeKind::Pow, at, negative ? -p : p, base);
    }
    return base;
  }

  double parse_number_literal() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_) throw ParseError(start, "malformed number");
    return value;
  }

  NodePtr parse_call(NodeKind kind, std::size_t at) {
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != '(')
      throw ParseError(pos_, "expected '(' after function name");
    ++pos_;
    auto arg = parse_expr();
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != ')') throw ParseError(pos_, "unbalanced parenthesis");
    ++pos_;
    return make_node(kind, at, 0.0, arg);
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
    char c = src_[pos_];
    std::size_t at = pos_;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return make_node(NodeKind::Constant, at, parse_number_literal());
    }
    if (c == '(') {
      ++pos_;
      auto inner = parse_expr();
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != ')') throw ParseError(pos_, "unbalanced parenthesis");
      ++pos_;
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string_view ident = src_.substr(at, pos_ - at);
      if (ident == "s") return make_node(NodeKind::Variable, at);
      if (ident == "exp") return parse_call(NodeKind::Exp, at);
      if (ident == "log") return parse_call(NodeKind::Log, at);
      throw ParseError(at, "unknown identifier '" + std::string(ident) + "'");
    }
    if (c == ')') throw ParseError(at, "unbalanced parenthesis");
    throw ParseError(at, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.lhs, out);
    out += op;
    print_node(*n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case NodeKind::Constant:
      if (n.value < 0) {
        out += "(0 - " + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      break;
    case NodeKind::Variable: out += 's'; break;
    case NodeKind::Add: binary(" + "); break;
    case NodeKind::Sub: binary(" - "); break;
    case NodeKind::Mul: binary(" * "); break;
    case NodeKind::Div: binary(" / "); break;
    case NodeKind::Pow:
      if (n.lhs->kind == NodeKind::Pow || (n.lhs->kind == NodeKind::Constant && n.lhs->value < 0)) {
        out += '(';
        print_node(*n.lhs, out);
        out += ')';
      } else {
        print_node(*n.lhs, out);
      }
      out += '^';
      out += format_number(n.value);
      break;
    case NodeKind::Exp:
    case NodeKind::Log:
      out += n.kind == NodeKind::Exp ? "exp(" : "log(";
      print_node(*n.lhs, out);
      out += ')';
      break;
  }
}

bool contains_log_node(const Node* n) {
  if (!n) return false;
  if (n->kind == NodeKind::Log) return true;
  return contains_log_node(n->lhs.get()) || contains_log_node(n->rhs.get());
}

bool same_node(const Node* a, const Node* b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  if ((a->kind == NodeKind::Constant || a->kind == NodeKind::Pow) && a->value != b->value) return false;
  return same_node(a->lhs.get(), b->lhs.get()) && same_node(a->rhs.get(), b->rhs.get());
}

template <class T>
T eval_node(const Node& n, T s) {
  using std::exp;
  using std::log;
  using std::pow;
  switch (n.kind) {
    case NodeKind::Constant: return static_cast<T>(n.value);
    case NodeKind::Variable: return s;
    case NodeKind::Add: return eval_node(*n.lhs, s) + eval_node(*n.rhs, s);
    case NodeKind::Sub: return eval_node(*n.lhs, s) - eval_node(*n.rhs, s);
    case NodeKind::Mul: return eval_node(*n.lhs, s) * eval_node(*n.rhs, s);
    case NodeKind::Div: return eval_node(*n.lhs, s) / eval_node(*n.rhs, s);
    case NodeKind::Pow: {
      T base = eval_node(*n.lhs, s);
      if (n.value == 2.0) return base * base;
      return pow(base, static_cast<T>(n.value));
    }
    case NodeKind::Exp: return exp(eval_node(*n.lhs, s));
    case NodeKind::Log: return log(eval_node(*n.lhs, s));
  }
  return T(0);
}

struct JetEvaluator {
  int order;
  double s;
  std::optional<EvalError> error;

  void fail(ErrorKind kind, const Node& n, std::string msg) {
    if (!error) error = EvalError{kind, n.offset, std::move(msg)};
  }

  Jet checked(Jet j, const Node& n) {
    if (!error && !j.all_finite()) fail(ErrorKind::Overflow, n, "non-finite value during evaluation");
    return j;
  }

  Jet run(const Node& n) {
    if (error) return Jet(order);
    switch (n.kind) {
      case NodeKind::Constant: return Jet::constant(n.value, order);
      case NodeKind::Variable: return Jet::variable(s, order);
      case NodeKind::Add: return checked(run(*n.lhs) + run(*n.rhs), n);
      case NodeKind::Sub: return checked(run(*n.lhs) - run(*n.rhs), n);
      case NodeKind::Mul: return checked(run(*n.lhs) * run(*n.rhs), n);
      case NodeKind::Div: {
        Jet num = run(*n.lhs);
        Jet den = run(*n.rhs);
        if (error) return Jet(order);
        if (den.value() == 0.0) {
          fail(ErrorKind::DivisionByZero, n, "division by zero");
          return Jet(order);
        }
        return checked(num / den, n);
      }
      case NodeKind::Pow: {
        Jet base = run(*n.lhs);
        if (error) return Jet(order);
        double p = n.value;
        bool integral = std::floor(p) == p;
        if (base.value() == 0.0) {
          if (integral && p >= 0) {
            Jet acc = Jet::constant(1.0, order);
            for (int i = 0; i < static_cast<int>(p); ++i) acc = acc * base;
            return checked(acc, n);
          }
          fail(ErrorKind::DivisionByZero, n, "zero base with negative or fractional exponent");
          return Jet(order);
        }
        if (base.value() < 0.0 && !integral) {
          fail(ErrorKind::Domain, n, "negative base with fractional exponent");
          return Jet(order);
        }
        return checked(pow(base, p), n);
      }
      case NodeKind::Exp: return checked(exp(run(*n.lhs)), n);
      case NodeKind::Log: {
        Jet arg = run(*n.lhs);
        if (error) return Jet(order);
        if (!(arg.value() > 0.0)) {
          fail(ErrorKind::Domain, n, "log of non-positive value");
          return Jet(order);
        }
        return checked(log(arg), n);
      }
    }
    return Jet(order);
  }
};

}  // namespace

std::string Expression::print() const {
  std::string out;
  if (root_) print_node(*root_, out);
  return out;
}

bool Expression::contains_log() const { return contains_log_node(root_.get()); }

Expression parse(std::string_view source) {
  Parser p(source);
  return Expression(p.parse_all());
}

bool same_tree(const Expression& a, const Expression& b) {
  return same_node(a.root().get(), b.root().get());
}

std::variant<Jet, EvalError> try_eval_jet(const Expression& expr, double s, int order) {
  if (expr.empty()) return EvalError{ErrorKind::InvalidArgument, 0, "empty expression"};
  if (order < 0 || order > Jet::kMaxOrder)
    return EvalError{ErrorKind::InvalidArgument, 0, "jet order must be in [0, 8]"};
  JetEvaluator ev{order, s, std::nullopt};
  Jet out = ev.run(*expr.root());
  if (ev.error) return *ev.error;
  return out;
}

Jet eval_jet(const Expression& expr, double s, int order) {
  auto result = try_eval_jet(expr, s, order);
  if (auto* err = std::get_if<EvalError>(&result)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", s);
    throw Error(err->kind, "evaluating a(s) at s = " + std::string(buf) + ": " + err->message +
                               " (offset " + std::to_string(err->offset) + ")");
  }
  return std::get<Jet>(result);
}

double eval(const Expression& expr, double s) { return eval_node<double>(*expr.root(), s); }

long double eval(const Expression& expr, long double s) {
  return eval_node<long double>(*expr.root(), s);
}

}  // namespace singulib
