#ifndef SFVM_EXPRESSION_HPP_
#define SFVM_EXPRESSION_HPP_

// Small arithmetic expression language for user-defined coefficients.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Variables are t, x, u (spacetime coordinates and state). Constants: pi, e.
// Functions: sin cos tan exp log sqrt abs sign tanh step min max.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfvm/errors.hpp"

namespace sfvm {

enum class Var { T = 0, X = 1, U = 2 };

class Expression {
 public:
  Expression() : node_(constant_node(0.0)) {}
  explicit Expression(double c) : node_(constant_node(c)) {}

  static Expression parse(std::string_view text) {
    Parser p{text, 0};
    Expression out(p.parse_expr());
    p.skip_space();
    if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
    return out;
  }

  static Expression variable(Var v) { return Expression(std::make_shared<Node>(Node{Kind::Variable, 0.0, v, {}, {}})); }

  double operator()(double t, double x, double u) const {
    const double vars[3] = {t, x, u};
    return eval(*node_, vars);
  }

  Expression derivative(Var v) const { return Expression(diff(node_, v)); }

  bool depends_on(Var v) const { return depends(*node_, v); }
  bool is_constant() const { return node_->kind == Kind::Constant; }
  double constant_value() const { return node_->value; }
  std::string str() const { return print(*node_); }

 private:
  enum class Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;
  struct Node {
    Kind kind;
    double value;
    Var var;
    std::string fn;
    std::vector<NodePtr> args;
  };

  explicit Expression(NodePtr n) : node_(std::move(n)) {}

  static NodePtr constant_node(double c) {
    return std::make_shared<Node>(Node{Kind::Constant, c, Var::T, {}, {}});
  }
  static bool is_const(const NodePtr& n, double c) { return n->kind == Kind::Constant && n->value == c; }

  static NodePtr make(Kind k, std::vector<NodePtr> args, std::string fn = {}) {
    bool all_const = true;
    for (const auto& a : args) all_const = all_const && a->kind == Kind::Constant;
    auto n = std::make_shared<Node>(Node{k, 0.0, Var::T, std::move(fn), std::move(args)});
    if (all_const) {
      const double vars[3] = {0, 0, 0};
      return constant_node(eval(*n, vars));
    }
    // light algebraic folding
    const auto& a = n->args;
    switch (k) {
      case Kind::Add:
        if (is_const(a[0], 0.0)) return a[1];
        if (is_const(a[1], 0.0)) return a[0];
        break;
      case Kind::Sub:
        if (is_const(a[1], 0.0)) return a[0];
        if (is_const(a[0], 0.0)) return make(Kind::Neg, {a[1]});
        break;
      case Kind::Mul:
        if (is_const(a[0], 0.0) || is_const(a[1], 0.0)) return constant_node(0.0);
        if (is_const(a[0], 1.0)) return a[1];
        if (is_const(a[1], 1.0)) return a[0];
        break;
      case Kind::Div:
        if (is_const(a[0], 0.0)) return constant_node(0.0);
        if (is_const(a[1], 1.0)) return a[0];
        break;
      case Kind::Pow:
        if (is_const(a[1], 1.0)) return a[0];
        if (is_const(a[1], 0.0)) return constant_node(1.0);
        break;
      case Kind::Neg:
        if (a[0]->kind == Kind::Neg) return a[0]->args[0];
        break;
      default:
        break;
    }
    return n;
  }

  static double eval(const Node& n, const double* vars) {
    switch (n.kind) {
      case Kind::Constant: return n.value;
      case Kind::Variable: return vars[static_cast<int>(n.var)];
      case Kind::Add: return eval(*n.args[0], vars) + eval(*n.args[1], vars);
      case Kind::Sub: return eval(*n.args[0], vars) - eval(*n.args[1], vars);
      case Kind::Mul: return eval(*n.args[0], vars) * eval(*n.args[1], vars);
      case Kind::Div: return eval(*n.args[0], vars) / eval(*n.args[1], vars);
      case Kind::Pow: {
        const double b = eval(*n.args[0], vars), e = eval(*n.args[1], vars);
        if (e == 2.0) return b * b;
        return std::pow(b, e);
      }
      case Kind::Neg: return -eval(*n.args[0], vars);
      case Kind::Call: {
        const double a = eval(*n.args[0], vars);
        const std::string& f = n.fn;
        if (f == "sin") return std::sin(a);
        if (f == "cos") return std::cos(a);
        if (f == "tan") return std::tan(a);
        if (f == "exp") return std::exp(a);
        if (f == "log") return std::log(a);
        if (f == "sqrt") return std::sqrt(a);
        if (f == "abs") return std::abs(a);
        if (f == "sign") return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
        if (f == "tanh") return std::tanh(a);
        if (f == "step") return a > 0 ? 1.0 : (a < 0 ? 0.0 : 0.5);
        const double b = eval(*n.args[1], vars);
        if (f == "min") return std::min(a, b);
        if (f == "max") return std::max(a, b);
        return 0.0;
      }
    }
    return 0.0;
  }

  static bool depends(const Node& n, Var v) {
    if (n.kind == Kind::Variable) return n.var == v;
    for (const auto& a : n.args)
      if (depends(*a, v)) return true;
    return false;
  }

  static NodePtr call(const std::string& f, std::vector<NodePtr> args) {
    return make(Kind::Call, std::move(args), f);
  }

  static NodePtr diff(const NodePtr& n, Var v) {
    if (!depends(*n, v)) return constant_node(0.0);
    const auto& a = n->args;
    switch (n->kind) {
      case Kind::Constant: return constant_node(0.0);
      case Kind::Variable: return constant_node(n->var == v ? 1.0 : 0.0);
      case Kind::Add: return make(Kind::Add, {diff(a[0], v), diff(a[1], v)});
      case Kind::Sub: return make(Kind::Sub, {diff(a[0], v), diff(a[1], v)});
      case Kind::Neg: return make(Kind::Neg, {diff(a[0], v)});
      case Kind::Mul:
        return make(Kind::Add, {make(Kind::Mul, {diff(a[0], v), a[1]}),
                                make(Kind::Mul, {a[0], diff(a[1], v)})});
      case Kind::Div:
        return make(Kind::Div,
                    {make(Kind::Sub, {make(Kind::Mul, {diff(a[0], v), a[1]}),
                                      make(Kind::Mul, {a[0], diff(a[1], v)})}),
                     make(Kind::Mul, {a[1], a[1]})});
      case Kind::Pow: {
        if (!depends(*a[1], v)) {
          auto e1 = make(Kind::Sub, {a[1], constant_node(1.0)});
          return make(Kind::Mul, {make(Kind::Mul, {a[1], make(Kind::Pow, {a[0], e1})}), diff(a[0], v)});
        }
        // d(b^e) = b^e (e' log b + e b'/b)
        auto term = make(Kind::Add, {make(Kind::Mul, {diff(a[1], v), call("log", {a[0]})}),
                                     make(Kind::Div, {make(Kind::Mul, {a[1], diff(a[0], v)}), a[0]})});
        return make(Kind::Mul, {n, term});
      }
      case Kind::Call: {
        const std::string& f = n->fn;
        const NodePtr da = diff(a[0], v);
        NodePtr outer;
        if (f == "sin") outer = call("cos", {a[0]});
        else if (f == "cos") outer = make(Kind::Neg, {call("sin", {a[0]})});
        else if (f == "tan") outer = make(Kind::Div, {constant_node(1.0), make(Kind::Pow, {call("cos", {a[0]}), constant_node(2.0)})});
        else if (f == "exp") outer = n;
        else if (f == "log") outer = make(Kind::Div, {constant_node(1.0), a[0]});
        else if (f == "sqrt") outer = make(Kind::Div, {constant_node(0.5), n});
        else if (f == "abs") outer = call("sign", {a[0]});
        else if (f == "sign" || f == "step") outer = constant_node(0.0);
        else if (f == "tanh") outer = make(Kind::Sub, {constant_node(1.0), make(Kind::Pow, {n, constant_node(2.0)})});
        else {
          // min/max: pick the derivative of the active branch
          const NodePtr db = diff(a[1], v);
          const NodePtr s = call("step", {make(Kind::Sub, {a[1], a[0]})});  // 1 where a < b
          const NodePtr first = f == "min" ? s : make(Kind::Sub, {constant_node(1.0), s});
          const NodePtr second = make(Kind::Sub, {constant_node(1.0), first});
          return make(Kind::Add, {make(Kind::Mul, {first, da}), make(Kind::Mul, {second, db})});
        }
        return make(Kind::Mul, {outer, da});
      }
    }
    return constant_node(0.0);
  }

  static std::string print(const Node& n) {
    switch (n.kind) {
      case Kind::Constant: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        return buf;
      }
      case Kind::Variable: return n.var == Var::T ? "t" : (n.var == Var::X ? "x" : "u");
      case Kind::Add: return "(" + print(*n.args[0]) + " + " + print(*n.args[1]) + ")";
      case Kind::Sub: return "(" + print(*n.args[0]) + " - " + print(*n.args[1]) + ")";
      case Kind::Mul: return "(" + print(*n.args[0]) + " * " + print(*n.args[1]) + ")";
      case Kind::Div: return "(" + print(*n.args[0]) + " / " + print(*n.args[1]) + ")";
      case Kind::Pow: return "(" + print(*n.args[0]) + " ^ " + print(*n.args[1]) + ")";
      case Kind::Neg: return "(-" + print(*n.args[0]) + ")";
      case Kind::Call: {
        std::string s = n.fn + "(";
        for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? ", " : "") + print(*n.args[i]);
        return s + ")";
      }
    }
    return {};
  }

  struct Parser {
    std::string_view text;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& msg) const {
      throw ConfigError("expression error at column " + std::to_string(pos + 1) + ": " + msg);
    }
    void skip_space() {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool accept(char c) {
      skip_space();
      if (pos < text.size() && text[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    NodePtr parse_expr() {
      NodePtr lhs = parse_term();
      while (true) {
        if (accept('+')) lhs = make(Kind::Add, {lhs, parse_term()});
        else if (accept('-')) lhs = make(Kind::Sub, {lhs, parse_term()});
        else return lhs;
      }
    }
    NodePtr parse_term() {
      NodePtr lhs = parse_unary();
      while (true) {
        if (accept('*')) lhs = make(Kind::Mul, {lhs, parse_unary()});
        else if (accept('/')) lhs = make(Kind::Div, {lhs, parse_unary()});
        else return lhs;
      }
    }
    NodePtr parse_unary() {
      if (accept('-')) return make(Kind::Neg, {parse_unary()});
      if (accept('+')) return parse_unary();
      return parse_power();
    }
    NodePtr parse_power() {
      NodePtr base = parse_primary();
      if (accept('^')) return make(Kind::Pow, {base, parse_unary()});
      return base;
    }
    NodePtr parse_primary() {
      skip_space();
      if (pos >= text.size()) fail("unexpected end of expression");
      const char c = text[pos];
      if (accept('(')) {
        NodePtr inner = parse_expr();
        if (!accept(')')) fail("expected ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::string rest(text.substr(pos));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos += static_cast<std::size_t>(end - rest.c_str());
        return constant_node(v);
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
          ++pos;
        const std::string name(text.substr(start, pos - start));
        if (accept('(')) {
          std::vector<NodePtr> args{parse_expr()};
          while (accept(',')) args.push_back(parse_expr());
          if (!accept(')')) fail("expected ')' after arguments of " + name);
          static const char* unary[] = {"sin", "cos", "tan", "exp", "log", "sqrt",
                                        "abs", "sign", "tanh", "step"};
          bool is_unary = false;
          for (const char* f : unary) is_unary = is_unary || name == f;
          if (is_unary && args.size() == 1) return call(name, std::move(args));
          if ((name == "min" || name == "max") && args.size() == 2) return call(name, std::move(args));
          pos = start;
          fail("unknown function or wrong arity: " + name);
        }
        if (name == "t") return variable(Var::T).node_;
        if (name == "x") return variable(Var::X).node_;
        if (name == "u") return variable(Var::U).node_;
        if (name == "pi") return constant_node(std::numbers::pi);
        if (name == "e") return constant_node(std::numbers::e);
        pos = start;
        fail("unknown name: " + name);
      }
      fail("unexpected '" + std::string(1, c) + "'");
    }
  };

  NodePtr node_;
};

}  // namespace sfvm

#endif  // SFVM_EXPRESSION_HPP_
