#include "lorbundle/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace lorbundle::expr {

namespace {

ExprPtr make(Op op, double value, int var, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  n->var = var;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool const_val(const ExprPtr& e, double& out) {
  if (e->op == Op::Const) {
    out = e->value;
    return true;
  }
  return false;
}

}  // namespace

ExprPtr constant(double c) { return make(Op::Const, c, -1, nullptr, nullptr); }
ExprPtr variable(int index) { return make(Op::Var, 0.0, index, nullptr, nullptr); }

ExprPtr add(ExprPtr a, ExprPtr b) {
  double ca, cb;
  if (const_val(a, ca) && const_val(b, cb)) return constant(ca + cb);
  if (const_val(a, ca) && ca == 0.0) return b;
  if (const_val(b, cb) && cb == 0.0) return a;
  return make(Op::Add, 0, -1, std::move(a), std::move(b));
}

ExprPtr sub(ExprPtr a, ExprPtr b) {
  double ca, cb;
  if (const_val(a, ca) && const_val(b, cb)) return constant(ca - cb);
  if (const_val(b, cb) && cb == 0.0) return a;
  if (const_val(a, ca) && ca == 0.0) return neg(std::move(b));
  return make(Op::Sub, 0, -1, std::move(a), std::move(b));
}

ExprPtr mul(ExprPtr a, ExprPtr b) {
  double ca, cb;
  if (const_val(a, ca) && const_val(b, cb)) return constant(ca * cb);
  if (const_val(a, ca)) {
    if (ca == 0.0) return constant(0.0);
    if (ca == 1.0) return b;
  }
  if (const_val(b, cb)) {
    if (cb == 0.0) return constant(0.0);
    if (cb == 1.0) return a;
  }
  return make(Op::Mul, 0, -1, std::move(a), std::move(b));
}

ExprPtr div(ExprPtr a, ExprPtr b) {
  double ca, cb;
  if (const_val(b, cb)) {
    if (cb == 0.0) throw std::runtime_error("expr: division by constant zero");
    if (const_val(a, ca)) return constant(ca / cb);
    if (cb == 1.0) return a;
    return mul(constant(1.0 / cb), std::move(a));
  }
  if (const_val(a, ca) && ca == 0.0) return constant(0.0);
  return make(Op::Div, 0, -1, std::move(a), std::move(b));
}

ExprPtr pow(ExprPtr base, double exponent) {
  if (exponent == 0.0) return constant(1.0);
  if (exponent == 1.0) return base;
  double cb;
  if (const_val(base, cb)) return constant(std::pow(cb, exponent));
  return make(Op::Pow, exponent, -1, std::move(base), nullptr);
}

ExprPtr neg(ExprPtr a) {
  double ca;
  if (const_val(a, ca)) return constant(-ca);
  if (a->op == Op::Neg) return a->a;
  return make(Op::Neg, 0, -1, std::move(a), nullptr);
}

ExprPtr sin(ExprPtr a) {
  double ca;
  if (const_val(a, ca)) return constant(std::sin(ca));
  return make(Op::Sin, 0, -1, std::move(a), nullptr);
}

ExprPtr cos(ExprPtr a) {
  double ca;
  if (const_val(a, ca)) return constant(std::cos(ca));
  return make(Op::Cos, 0, -1, std::move(a), nullptr);
}

ExprPtr exp(ExprPtr a) {
  double ca;
  if (const_val(a, ca)) return constant(std::exp(ca));
  return make(Op::Exp, 0, -1, std::move(a), nullptr);
}

double eval(const Node* n, std::span<const double> vars) {
  switch (n->op) {
    case Op::Const: return n->value;
    case Op::Var: return vars[static_cast<size_t>(n->var)];
    case Op::Add: return eval(n->a.get(), vars) + eval(n->b.get(), vars);
    case Op::Sub: return eval(n->a.get(), vars) - eval(n->b.get(), vars);
    case Op::Mul: return eval(n->a.get(), vars) * eval(n->b.get(), vars);
    case Op::Div: return eval(n->a.get(), vars) / eval(n->b.get(), vars);
    case Op::Pow: return std::pow(eval(n->a.get(), vars), n->value);
    case Op::Neg: return -eval(n->a.get(), vars);
    case Op::Sin: return std::sin(eval(n->a.get(), vars));
    case Op::Cos: return std::cos(eval(n->a.get(), vars));
    case Op::Exp: return std::exp(eval(n->a.get(), vars));
  }
  return 0.0;
}

ExprPtr diff(const ExprPtr& e, int var) {
  switch (e->op) {
    case Op::Const: return constant(0.0);
    case Op::Var: return constant(e->var == var ? 1.0 : 0.0);
    case Op::Add: return add(diff(e->a, var), diff(e->b, var));
    case Op::Sub: return sub(diff(e->a, var), diff(e->b, var));
    case Op::Mul:
      return add(mul(diff(e->a, var), e->b), mul(e->a, diff(e->b, var)));
    case Op::Div:
      // (a/b)' = a'/b - a b'/b^2
      return sub(div(diff(e->a, var), e->b),
                 div(mul(e->a, diff(e->b, var)), mul(e->b, e->b)));
    case Op::Pow:
      return mul(constant(e->value),
                 mul(pow(e->a, e->value - 1.0), diff(e->a, var)));
    case Op::Neg: return neg(diff(e->a, var));
    case Op::Sin: return mul(cos(e->a), diff(e->a, var));
    case Op::Cos: return neg(mul(sin(e->a), diff(e->a, var)));
    case Op::Exp: return mul(exp(e->a), diff(e->a, var));
  }
  return constant(0.0);
}

ExprPtr remap_vars(const ExprPtr& e, std::span<const int> map) {
  switch (e->op) {
    case Op::Const: return e;
    case Op::Var: {
      if (e->var >= static_cast<int>(map.size()) || map[static_cast<size_t>(e->var)] < 0)
        throw std::runtime_error("expr: variable has no image under remap");
      return variable(map[static_cast<size_t>(e->var)]);
    }
    case Op::Pow: return pow(remap_vars(e->a, map), e->value);
    default: break;
  }
  ExprPtr a = e->a ? remap_vars(e->a, map) : nullptr;
  ExprPtr b = e->b ? remap_vars(e->b, map) : nullptr;
  return make(e->op, e->value, e->var, std::move(a), std::move(b));
}

bool depends_on(const ExprPtr& e, int var) {
  if (e->op == Op::Var) return e->var == var;
  if (e->a && depends_on(e->a, var)) return true;
  if (e->b && depends_on(e->b, var)) return true;
  return false;
}

bool is_constant(const ExprPtr& e, double* value) {
  if (e->op != Op::Const) return false;
  if (value) *value = e->value;
  return true;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser.
// expr    := term (('+'|'-') term)*
// term    := factor (('*'|'/') factor)*
// factor  := unary ('^' number)?
// unary   := '-' unary | primary
// primary := number | ident | ident '(' expr ')' | '(' expr ')'
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  const std::string& text;
  const std::vector<std::string>& names;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("expr parse error at position " + std::to_string(pos) +
                             " in \"" + text + "\": " + msg);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool peek(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  double number() {
    skip_ws();
    char* end = nullptr;
    double v = std::strtod(text.c_str() + pos, &end);
    if (end == text.c_str() + pos) fail("expected a number");
    pos = static_cast<size_t>(end - text.c_str());
    return v;
  }

  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected an identifier");
    return text.substr(start, pos - start);
  }

  ExprPtr primary() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return constant(number());
    if (c == '(') {
      ++pos;
      ExprPtr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    std::string id = ident();
    if (id == "pi") return constant(3.14159265358979323846);
    if (id == "sin" || id == "cos" || id == "exp") {
      if (!accept('(')) fail("expected '(' after " + id);
      ExprPtr arg = expression();
      if (!accept(')')) fail("expected ')'");
      if (id == "sin") return sin(arg);
      if (id == "cos") return cos(arg);
      return exp(arg);
    }
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == id) return variable(static_cast<int>(i));
    fail("unknown identifier '" + id + "'");
  }

  ExprPtr unary() {
    if (accept('-')) return neg(unary());
    if (accept('+')) return unary();
    return factor_tail(primary());
  }

  ExprPtr factor_tail(ExprPtr base) {
    if (accept('^')) {
      skip_ws();
      bool negexp = accept('-');
      double e = number();
      return pow(std::move(base), negexp ? -e : e);
    }
    return base;
  }

  ExprPtr term() {
    ExprPtr e = unary();
    for (;;) {
      if (accept('*'))
        e = mul(e, unary());
      else if (accept('/'))
        e = div(e, unary());
      else
        return e;
    }
  }

  ExprPtr expression() {
    ExprPtr e = term();
    for (;;) {
      if (accept('+'))
        e = add(e, term());
      else if (accept('-'))
        e = sub(e, term());
      else
        return e;
    }
  }
};

void print(const ExprPtr& e, const std::vector<std::string>& names, std::string& out) {
  switch (e->op) {
    case Op::Const: out += std::to_string(e->value); return;
    case Op::Var:
      out += (e->var < static_cast<int>(names.size())) ? names[static_cast<size_t>(e->var)]
                                                       : "#" + std::to_string(e->var);
      return;
    case Op::Pow:
      out += '(';
      print(e->a, names, out);
      out += ")^" + std::to_string(e->value);
      return;
    case Op::Neg:
      out += "-(";
      print(e->a, names, out);
      out += ')';
      return;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
      out += (e->op == Op::Sin) ? "sin(" : (e->op == Op::Cos) ? "cos(" : "exp(";
      print(e->a, names, out);
      out += ')';
      return;
    default: {
      const char* sym = e->op == Op::Add ? " + " : e->op == Op::Sub ? " - "
                        : e->op == Op::Mul ? "*" : "/";
      out += '(';
      print(e->a, names, out);
      out += sym;
      print(e->b, names, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

ExprPtr parse(const std::string& text, const std::vector<std::string>& var_names) {
  Parser p{text, var_names};
  ExprPtr e = p.expression();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");
  return e;
}

std::string to_string(const ExprPtr& e, const std::vector<std::string>& var_names) {
  std::string out;
  print(e, var_names, out);
  return out;
}

}  // namespace lorbundle::expr
