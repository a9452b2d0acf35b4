// Tiny arithmetic/trig expression language: parser, evaluator, symbolic
// differentiation. Grammar: + - * / ^ (constant exponent), sin, cos, exp,
// numeric constants, named variables. This is the analytic-derivative path
// for every field in the library.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lorbundle::expr {

enum class Op {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // exponent stored in value, base in a
  Neg,
  Sin,
  Cos,
  Exp
};

struct Node;
using ExprPtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // Const value or Pow exponent
  int var = -1;        // Var index
  ExprPtr a, b;
};

ExprPtr constant(double c);
ExprPtr variable(int index);
ExprPtr add(ExprPtr a, ExprPtr b);
ExprPtr sub(ExprPtr a, ExprPtr b);
ExprPtr mul(ExprPtr a, ExprPtr b);
ExprPtr div(ExprPtr a, ExprPtr b);
ExprPtr pow(ExprPtr base, double exponent);
ExprPtr neg(ExprPtr a);
ExprPtr sin(ExprPtr a);
ExprPtr cos(ExprPtr a);
ExprPtr exp(ExprPtr a);

double eval(const Node* n, std::span<const double> vars);
inline double eval(const ExprPtr& e, std::span<const double> vars) {
  return eval(e.get(), vars);
}

/// d(expr)/d(var index). Result is constant-folded.
ExprPtr diff(const ExprPtr& e, int var);

/// Replace each Var i by Var map[i]. map[i] < 0 is an error if Var i occurs.
ExprPtr remap_vars(const ExprPtr& e, std::span<const int> map);

bool depends_on(const ExprPtr& e, int var);
bool is_constant(const ExprPtr& e, double* value = nullptr);

/// Parse against a fixed variable-name list. Throws std::runtime_error with
/// a caret diagnostic on malformed input or unknown identifiers.
ExprPtr parse(const std::string& text, const std::vector<std::string>& var_names);

std::string to_string(const ExprPtr& e, const std::vector<std::string>& var_names);

}  // namespace lorbundle::expr
