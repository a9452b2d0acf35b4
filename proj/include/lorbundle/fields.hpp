// Scalar/one-form/two-form fields over a fixed coordinate space.
// Fields are AST-backed (exact symbolic partials of any order) or closure-backed
// (4th-order central differences, step 1e-3). Immutable after construction;
// evaluation is pure and reentrant.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorbundle/expr.hpp"

namespace lorbundle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// 4th-order central difference step used whenever analytic partials are absent.
inline constexpr double kFdStep = 1e-3;

class ScalarField {
 public:
  ScalarField() = default;

  /// AST-backed field (preferred; exact derivatives).
  ScalarField(int dim, expr::ExprPtr ast);

  /// Closure-backed field; derivatives fall back to finite differences.
  ScalarField(int dim, std::function<double(std::span<const double>)> fn);

  static ScalarField zero(int dim) { return ScalarField(dim, expr::constant(0.0)); }
  static ScalarField constant(int dim, double c) {
    return ScalarField(dim, expr::constant(c));
  }

  int dim() const { return dim_; }
  bool analytic() const { return static_cast<bool>(ast_); }
  const expr::ExprPtr& ast() const { return ast_; }
  bool is_zero() const;
  bool depends_on(int var) const;

  double value(std::span<const double> x) const;
  double value(const Vec& x) const { return value(std::span<const double>(x.data(), static_cast<size_t>(x.size()))); }

  double partial(int i, std::span<const double> x) const;
  double partial(int i, const Vec& x) const {
    return partial(i, std::span<const double>(x.data(), static_cast<size_t>(x.size())));
  }

  double partial2(int i, int j, std::span<const double> x) const;
  double partial2(int i, int j, const Vec& x) const {
    return partial2(i, j, std::span<const double>(x.data(), static_cast<size_t>(x.size())));
  }

  /// Field algebra; stays analytic when both operands are.
  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double c, const ScalarField& a);

  /// Reinterpret over a larger coordinate space: variable i becomes map[i].
  ScalarField remap(int new_dim, std::span<const int> map) const;

 private:
  int dim_ = 0;
  expr::ExprPtr ast_;
  std::vector<expr::ExprPtr> d1_;               // d1_[i] = ∂_i ast
  std::vector<expr::ExprPtr> d2_;               // packed upper triangle
  std::function<double(std::span<const double>)> fn_;

  void build_derivatives();
  int tri_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return i * dim_ - i * (i - 1) / 2 + (j - i);
  }
};

/// One-form with per-coordinate component fields.
class OneForm {
 public:
  OneForm() = default;
  explicit OneForm(std::vector<ScalarField> comps) : comps_(std::move(comps)) {}
  static OneForm zero(int dim);

  int dim() const { return static_cast<int>(comps_.size()); }
  const ScalarField& comp(int i) const { return comps_[static_cast<size_t>(i)]; }
  ScalarField& comp(int i) { return comps_[static_cast<size_t>(i)]; }

  Vec components(const Vec& x) const;
  /// dα as antisym matrix: (dα)_{ij} = ∂_i α_j − ∂_j α_i.
  Mat exterior_derivative(const Vec& x) const;

 private:
  std::vector<ScalarField> comps_;
};

/// Antisymmetric two-form; stores components for i < j.
class TwoForm {
 public:
  TwoForm() = default;
  explicit TwoForm(int dim);

  static TwoForm zero(int dim) { return TwoForm(dim); }

  int dim() const { return dim_; }
  void set(int i, int j, ScalarField f);  // sets Ψ_ij = f, Ψ_ji = −f
  const ScalarField& comp_upper(int i, int j) const;  // requires i < j
  bool has_component(int i, int j) const;

  /// Ψ_ij(x); antisymmetry exact by storage.
  double component(int i, int j, const Vec& x) const;
  Mat matrix(const Vec& x) const;
  /// ∂_k Ψ_ij
  double partial(int k, int i, int j, const Vec& x) const;
  /// dΨ components (dΨ)_{kij} = ∂_k Ψ_ij + ∂_i Ψ_jk + ∂_j Ψ_ki for k<i<j.
  double d_component(int k, int i, int j, const Vec& x) const;
  /// sup |dΨ| over all index triples at x.
  double d_sup(const Vec& x) const;

 private:
  int dim_ = 0;
  std::vector<ScalarField> upper_;  // packed i<j
  int pack(int i, int j) const { return i * dim_ - i * (i + 1) / 2 + (j - i - 1); }
};

}  // namespace lorbundle
