#include "lorbundle/fields.hpp"

#include <cmath>

namespace lorbundle {

namespace {

// 4th-order central difference of a 1-argument slice.
template <typename F>
double fd4(F&& f, double h) {
  return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

}  // namespace

ScalarField::ScalarField(int dim, expr::ExprPtr ast) : dim_(dim), ast_(std::move(ast)) {
  build_derivatives();
}

ScalarField::ScalarField(int dim, std::function<double(std::span<const double>)> fn)
    : dim_(dim), fn_(std::move(fn)) {}

void ScalarField::build_derivatives() {
  d1_.resize(static_cast<size_t>(dim_));
  for (int i = 0; i < dim_; ++i) d1_[static_cast<size_t>(i)] = expr::diff(ast_, i);
  d2_.resize(static_cast<size_t>(dim_ * (dim_ + 1) / 2));
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j)
      d2_[static_cast<size_t>(tri_index(i, j))] = expr::diff(d1_[static_cast<size_t>(i)], j);
}

bool ScalarField::is_zero() const {
  double v;
  return ast_ && expr::is_constant(ast_, &v) && v == 0.0;
}

bool ScalarField::depends_on(int var) const {
  if (ast_) return expr::depends_on(ast_, var);
  return true;  // unknown for closures; assume yes
}

double ScalarField::value(std::span<const double> x) const {
  if (ast_) return expr::eval(ast_, x);
  return fn_(x);
}

double ScalarField::partial(int i, std::span<const double> x) const {
  if (ast_) return expr::eval(d1_[static_cast<size_t>(i)], x);
  std::vector<double> p(x.begin(), x.end());
  return fd4(
      [&](double h) {
        p[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + h;
        double v = fn_(p);
        p[static_cast<size_t>(i)] = x[static_cast<size_t>(i)];
        return v;
      },
      kFdStep);
}

double ScalarField::partial2(int i, int j, std::span<const double> x) const {
  if (ast_) return expr::eval(d2_[static_cast<size_t>(tri_index(i, j))], x);
  std::vector<double> p(x.begin(), x.end());
  auto dj_at = [&](double hi) {
    std::vector<double> q = p;
    q[static_cast<size_t>(i)] += hi;
    return fd4(
        [&](double hj) {
          std::vector<double> r = q;
          r[static_cast<size_t>(j)] += hj;
          return fn_(r);
        },
        kFdStep);
  };
  return fd4(dj_at, kFdStep);
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.ast_ && b.ast_) return ScalarField(a.dim_, expr::add(a.ast_, b.ast_));
  ScalarField ac = a, bc = b;
  return ScalarField(a.dim_, [ac, bc](std::span<const double> x) {
    return ac.value(x) + bc.value(x);
  });
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  if (a.ast_ && b.ast_) return ScalarField(a.dim_, expr::sub(a.ast_, b.ast_));
  ScalarField ac = a, bc = b;
  return ScalarField(a.dim_, [ac, bc](std::span<const double> x) {
    return ac.value(x) - bc.value(x);
  });
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  if (a.ast_ && b.ast_) return ScalarField(a.dim_, expr::mul(a.ast_, b.ast_));
  ScalarField ac = a, bc = b;
  return ScalarField(a.dim_, [ac, bc](std::span<const double> x) {
    return ac.value(x) * bc.value(x);
  });
}

ScalarField operator*(double c, const ScalarField& a) {
  if (a.ast_) return ScalarField(a.dim_, expr::mul(expr::constant(c), a.ast_));
  ScalarField ac = a;
  return ScalarField(a.dim_, [c, ac](std::span<const double> x) { return c * ac.value(x); });
}

ScalarField ScalarField::remap(int new_dim, std::span<const int> map) const {
  if (ast_) return ScalarField(new_dim, expr::remap_vars(ast_, map));
  std::vector<int> m(map.begin(), map.end());
  auto fn = fn_;
  int old_dim = dim_;
  return ScalarField(new_dim, [fn, m, old_dim](std::span<const double> x) {
    std::vector<double> y(static_cast<size_t>(old_dim));
    for (int i = 0; i < old_dim; ++i) y[static_cast<size_t>(i)] = x[static_cast<size_t>(m[static_cast<size_t>(i)])];
    return fn(y);
  });
}

OneForm OneForm::zero(int dim) {
  std::vector<ScalarField> c;
  c.reserve(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) c.push_back(ScalarField::zero(dim));
  return OneForm(std::move(c));
}

Vec OneForm::components(const Vec& x) const {
  Vec v(dim());
  for (int i = 0; i < dim(); ++i) v[i] = comps_[static_cast<size_t>(i)].value(x);
  return v;
}

Mat OneForm::exterior_derivative(const Vec& x) const {
  int n = dim();
  Mat d = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = comps_[static_cast<size_t>(j)].partial(i, x) -
                comps_[static_cast<size_t>(i)].partial(j, x);
    }
  return d;
}

TwoForm::TwoForm(int dim) : dim_(dim) {
  upper_.resize(static_cast<size_t>(dim * (dim - 1) / 2));
  for (auto& f : upper_) f = ScalarField::zero(dim);
}

void TwoForm::set(int i, int j, ScalarField f) {
  if (i == j) throw std::runtime_error("TwoForm: diagonal component must be zero");
  if (i < j)
    upper_[static_cast<size_t>(pack(i, j))] = std::move(f);
  else
    upper_[static_cast<size_t>(pack(j, i))] = -1.0 * f;
}

const ScalarField& TwoForm::comp_upper(int i, int j) const {
  return upper_[static_cast<size_t>(pack(i, j))];
}

bool TwoForm::has_component(int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return !upper_[static_cast<size_t>(pack(i, j))].is_zero();
}

double TwoForm::component(int i, int j, const Vec& x) const {
  if (i == j) return 0.0;
  if (i < j) return upper_[static_cast<size_t>(pack(i, j))].value(x);
  return -upper_[static_cast<size_t>(pack(j, i))].value(x);
}

Mat TwoForm::matrix(const Vec& x) const {
  Mat m = Mat::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      double v = upper_[static_cast<size_t>(pack(i, j))].value(x);
      m(i, j) = v;
      m(j, i) = -v;
    }
  return m;
}

double TwoForm::partial(int k, int i, int j, const Vec& x) const {
  if (i == j) return 0.0;
  if (i < j) return upper_[static_cast<size_t>(pack(i, j))].partial(k, x);
  return -upper_[static_cast<size_t>(pack(j, i))].partial(k, x);
}

double TwoForm::d_component(int k, int i, int j, const Vec& x) const {
  return partial(k, i, j, x) + partial(i, j, k, x) + partial(j, k, i, x);
}

double TwoForm::d_sup(const Vec& x) const {
  double sup = 0.0;
  for (int k = 0; k < dim_; ++k)
    for (int i = k + 1; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j)
        sup = std::max(sup, std::abs(d_component(k, i, j, x)));
  return sup;
}

}  // namespace lorbundle
