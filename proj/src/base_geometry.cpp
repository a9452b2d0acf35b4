#include "lorbundle/base_geometry.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace lorbundle {

ProductBase::ProductBase(std::vector<Factor> factors, int circle_index, ScalarField rho)
    : factors_(std::move(factors)), circle_index_(circle_index), rho_(std::move(rho)) {
  if (circle_index_ < 0 || circle_index_ >= dim())
    throw std::invalid_argument("ProductBase: circle_index out of range");
  if (factors_[static_cast<size_t>(circle_index_)].kind != FactorKind::TorusCircle)
    throw std::invalid_argument("ProductBase: distinguished factor must be a circle");
  for (int a = 0; a < dim(); ++a) {
    if (a == circle_index_) continue;
    ker_coords_.push_back(a);
    if (factors_[static_cast<size_t>(a)].kind == FactorKind::WarpedLine) ++m_warped_;
  }
}

std::vector<std::string> ProductBase::coord_names() const {
  std::vector<std::string> names;
  names.reserve(factors_.size());
  for (const auto& f : factors_) names.push_back(f.coord_name);
  return names;
}

double ProductBase::warp_at(int a, const Vec& p) const {
  const Factor& f = factors_[static_cast<size_t>(a)];
  if (f.kind == FactorKind::TorusCircle) return 1.0;
  double x = p[a];
  double phi = f.warp.value(std::span<const double>(&x, 1));
  if (!std::isfinite(phi)) throw std::domain_error("ProductBase: non-finite warp value");
  if (phi == 0.0) throw std::domain_error("ProductBase: warp vanishes at sample point");
  return phi;
}

double ProductBase::h_diag(int a, const Vec& p) const {
  double phi = warp_at(a, p);
  return phi * phi;
}

double ProductBase::h_diag_partial(int c, int a, const Vec& p) const {
  const Factor& f = factors_[static_cast<size_t>(a)];
  if (f.kind == FactorKind::TorusCircle || c != a) return 0.0;
  double x = p[a];
  std::span<const double> xs(&x, 1);
  return 2.0 * f.warp.value(xs) * f.warp.partial(0, xs);
}

double ProductBase::h_diag_partial2(int c, int d, int a, const Vec& p) const {
  const Factor& f = factors_[static_cast<size_t>(a)];
  if (f.kind == FactorKind::TorusCircle || c != a || d != a) return 0.0;
  double x = p[a];
  std::span<const double> xs(&x, 1);
  double phi = f.warp.value(xs), d1 = f.warp.partial(0, xs), d2 = f.warp.partial2(0, 0, xs);
  return 2.0 * (d1 * d1 + phi * d2);
}

Mat ProductBase::h(const Vec& p) const {
  Mat m = Mat::Zero(dim(), dim());
  for (int a = 0; a < dim(); ++a) m(a, a) = h_diag(a, p);
  return m;
}

Mat ProductBase::h_inv(const Vec& p) const {
  Mat m = Mat::Zero(dim(), dim());
  for (int a = 0; a < dim(); ++a) m(a, a) = 1.0 / h_diag(a, p);
  return m;
}

double ProductBase::rho(const Vec& p) const {
  double u = p[circle_index_];
  return rho_.value(std::span<const double>(&u, 1));
}

double ProductBase::rho_d1(const Vec& p) const {
  double u = p[circle_index_];
  return rho_.partial(0, std::span<const double>(&u, 1));
}

double ProductBase::rho_d2(const Vec& p) const {
  double u = p[circle_index_];
  return rho_.partial2(0, 0, std::span<const double>(&u, 1));
}

Vec ProductBase::eta_components(const Vec& p) const {
  Vec eta = Vec::Zero(dim());
  eta[circle_index_] = rho(p);
  return eta;
}

Vec ProductBase::eta_sharp(const Vec& p) const {
  Vec s = Vec::Zero(dim());
  s[circle_index_] = rho(p) / h_diag(circle_index_, p);
  return s;
}

double ProductBase::eta_norm2(const Vec& p) const {
  double r = rho(p);
  return r * r / h_diag(circle_index_, p);
}

OneForm ProductBase::eta_one_form() const {
  std::vector<ScalarField> comps;
  comps.reserve(static_cast<size_t>(dim()));
  for (int a = 0; a < dim(); ++a) {
    if (a == circle_index_) {
      std::vector<int> map{circle_index_};
      comps.push_back(rho_.remap(dim(), map));
    } else {
      comps.push_back(ScalarField::zero(dim()));
    }
  }
  return OneForm(std::move(comps));
}

Tensor3 ProductBase::christoffel(const Vec& p) const {
  int d = dim();
  Tensor3 g(d);
  // Diagonal product metric, each h_aa depends on its own coordinate only:
  // the only nonzero symbols are Gamma^a_aa = phi_a'/phi_a.
  for (int a = 0; a < d; ++a) {
    const Factor& f = factors_[static_cast<size_t>(a)];
    if (f.kind == FactorKind::TorusCircle) continue;
    double phi = warp_at(a, p);
    double x = p[a];
    double d1 = f.warp.partial(0, std::span<const double>(&x, 1));
    g(a, a, a) = d1 / phi;
  }
  return g;
}

double ProductBase::christoffel_partial(int l, int k, int i, int j, const Vec& p) const {
  if (!(l == k && k == i && i == j)) return 0.0;
  const Factor& f = factors_[static_cast<size_t>(k)];
  if (f.kind == FactorKind::TorusCircle) return 0.0;
  double x = p[k];
  std::span<const double> xs(&x, 1);
  double phi = f.warp.value(xs), d1 = f.warp.partial(0, xs), d2 = f.warp.partial2(0, 0, xs);
  return d2 / phi - (d1 / phi) * (d1 / phi);
}

Tensor4 ProductBase::riemann(const Vec& p) const {
  int d = dim();
  Tensor3 G = christoffel(p);
  Tensor4 rl(d);
  Mat hm = h(p);
  // R(d_a, d_b)d_c = (d_a G^e_bc - d_b G^e_ac + G^e_af G^f_bc - G^e_bf G^f_ac) d_e
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double r = christoffel_partial(a, e, b, c, p) - christoffel_partial(b, e, a, c, p);
          for (int f = 0; f < d; ++f)
            r += G(e, a, f) * G(f, b, c) - G(e, b, f) * G(f, a, c);
          // lower the e index
          rl(a, b, c, e) += r * hm(e, e);
        }
  return rl;
}

Mat ProductBase::ricci(const Vec& p) const {
  int d = dim();
  Tensor4 R = riemann(p);
  Mat hi = h_inv(p);
  Mat ric = Mat::Zero(d, d);
  // Ric(Y,Z) = trace(X -> R(X,Y)Z) = h^{ae} R_{a Y Z e}
  for (int y = 0; y < d; ++y)
    for (int z = 0; z < d; ++z) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += hi(a, a) * R(a, y, z, a);
      ric(y, z) = s;
    }
  return ric;
}

Vec ProductBase::sharp(const Vec& alpha, const Vec& p) const {
  Vec v(dim());
  for (int a = 0; a < dim(); ++a) v[a] = alpha[a] / h_diag(a, p);
  return v;
}

Vec ProductBase::flat_of(const Vec& X, const Vec& p) const {
  Vec v(dim());
  for (int a = 0; a < dim(); ++a) v[a] = X[a] * h_diag(a, p);
  return v;
}

Vec ProductBase::grad(const ScalarField& f, const Vec& p) const {
  Vec df(dim());
  for (int a = 0; a < dim(); ++a) df[a] = f.partial(a, p);
  return sharp(df, p);
}

double ProductBase::divergence_vec(const std::vector<ScalarField>& X, const Vec& p) const {
  Tensor3 G = christoffel(p);
  double s = 0.0;
  for (int a = 0; a < dim(); ++a) {
    s += X[static_cast<size_t>(a)].partial(a, p);
    for (int b = 0; b < dim(); ++b) s += G(a, a, b) * X[static_cast<size_t>(b)].value(p);
  }
  return s;
}

Mat ProductBase::covariant_deriv_form(const OneForm& alpha, const Vec& p) const {
  Tensor3 G = christoffel(p);
  Mat res(dim(), dim());
  for (int a = 0; a < dim(); ++a)
    for (int b = 0; b < dim(); ++b) {
      double v = alpha.comp(b).partial(a, p);
      for (int c = 0; c < dim(); ++c) v -= G(c, a, b) * alpha.comp(c).value(p);
      res(a, b) = v;
    }
  return res;
}

double ProductBase::divergence_form(const OneForm& alpha, const Vec& p) const {
  Mat na = covariant_deriv_form(alpha, p);
  Mat hi = h_inv(p);
  double s = 0.0;
  for (int a = 0; a < dim(); ++a) s += hi(a, a) * na(a, a);
  return s;
}

double ProductBase::laplacian(const ScalarField& f, const Vec& p) const {
  Mat hess = hessian(f, p);
  Mat hi = h_inv(p);
  double s = 0.0;
  for (int a = 0; a < dim(); ++a) s += hi(a, a) * hess(a, a);
  return s;
}

Mat ProductBase::hessian(const ScalarField& f, const Vec& p) const {
  Tensor3 G = christoffel(p);
  Mat hess(dim(), dim());
  for (int a = 0; a < dim(); ++a)
    for (int b = 0; b < dim(); ++b) {
      double v = f.partial2(a, b, p);
      for (int c = 0; c < dim(); ++c) v -= G(c, a, b) * f.partial(c, p);
      hess(a, b) = v;
    }
  return hess;
}

double ProductBase::covariant_deriv_two_form(const TwoForm& psi, int a, int b, int c,
                                             const Vec& p) const {
  Tensor3 G = christoffel(p);
  double v = psi.partial(a, b, c, p);
  for (int d = 0; d < dim(); ++d) {
    v -= G(d, a, b) * psi.component(d, c, p);
    v -= G(d, a, c) * psi.component(b, d, p);
  }
  return v;
}

Mat ProductBase::nabla_eta(const Vec& p, double tol) const {
  Mat res = covariant_deriv_form(eta_one_form(), p);
  double asym = (res - res.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol)
    throw std::runtime_error("nabla_eta: asymmetric beyond tolerance (" +
                             std::to_string(asym) + "); eta not closed?");
  return 0.5 * (res + res.transpose());
}

bool ProductBase::eta_recurrent(const Vec& p, Vec* theta, double tol) const {
  Mat ne = nabla_eta(p);
  Vec eta = eta_components(p);
  double n2 = eta.squaredNorm();
  // candidate theta from projecting onto eta
  Vec cand = ne * eta / n2;
  Mat resid = ne - cand * eta.transpose();
  if (theta) *theta = cand;
  return resid.cwiseAbs().maxCoeff() <= tol;
}

Mat ProductBase::psi_matrix(const TwoForm& Psi, const Vec& p) const {
  // h(psi(X), Y) = Psi(X, Y)  =>  action matrix  psi = -h^{-1} [Psi_ab]
  return -h_inv(p) * Psi.matrix(p);
}

Mat ProductBase::psi_screen_matrix(const TwoForm& Psi, const Vec& p) const {
  BaseFrame fr = frame(p);
  Mat psi = psi_matrix(Psi, p);
  Mat hm = h(p);
  int n = static_cast<int>(fr.screen_coord.size());
  Mat res(n, n);
  // M_{ji} coefficients of psi(E_i) on E_j: h(psi E_i, E_j) since frame orthonormal.
  for (int i = 0; i < n; ++i) {
    Vec img = psi * fr.screen.col(i);
    for (int j = 0; j < n; ++j) res(j, i) = img.dot(hm * fr.screen.col(j));
  }
  return res;
}

BaseFrame ProductBase::frame(const Vec& p) const {
  BaseFrame fr;
  fr.point = p;
  int nscr = n();
  fr.screen = Mat::Zero(dim(), nscr);
  int idx = 0;
  for (int a : ker_coords_) {
    fr.screen(a, idx) = 1.0 / std::sqrt(h_diag(a, p));
    fr.screen_coord.push_back(a);
    ++idx;
  }
  fr.e_eta = eta_sharp(p) / eta_norm2(p);
  return fr;
}

double ProductBase::check_eta_closed(const std::vector<Vec>& pts) const {
  OneForm eta = eta_one_form();
  double sup = 0.0;
  for (const auto& p : pts) sup = std::max(sup, eta.exterior_derivative(p).cwiseAbs().maxCoeff());
  return sup;
}

double ProductBase::check_eta_nonvanishing(const std::vector<Vec>& pts) const {
  double inf = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) inf = std::min(inf, std::sqrt(eta_norm2(p)));
  return inf;
}

double ProductBase::check_metricity(const std::vector<Vec>& pts) const {
  double sup = 0.0;
  for (const auto& p : pts) {
    Tensor3 G = christoffel(p);
    for (int c = 0; c < dim(); ++c)
      for (int a = 0; a < dim(); ++a)
        for (int b = 0; b < dim(); ++b) {
          // (nabla_c h)_{ab}
          double v = (a == b) ? h_diag_partial(c, a, p) : 0.0;
          for (int e = 0; e < dim(); ++e) {
            v -= G(e, c, a) * ((e == b) ? h_diag(b, p) : 0.0);
            v -= G(e, c, b) * ((a == e) ? h_diag(a, p) : 0.0);
          }
          sup = std::max(sup, std::abs(v));
        }
  }
  return sup;
}

std::vector<Vec> ProductBase::sample_points(int count, unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> torus(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> line(-1.5, 1.5);
  std::vector<Vec> pts;
  pts.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vec p(dim());
    for (int a = 0; a < dim(); ++a)
      p[a] = coord_periodic(a) ? torus(rng) : line(rng);
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace lorbundle
